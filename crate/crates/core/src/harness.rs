//! Experiment orchestration: simulate a run, sample finite counts, derive
//! the reported quantities and move run artifacts to and from disk.
//!
//! Randomness comes from one ChaCha8 generator per run, seeded with the
//! spec's `seed`. Sampled rows are numbered in the order they are taken
//! (settings in lexicographic order, then CHSH settings, or fringe points
//! in sweep order) and row `k` draws from stream `k`, so rows can be
//! sampled in parallel without changing the result.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bayes::{likelihood, model_tables, posterior, gaussian_summary, LikelihoodMethod, ModelOptions, ParameterGrid};
use crate::calibration::{self, calibrate, FringeSample};
use crate::device::{
    hom_fringe, phase_sweep, fit_fringe_visibility, visibility_conversion, AnalysisSetting, Device, DeviceConfig,
    OutcomeDistribution, QubitAnalysis, RpegMode, QUBITS,
};
use crate::error::{Error, Result};
use crate::error_models::{measurement_settings, ErrorModel, StateKind, FIRST_ORDER_P};
use crate::stabilizer::{
    chsh, estimates_from_table, fidelity, format_bits, ideal_state_vector, mermin_three_setting,
    mermin_two_setting_all, project_qubits_zero, pure_fidelity, CountsTable, Estimate, Graph, OutcomeTable,
    OutcomeWeight, Pauli, PauliString, ProbabilityTable, StabilizerGroup,
};

/// Fourfold event rate of the star state at first-order pair probability.
pub const S4_FOURFOLD_RATE_HZ: f64 = 5.7e-3;
/// Per-setting integration time giving about 176 fourfold events at the
/// calibrated rate.
pub const DEFAULT_SETTING_TIME_S: f64 = 30_877.0;
pub const OUT_DIR_ENV: &str = "GRAPHCHIP_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Hom,
    Stabilizers,
    Mermin,
    Project,
    Bell,
    Bayes,
    Calibrate,
    Loss,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hom => "hom",
            Self::Stabilizers => "stabilizers",
            Self::Mermin => "mermin",
            Self::Project => "project",
            Self::Bell => "bell",
            Self::Bayes => "bayes",
            Self::Calibrate => "calibrate",
            Self::Loss => "loss",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hom" => Self::Hom,
            "stabilizers" | "stab" => Self::Stabilizers,
            "mermin" => Self::Mermin,
            "project" => Self::Project,
            "bell" => Self::Bell,
            "bayes" => Self::Bayes,
            "calibrate" | "cal" => Self::Calibrate,
            "loss" => Self::Loss,
            _ => return Err(Error::Config(format!("unknown experiment {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BayesOptions {
    pub model: ErrorModel,
    /// `[start, stop, step]`; the model's default grid when absent.
    pub grid: Option<[f64; 3]>,
    pub phase_samples: usize,
}

impl Default for BayesOptions {
    fn default() -> Self {
        Self { model: ErrorModel::Sigma, grid: None, phase_samples: 200 }
    }
}

impl BayesOptions {
    pub fn parameter_grid(&self) -> Result<ParameterGrid> {
        match self.grid {
            Some([a, b, step]) => ParameterGrid::uniform(self.model, a, b, step),
            None => Ok(ParameterGrid::default_for(self.model)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationOptions {
    /// Sweep of `voltage,current,transmission`; a synthetic heater is
    /// swept when absent.
    pub fringe_csv: Option<PathBuf>,
    /// `configuration_id,power_mW` rows.
    pub power_csv: Option<PathBuf>,
    /// Phases (rad) to dial in.
    pub targets: Vec<f64>,
    pub crosstalk_rad_per_mw: f64,
    pub v_max: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            fringe_csv: None,
            power_csv: None,
            targets: vec![FRAC_PI_2, PI, 1.5 * PI],
            crosstalk_rad_per_mw: 0.003,
            v_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossOptions {
    pub insertion_db: f64,
    pub source_length_cm: f64,
}

impl Default for LossOptions {
    fn default() -> Self {
        Self { insertion_db: 26.1, source_length_cm: 1.2 }
    }
}

/// One experiment on one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub device: DeviceConfig,
    /// Seconds per measurement setting (per sweep point for fringes).
    pub integration_time: f64,
    /// Hz per unit of unconditioned fourfold probability.
    pub rate_scale: f64,
    pub seed: u64,
    /// Infinite-count mode: conditioned probabilities replace sampled counts.
    pub exact: bool,
    pub hom_points: usize,
    /// 1-based qubit labels projected onto `|0>`.
    pub project: Vec<usize>,
    /// 1-based labels of the Bell pair.
    pub bell_qubits: [usize; 2],
    pub bayes: BayesOptions,
    pub calibration: CalibrationOptions,
    pub loss: LossOptions,
}

/// Unconditioned fourfold probability of the ideal star experiment at
/// first-order pair probability.
pub fn s4_fourfold_probability() -> Result<f64> {
    let cfg = DeviceConfig::ideal(RpegMode::Fusion, FIRST_ORDER_P)?;
    Ok(Device::new(&cfg)?.distribution(&cfg.setting())?.total())
}

/// Rate scale that puts the star state's fourfold rate at
/// [`S4_FOURFOLD_RATE_HZ`].
pub fn calibrated_rate_scale() -> Result<f64> {
    Ok(S4_FOURFOLD_RATE_HZ / s4_fourfold_probability()?)
}

/// Time needed to collect `counts` events at `rate_hz`.
pub fn integration_time_for(counts: f64, rate_hz: f64) -> Result<f64> {
    if !(counts >= 0.0) || !(rate_hz > 0.0) {
        return Err(Error::InvalidArgument("counts must be non-negative and rate positive".into()));
    }
    Ok(counts / rate_hz)
}

impl ExperimentSpec {
    /// Defaults: calibrated rate, [`DEFAULT_SETTING_TIME_S`], seed 0.
    pub fn new(kind: ExperimentKind, device: DeviceConfig) -> Result<Self> {
        Ok(Self {
            kind,
            device,
            integration_time: DEFAULT_SETTING_TIME_S,
            rate_scale: calibrated_rate_scale()?,
            seed: 0,
            exact: false,
            hom_points: 64,
            project: vec![3],
            bell_qubits: [1, 3],
            bayes: BayesOptions::default(),
            calibration: CalibrationOptions::default(),
            loss: LossOptions::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.device.validate()?;
        if !(self.integration_time > 0.0 && self.integration_time.is_finite()) {
            return bad(format!("integration_time {} must be positive", self.integration_time));
        }
        if !(self.rate_scale > 0.0 && self.rate_scale.is_finite()) {
            return bad(format!("rate_scale {} must be positive", self.rate_scale));
        }
        if self.hom_points < 8 {
            return bad("hom_points must be at least 8".into());
        }
        let mut p = self.project.clone();
        p.sort_unstable();
        p.dedup();
        if p.len() != self.project.len() || p.is_empty() || p.len() >= QUBITS || p.iter().any(|&l| l == 0 || l > QUBITS) {
            return bad(format!("project must list distinct labels from 1-4 and keep one qubit: {:?}", self.project));
        }
        if !matches!(self.bell_qubits, [1, 3] | [2, 4]) {
            return bad(format!("bell_qubits must be [1, 3] or [2, 4], got {:?}", self.bell_qubits));
        }
        if self.bayes.phase_samples == 0 {
            return bad("bayes.phase_samples must be positive".into());
        }
        if !(self.calibration.v_max > 0.0) || !(self.calibration.crosstalk_rad_per_mw >= 0.0) {
            return bad("calibration.v_max must be positive and the crosstalk coefficient non-negative".into());
        }
        Ok(())
    }

    /// Parses a run file. `kind` overrides `experiment.kind`.
    pub fn from_toml_str(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let file: RunFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let device = match (file.device, file.preset) {
            (Some(_), Some(_)) => return Err(Error::Config("give either [device] or [preset], not both".into())),
            (Some(d), None) => d,
            (None, preset) => preset.unwrap_or_default().build()?,
        };
        let e = file.experiment;
        let kind = kind.or(e.kind).ok_or_else(|| Error::Config("experiment.kind is missing".into()))?;
        let mut spec = Self::new(kind, device)?;
        if e.calibrate_rate == Some(true) && e.rate_scale.is_some() {
            return Err(Error::Config("rate_scale and calibrate_rate are exclusive".into()));
        }
        if let Some(x) = e.rate_scale {
            spec.rate_scale = x;
        }
        if let Some(x) = e.integration_time {
            spec.integration_time = x;
        }
        spec.seed = e.seed.unwrap_or(0);
        spec.exact = e.exact.unwrap_or(false);
        spec.hom_points = e.hom_points.unwrap_or(spec.hom_points);
        spec.project = e.project.unwrap_or(spec.project);
        spec.bell_qubits = e.bell_qubits.unwrap_or(spec.bell_qubits);
        spec.bayes = e.bayes;
        spec.calibration = e.calibration;
        spec.loss = e.loss;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path, kind: Option<ExperimentKind>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?, kind)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML form, as hex.
    pub fn config_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml_string()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    fn state_kind(&self) -> Result<StateKind> {
        match self.device.rpeg {
            RpegMode::Fusion => Ok(StateKind::S4),
            RpegMode::Cz => Ok(StateKind::L4),
            RpegMode::Passthrough => {
                Err(Error::Config(format!("{} needs the gate in fusion or cz mode", self.kind)))
            }
        }
    }
}

/// Device shorthand for run files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DevicePreset {
    pub rpeg: RpegMode,
    pub pair_probability: f64,
    pub sigma: f64,
    pub max_pairs: usize,
}

impl Default for DevicePreset {
    fn default() -> Self {
        Self { rpeg: RpegMode::Fusion, pair_probability: FIRST_ORDER_P, sigma: 1.0, max_pairs: 1 }
    }
}

impl DevicePreset {
    pub fn build(&self) -> Result<DeviceConfig> {
        let cfg = DeviceConfig::ideal(self.rpeg, FIRST_ORDER_P)?
            .with_pair_probability(self.pair_probability, self.max_pairs)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_sigma(self.sigma);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    device: Option<DeviceConfig>,
    preset: Option<DevicePreset>,
    #[serde(default)]
    experiment: ExperimentBlock,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentBlock {
    kind: Option<ExperimentKind>,
    integration_time: Option<f64>,
    rate_scale: Option<f64>,
    calibrate_rate: Option<bool>,
    seed: Option<u64>,
    exact: Option<bool>,
    hom_points: Option<usize>,
    project: Option<Vec<usize>>,
    bell_qubits: Option<[usize; 2]>,
    #[serde(default)]
    bayes: BayesOptions,
    #[serde(default)]
    calibration: CalibrationOptions,
    #[serde(default)]
    loss: LossOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub error: Option<f64>,
}

impl Quantity {
    fn new(name: impl Into<String>, value: f64, error: Option<f64>) -> Self {
        Self { name: name.into(), value, error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRow {
    pub label: String,
    pub operator: String,
    pub value: f64,
    pub error: f64,
}

/// Raw data of a run; everything in [`RunReport::quantities`] is derived
/// from this and the spec.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunData {
    pub counts: Option<CountsTable>,
    /// Conditioned probabilities in infinite-count mode.
    pub probabilities: Option<ProbabilityTable>,
    /// CHSH analyser settings (`ab`, `ab'`, `a'b`, `a'b'`) with their two-qubit
    /// outcome weights.
    pub chsh: Vec<(String, Vec<f64>)>,
    /// `(phase_rad, counts)`.
    pub fringe: Vec<(f64, f64)>,
    /// `(parameter, probability)`.
    pub posterior: Vec<(f64, f64)>,
    pub calibration_samples: Vec<FringeSample>,
    pub powers_mw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: ExperimentSpec,
    pub provenance: Provenance,
    pub expectations: Vec<ExpectationRow>,
    pub quantities: Vec<Quantity>,
    #[serde(skip)]
    pub data: RunData,
}

impl RunReport {
    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::OutOfRange(e.to_string()))?;
    Ok(d.sample(rng) as u64)
}

/// Poisson counts for each row of unconditioned probabilities; row `k`
/// (in table order) uses stream `first_stream + k`.
fn sample_rows(rows: &[Vec<f64>], scale: f64, seed: u64, first_stream: u64) -> Result<Vec<Vec<u64>>> {
    rows.par_iter()
        .enumerate()
        .map(|(k, row)| {
            let mut rng = stream_rng(seed, first_stream + k as u64);
            row.iter().map(|p| poisson(p * scale, &mut rng)).collect()
        })
        .collect()
}

fn conditioned(row: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = row.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok(row.iter().map(|p| p / total).collect())
}

/// Samples (or, in exact mode, conditions) a probability table into `data`.
fn fill_table(spec: &ExperimentSpec, raw: &ProbabilityTable, data: &mut RunData) -> Result<()> {
    let settings: Vec<String> = raw.settings().map(str::to_string).collect();
    let rows: Vec<Vec<f64>> = raw.iter().map(|(_, r)| r.to_vec()).collect();
    for r in &rows {
        conditioned(r)?;
    }
    if spec.exact {
        let mut t = ProbabilityTable::new(raw.qubits())?;
        for (s, r) in settings.iter().zip(&rows) {
            t.insert(s, conditioned(r)?)?;
        }
        data.probabilities = Some(t);
    } else {
        let counts = sample_rows(&rows, spec.rate_scale * spec.integration_time, spec.seed, 0)?;
        let mut t = CountsTable::new(raw.qubits())?;
        for (s, r) in settings.iter().zip(counts) {
            t.insert(s, r)?;
        }
        data.counts = Some(t);
    }
    Ok(())
}

/// Four-qubit setting with `Z` on the projected qubits.
fn projected_setting(reduced: &PauliString, keep: &[usize]) -> PauliString {
    let mut letters = vec![Pauli::Z; QUBITS];
    for (k, &q) in keep.iter().enumerate() {
        letters[q] = reduced.letters()[k];
    }
    PauliString::new(letters, false)
}

fn projection_parts(spec: &ExperimentSpec) -> Result<(Graph, Vec<usize>, Vec<usize>)> {
    let graph = spec.state_kind()?.graph();
    let reduced = graph.project_zero(&spec.project)?;
    let removed: Vec<usize> = spec.project.iter().map(|l| l - 1).collect();
    let keep: Vec<usize> = (0..QUBITS).filter(|q| !removed.contains(q)).collect();
    Ok((reduced, removed, keep))
}

fn bell_group() -> Result<StabilizerGroup> {
    StabilizerGroup::from_generators(vec!["XX".parse()?, "ZZ".parse()?])
}

/// Analyser angles in the X-Z plane for the CHSH settings.
pub const CHSH_ANGLES: [(&str, f64, f64); 4] = [
    ("ab", 0.0, FRAC_PI_4),
    ("ab'", 0.0, 7.0 * FRAC_PI_4),
    ("a'b", FRAC_PI_2, FRAC_PI_4),
    ("a'b'", FRAC_PI_2, 7.0 * FRAC_PI_4),
];

/// Runs the experiment described by `spec`.
pub fn run(spec: &ExperimentSpec) -> Result<RunReport> {
    spec.validate()?;
    let mut data = RunData::default();
    let cfg = &spec.device;
    match spec.kind {
        ExperimentKind::Stabilizers | ExperimentKind::Mermin | ExperimentKind::Bayes => {
            if spec.kind == ExperimentKind::Bayes && spec.exact {
                return Err(Error::Config("a posterior needs finite counts; drop exact mode".into()));
            }
            let kind = spec.state_kind()?;
            let raw = Device::new(cfg)?.probability_table(&measurement_settings(&kind.group()), &cfg.phase_offsets)?;
            fill_table(spec, &raw, &mut data)?;
            if spec.kind == ExperimentKind::Bayes {
                let grid = spec.bayes.parameter_grid()?;
                let options = ModelOptions { phase_samples: spec.bayes.phase_samples, seed: spec.seed };
                let model = model_tables(kind, &grid, options)?;
                let counts = data.counts.as_ref().expect("sampled counts");
                let ll = likelihood(&model, counts, LikelihoodMethod::Multinomial)?;
                let post = posterior(&grid, &ll.values)?;
                data.posterior = grid.values().iter().copied().zip(post.probabilities).collect();
            }
        }
        ExperimentKind::Project => {
            let (reduced, _, keep) = projection_parts(spec)?;
            let group = crate::stabilizer::generators_from_graph(&reduced)?;
            let settings: Vec<PauliString> =
                measurement_settings(&group).iter().map(|p| projected_setting(p, &keep)).collect();
            let raw = Device::new(cfg)?.probability_table(&settings, &cfg.phase_offsets)?;
            fill_table(spec, &raw, &mut data)?;
        }
        ExperimentKind::Bell => {
            let mut bell_cfg = cfg.clone();
            bell_cfg.rpeg = RpegMode::Passthrough;
            let qubits = [spec.bell_qubits[0] - 1, spec.bell_qubits[1] - 1];
            let device = Device::for_qubits(&bell_cfg, &qubits)?;
            let offsets = &bell_cfg.phase_offsets;
            let raw = device.probability_table(&measurement_settings(&bell_group()?), offsets)?;
            fill_table(spec, &raw, &mut data)?;
            let out = device.gate_output(offsets)?;
            let rows = CHSH_ANGLES
                .iter()
                .map(|&(_, a, b)| {
                    let mut setting: AnalysisSetting = [QubitAnalysis::for_pauli(Pauli::Z); QUBITS];
                    setting[qubits[0]] = QubitAnalysis::in_xz_plane(a);
                    setting[qubits[1]] = QubitAnalysis::in_xz_plane(b);
                    Ok(device.measure(&out, &setting, offsets)?.probabilities)
                })
                .collect::<Result<Vec<_>>>()?;
            let weights: Vec<Vec<f64>> = if spec.exact {
                rows.iter().map(|r| conditioned(r)).collect::<Result<_>>()?
            } else {
                let first = raw.len() as u64;
                sample_rows(&rows, spec.rate_scale * spec.integration_time, spec.seed, first)?
                    .into_iter()
                    .map(|r| r.into_iter().map(|c| c as f64).collect())
                    .collect()
            };
            data.chsh = CHSH_ANGLES.iter().map(|a| a.0.to_string()).zip(weights).collect();
        }
        ExperimentKind::Hom => {
            let phases = phase_sweep(spec.hom_points);
            let probs = hom_fringe(cfg, &phases)?;
            if probs.iter().all(|p| p.1 <= 0.0) {
                return Err(Error::ZeroProbability);
            }
            let scale = spec.rate_scale * spec.integration_time;
            data.fringe = if spec.exact {
                probs.iter().map(|&(x, p)| (x, p * scale)).collect()
            } else {
                let rows: Vec<Vec<f64>> = probs.iter().map(|p| vec![p.1]).collect();
                let counts = sample_rows(&rows, scale, spec.seed, 0)?;
                phases.iter().zip(counts).map(|(&x, c)| (x, c[0] as f64)).collect()
            };
        }
        ExperimentKind::Calibrate => {
            let c = &spec.calibration;
            data.calibration_samples = match &c.fringe_csv {
                Some(path) => calibration::read_fringe_csv(File::open(path)?)?,
                None => synthetic_heater_sweep(spec.seed, c.v_max)?,
            };
            if let Some(path) = &c.power_csv {
                data.powers_mw = calibration::read_power_csv(File::open(path)?)?;
            }
        }
        ExperimentKind::Loss => {}
    }
    let (expectations, quantities) = derive(spec, &data)?;
    Ok(RunReport {
        spec: spec.clone(),
        provenance: Provenance {
            seed: spec.seed,
            config_hash: spec.config_hash()?,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        expectations,
        quantities,
        data,
    })
}

/// Sweep of a made-up heater (about 500 Ω with mild nonlinearity, 2π per
/// 60 mW) with 0.5% transmission noise, for demonstration runs without
/// measured data.
pub fn synthetic_heater_sweep(seed: u64, v_max: f64) -> Result<Vec<FringeSample>> {
    let iv = calibration::IvFit { rho1: 2.0e-3, rho2: 2.0e-5, rho3: -4.0e-7 };
    let (f, phase0) = (std::f64::consts::TAU / 0.06, 0.7);
    let noise = Normal::new(0.0, 0.005).map_err(|e| Error::OutOfRange(e.to_string()))?;
    let mut rng = stream_rng(seed, 0);
    Ok((0..200)
        .map(|i| {
            let v = v_max * i as f64 / 199.0;
            let t = 0.5 + 0.45 * (f * iv.power(v) + phase0).sin() + noise.sample(&mut rng);
            FringeSample { voltage: v, current: iv.current(v), transmission: t }
        })
        .collect())
}

fn table_rows<T: OutcomeWeight>(
    group: &StabilizerGroup,
    table: &OutcomeTable<T>,
    exact: bool,
) -> Result<(Vec<ExpectationRow>, Vec<Estimate>)> {
    let mut estimates = estimates_from_table(group, table)?;
    if exact {
        for e in &mut estimates {
            e.error = 0.0;
        }
    }
    let rows = group
        .elements()
        .iter()
        .zip(&estimates)
        .map(|(e, est)| ExpectationRow { label: e.label(), operator: e.pauli.to_string(), value: est.value, error: est.error })
        .collect();
    Ok((rows, estimates))
}

fn fidelity_quantities(estimates: &[Estimate], out: &mut Vec<Quantity>) {
    let f = fidelity(estimates);
    out.push(Quantity::new("fidelity", f.value, Some(f.error)));
    out.push(Quantity::new("witness_margin", f.value - 0.5, Some(f.error)));
}

/// Reduces four-qubit rows to the kept qubits, keeping outcomes where every
/// projected qubit read `|0>`.
fn reduce_projected<T: OutcomeWeight>(
    table: &OutcomeTable<T>,
    removed: &[usize],
    keep: &[usize],
    settings: &[PauliString],
) -> Result<OutcomeTable<T>> {
    let mut out = OutcomeTable::new(keep.len())?;
    for s in settings {
        let full = projected_setting(s, keep).setting();
        let row = table
            .row(&full)
            .ok_or_else(|| Error::InvalidArgument(format!("no data for setting {full}")))?;
        let reduced = (0..1usize << keep.len())
            .map(|r| {
                let mut j = 0usize;
                for (k, &q) in keep.iter().enumerate() {
                    let b = (r >> (keep.len() - 1 - k)) & 1;
                    j |= b << (QUBITS - 1 - q);
                }
                debug_assert!(removed.iter().all(|&q| (j >> (QUBITS - 1 - q)) & 1 == 0));
                row[j]
            })
            .collect();
        out.insert(&s.setting(), reduced)?;
    }
    Ok(out)
}

/// Derives expectations and quantities from raw data. Deterministic, so
/// re-imported data reproduce a report exactly.
pub fn derive(spec: &ExperimentSpec, data: &RunData) -> Result<(Vec<ExpectationRow>, Vec<Quantity>)> {
    let mut q = Vec::new();
    let exact = spec.exact;
    // dispatch on whichever table the run produced
    macro_rules! with_table {
        (|$t:ident| $body:expr) => {
            match (&data.counts, &data.probabilities) {
                (Some($t), _) => $body,
                (None, Some($t)) => $body,
                (None, None) => return Err(Error::InvalidArgument("run has no outcome table".into())),
            }
        };
    }
    let rows = match spec.kind {
        ExperimentKind::Stabilizers | ExperimentKind::Mermin | ExperimentKind::Bayes => {
            let kind = spec.state_kind()?;
            let group = kind.group();
            let (rows, est) = with_table!(|t| table_rows(&group, t, exact)?);
            fidelity_quantities(&est, &mut q);
            if spec.kind == ExperimentKind::Mermin {
                let m3 = mermin_three_setting(&group, &est)?;
                q.push(Quantity::new("MIII", m3.value, Some(m3.error)));
                q.push(Quantity::new("MIII_classical_bound", m3.classical_bound, None));
                let summary = mermin_two_setting_all(&kind.graph(), &group, &est)?;
                for r in &summary.variants {
                    q.push(Quantity::new(r.name.clone(), r.value, Some(r.error)));
                }
                if let Some(best) = summary.best() {
                    q.push(Quantity::new("MII_best", best.value, Some(best.error)));
                }
            }
            if spec.kind == ExperimentKind::Bayes {
                let (values, probs): (Vec<f64>, Vec<f64>) = data.posterior.iter().copied().unzip();
                if values.is_empty() {
                    return Err(Error::InvalidArgument("bayes run has no posterior".into()));
                }
                let s = gaussian_summary(&values, &probs);
                q.push(Quantity::new("posterior_mean", s.mean, Some(s.std)));
                q.push(Quantity::new("posterior_raw_mean", s.raw_mean, Some(s.raw_std)));
                q.push(Quantity::new("posterior_map", s.map_estimate, None));
                q.push(Quantity::new("posterior_degenerate", f64::from(u8::from(s.degenerate)), None));
            }
            rows
        }
        ExperimentKind::Project => {
            let (reduced, removed, keep) = projection_parts(spec)?;
            let group = crate::stabilizer::generators_from_graph(&reduced)?;
            let settings = measurement_settings(&group);
            let (rows, est) = with_table!(|t| {
                let small = reduce_projected(t, &removed, &keep, &settings)?;
                table_rows(&group, &small, exact)?
            });
            fidelity_quantities(&est, &mut q);
            // exact check of the deletion rule on ideal state vectors
            let full = spec.state_kind()?.graph();
            let projected = project_qubits_zero(&ideal_state_vector(&full)?, QUBITS, &removed);
            let f = pure_fidelity(&projected, &ideal_state_vector(&reduced)?);
            q.push(Quantity::new("graph_rule_fidelity", f, None));
            rows
        }
        ExperimentKind::Bell => {
            let group = bell_group()?;
            let (rows, est) = with_table!(|t| table_rows(&group, t, exact)?);
            fidelity_quantities(&est, &mut q);
            if data.chsh.len() != 4 {
                return Err(Error::InvalidArgument("bell run needs four CHSH rows".into()));
            }
            let corr: Vec<Estimate> = data
                .chsh
                .iter()
                .map(|(name, w)| parity_estimate(name, w, exact))
                .collect::<Result<_>>()?;
            for ((name, _), e) in data.chsh.iter().zip(&corr) {
                q.push(Quantity::new(format!("E({name})"), e.value, Some(e.error)));
            }
            let s = chsh(corr[0], corr[1], corr[2], corr[3]);
            q.push(Quantity::new("CHSH", s.value, Some(s.error)));
            rows
        }
        ExperimentKind::Hom => {
            let fit = fit_fringe_visibility(&data.fringe)?;
            let (v, v_hom) = visibility_conversion(fit.max(), fit.min())?;
            q.push(Quantity::new("visibility", v, None));
            q.push(Quantity::new("hom_visibility", v_hom, None));
            q.push(Quantity::new("fit_rms", fit.rms, None));
            Vec::new()
        }
        ExperimentKind::Calibrate => {
            let c = &spec.calibration;
            let (iv, fringe) = calibrate(&data.calibration_samples)?;
            for (name, value) in [
                ("rho1", iv.rho1),
                ("rho2", iv.rho2),
                ("rho3", iv.rho3),
                ("fringe_amplitude", fringe.amplitude),
                ("fringe_frequency", fringe.frequency),
                ("fringe_phase", fringe.phase0),
                ("fringe_offset", fringe.offset),
                ("fringe_rms", fringe.rms),
            ] {
                q.push(Quantity::new(name, value, None));
            }
            for &target in &c.targets {
                let v = calibration::dial_phase(target, &fringe, &iv, (0.0, c.v_max))?;
                q.push(Quantity::new(format!("voltage_for_{target:.4}_rad"), v, None));
            }
            if !data.powers_mw.is_empty() {
                let s = calibration::power_stats(&data.powers_mw)?;
                q.push(Quantity::new("power_mean_mw", s.mean_mw, None));
                q.push(Quantity::new("power_mad_mw", s.mad_mw, None));
                q.push(Quantity::new("power_std_mw", s.std_mw, None));
                let k = c.crosstalk_rad_per_mw;
                q.push(Quantity::new("phase_error_from_mad", calibration::crosstalk_phase_error(s.mad_mw, k)?, None));
                q.push(Quantity::new("phase_error_from_std", calibration::crosstalk_phase_error(s.std_mw, k)?, None));
            }
            Vec::new()
        }
        ExperimentKind::Loss => {
            let budget = calibration::signal_photon_loss(spec.loss.insertion_db, spec.loss.source_length_cm);
            for (i, (name, db)) in budget.entries.iter().enumerate() {
                q.push(Quantity::new(format!("{i}:{name}"), *db, None));
            }
            q.push(Quantity::new("signal_loss_db", budget.total_db, None));
            Vec::new()
        }
    };
    Ok((rows, q))
}

fn parity_estimate(name: &str, weights: &[f64], exact: bool) -> Result<Estimate> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroCounts(name.to_string()));
    }
    let value = weights
        .iter()
        .enumerate()
        .map(|(j, w)| if j.count_ones() % 2 == 0 { *w } else { -*w })
        .sum::<f64>()
        / total;
    let error = if exact { 0.0 } else { ((1.0 - value * value).max(0.0) / total).sqrt() };
    Ok(Estimate { value, error })
}

/// Default output directory: `$GRAPHCHIP_OUT_DIR`, else `graphchip-out`.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("graphchip-out"))
}

fn csv_writer(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<csv::Writer<BufWriter<File>>> {
    let path = dir.join(name);
    let w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    written.push(path);
    Ok(w)
}

/// Writes a run as CSV data files plus `summary.json`. Files:
///
/// - `counts.csv`: `setting_string,outcome_bits,counts` (conditioned
///   probabilities in exact mode)
/// - `expectations.csv`: `label,operator,value,error`
/// - `chsh_counts.csv`: `setting,outcome_bits,counts`
/// - `fringe.csv`: `phase_rad,counts`
/// - `posterior.csv`: `parameter,probability`
/// - `calibration_samples.csv`: `voltage,current,transmission`
/// - `powers.csv`: `configuration_id,power_mW`
///
/// Only files with data are written. Returns the written paths.
pub fn export(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let d = &report.data;
    if let Some(t) = &d.counts {
        let path = dir.join("counts.csv");
        t.write_csv(BufWriter::new(File::create(&path)?))?;
        written.push(path);
    }
    if let Some(t) = &d.probabilities {
        let path = dir.join("counts.csv");
        t.write_csv(BufWriter::new(File::create(&path)?))?;
        written.push(path);
    }
    if !report.expectations.is_empty() {
        let mut w = csv_writer(dir, "expectations.csv", &mut written)?;
        for row in &report.expectations {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    if !d.chsh.is_empty() {
        let mut w = csv_writer(dir, "chsh_counts.csv", &mut written)?;
        w.write_record(["setting", "outcome_bits", "counts"])?;
        for (name, row) in &d.chsh {
            for (j, c) in row.iter().enumerate() {
                w.serialize((name, format_bits(j, 2), c))?;
            }
        }
        w.flush()?;
    }
    if !d.fringe.is_empty() {
        let mut w = csv_writer(dir, "fringe.csv", &mut written)?;
        w.write_record(["phase_rad", "counts"])?;
        for p in &d.fringe {
            w.serialize(p)?;
        }
        w.flush()?;
    }
    if !d.posterior.is_empty() {
        let mut w = csv_writer(dir, "posterior.csv", &mut written)?;
        w.write_record(["parameter", "probability"])?;
        for p in &d.posterior {
            w.serialize(p)?;
        }
        w.flush()?;
    }
    if !d.calibration_samples.is_empty() {
        let mut w = csv_writer(dir, "calibration_samples.csv", &mut written)?;
        for s in &d.calibration_samples {
            w.serialize(s)?;
        }
        w.flush()?;
    }
    if !d.powers_mw.is_empty() {
        let mut w = csv_writer(dir, "powers.csv", &mut written)?;
        w.write_record(["configuration_id", "power_mW"])?;
        for (i, p) in d.powers_mw.iter().enumerate() {
            w.serialize((i, p))?;
        }
        w.flush()?;
    }
    let path = dir.join("summary.json");
    let mut f = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut f, report)?;
    f.write_all(b"\n")?;
    f.flush()?;
    written.push(path);
    Ok(written)
}

fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(File::open(path)?);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Reads a run written by [`export`] and re-derives its quantities from the
/// stored data.
pub fn import(dir: &Path) -> Result<RunReport> {
    let stored: RunReport = serde_json::from_reader(File::open(dir.join("summary.json"))?)?;
    let spec = stored.spec;
    let mut data = RunData::default();
    let counts = dir.join("counts.csv");
    if counts.exists() {
        if spec.exact {
            data.probabilities = Some(ProbabilityTable::read_csv(File::open(&counts)?)?);
        } else {
            data.counts = Some(CountsTable::read_csv(File::open(&counts)?)?);
        }
    }
    let chsh = dir.join("chsh_counts.csv");
    if chsh.exists() {
        let mut r = csv::Reader::from_reader(File::open(&chsh)?);
        let mut rows: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for rec in r.deserialize() {
            let (name, bits, c): (String, String, f64) = rec?;
            let j = usize::from_str_radix(&bits, 2).map_err(|_| Error::InvalidArgument(format!("bad bits {bits:?}")))?;
            let row = rows.entry(name).or_insert_with(|| vec![0.0; 4]);
            *row.get_mut(j).ok_or_else(|| Error::InvalidArgument(format!("bad bits {bits:?}")))? = c;
        }
        // keep the analyser order used when running
        data.chsh = CHSH_ANGLES
            .iter()
            .filter_map(|a| rows.remove(a.0).map(|r| (a.0.to_string(), r)))
            .collect();
    }
    for (name, slot) in [("fringe.csv", &mut data.fringe), ("posterior.csv", &mut data.posterior)] {
        let path = dir.join(name);
        if path.exists() {
            *slot = read_pairs(&path)?;
        }
    }
    let samples = dir.join("calibration_samples.csv");
    if samples.exists() {
        data.calibration_samples = calibration::read_fringe_csv(File::open(&samples)?)?;
    }
    let powers = dir.join("powers.csv");
    if powers.exists() {
        data.powers_mw = calibration::read_power_csv(File::open(&powers)?)?;
    }
    let (expectations, quantities) = derive(&spec, &data)?;
    Ok(RunReport { spec, provenance: stored.provenance, expectations, quantities, data })
}

/// Writes `outcome_bits,probability,conditioned` for one distribution.
pub fn write_distribution_csv<W: Write>(writer: W, dist: &OutcomeDistribution) -> Result<()> {
    let cond = if dist.total() > 0.0 { dist.conditioned() } else { vec![0.0; dist.probabilities.len()] };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["outcome_bits", "probability", "conditioned"])?;
    for (j, (p, c)) in dist.probabilities.iter().zip(cond).enumerate() {
        w.serialize((format_bits(j, dist.qubits.len()), p, c))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec::new(kind, DeviceConfig::ideal(RpegMode::Fusion, FIRST_ORDER_P).unwrap()).unwrap()
    }

    #[test]
    fn exact_star_fidelity_is_one() {
        let mut s = spec(ExperimentKind::Stabilizers);
        s.exact = true;
        let r = run(&s).unwrap();
        let f = r.quantity("fidelity").unwrap();
        assert!((f.value - 1.0).abs() < 1e-9 && f.error == Some(0.0));
    }

    #[test]
    fn calibrated_rate_matches_target() {
        let s = spec(ExperimentKind::Stabilizers);
        let rate = s.rate_scale * s4_fourfold_probability().unwrap();
        assert!((rate - S4_FOURFOLD_RATE_HZ).abs() < 1e-15);
        let t = integration_time_for(2640.0, S4_FOURFOLD_RATE_HZ).unwrap();
        assert!((t - 4.63e5).abs() < 1e3);
    }

    #[test]
    fn toml_run_file() {
        let text = "[preset]\nrpeg = \"cz\"\nsigma = 0.9\n[experiment]\nkind = \"mermin\"\nseed = 4\nexact = true\n";
        let s = ExperimentSpec::from_toml_str(text, None).unwrap();
        assert_eq!(s.kind, ExperimentKind::Mermin);
        assert_eq!(s.device.rpeg, RpegMode::Cz);
        assert_eq!(s.seed, 4);
        let over = ExperimentSpec::from_toml_str(text, Some(ExperimentKind::Loss)).unwrap();
        assert_eq!(over.kind, ExperimentKind::Loss);
        assert!(ExperimentSpec::from_toml_str("[experiment]\nkind = \"nope\"", None).is_err());
        assert!(ExperimentSpec::from_toml_str("[experiment]\nkind = \"hom\"\nintegration_time = -1.0", None).is_err());
        assert!(ExperimentSpec::from_toml_str("[experiment]\nkind = \"hom\"\ncolour = 1", None).is_err());
        assert!(ExperimentSpec::from_toml_str("", None).is_err());
    }

    #[test]
    fn spec_hash_tracks_changes() {
        let a = spec(ExperimentKind::Hom);
        let mut b = a.clone();
        assert_eq!(a.config_hash().unwrap(), b.config_hash().unwrap());
        b.seed = 1;
        assert_ne!(a.config_hash().unwrap(), b.config_hash().unwrap());
        assert_eq!(a.config_hash().unwrap().len(), 64);
    }

    #[test]
    fn passthrough_rejected_for_stabilizers() {
        let mut s = spec(ExperimentKind::Stabilizers);
        s.device.rpeg = RpegMode::Passthrough;
        assert!(matches!(run(&s), Err(Error::Config(_))));
    }

    #[test]
    fn exact_bell_and_projection() {
        let mut s = spec(ExperimentKind::Bell);
        s.exact = true;
        let r = run(&s).unwrap();
        assert!((r.quantity("fidelity").unwrap().value - 1.0).abs() < 1e-9);
        assert!((r.quantity("CHSH").unwrap().value - 2.0 * 2f64.sqrt()).abs() < 1e-9);

        let mut s = spec(ExperimentKind::Project);
        s.exact = true;
        for labels in [vec![3], vec![2, 3], vec![1, 2]] {
            s.project = labels;
            let r = run(&s).unwrap();
            assert!((r.quantity("fidelity").unwrap().value - 1.0).abs() < 1e-9);
            assert!((r.quantity("graph_rule_fidelity").unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_and_exact_hom() {
        let r = run(&spec(ExperimentKind::Loss)).unwrap();
        assert!((r.quantity("signal_loss_db").unwrap().value - 19.3).abs() < 1e-9);
        let mut s = spec(ExperimentKind::Hom);
        s.exact = true;
        let r = run(&s).unwrap();
        assert!((r.quantity("visibility").unwrap().value - 1.0).abs() < 1e-6);
    }
}
