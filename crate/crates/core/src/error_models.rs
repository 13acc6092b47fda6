//! Single-parameter error models: partial distinguishability, multiphoton
//! emission and random thermo-optic phase offsets. Each holds the other two
//! parameters at their ideal values.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{Device, DeviceConfig, RpegMode, PHASE_SITES};
use crate::error::{Error, Result};
use crate::stabilizer::{fidelity, generators_from_graph, Estimate, Graph, PauliString, ProbabilityTable, StabilizerGroup};

/// Default pair probability used when the source order is first.
pub const FIRST_ORDER_P: f64 = 0.03;
/// Pairs per source and photon cutoff of the multiphoton model.
pub const MULTIPHOTON_PAIRS: usize = 3;
pub const MULTIPHOTON_CUTOFF: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    S4,
    L4,
}

impl StateKind {
    pub fn graph(self) -> Graph {
        match self {
            StateKind::S4 => Graph::star4(),
            StateKind::L4 => Graph::line4(),
        }
    }

    pub fn rpeg(self) -> RpegMode {
        match self {
            StateKind::S4 => RpegMode::Fusion,
            StateKind::L4 => RpegMode::Cz,
        }
    }

    pub fn group(self) -> StabilizerGroup {
        generators_from_graph(&self.graph()).expect("four-vertex graph")
    }
}

impl std::str::FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s4" | "star" => Ok(Self::S4),
            "l4" | "line" => Ok(Self::L4),
            _ => Err(Error::Config(format!("unknown state {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorParams {
    pub sigma: f64,
    pub p: f64,
    pub delta: f64,
}

impl Default for ErrorParams {
    fn default() -> Self {
        Self { sigma: 1.0, p: FIRST_ORDER_P, delta: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorModel {
    Sigma,
    P,
    Delta,
}

impl std::str::FromStr for ErrorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(Self::Sigma),
            "p" => Ok(Self::P),
            "delta" => Ok(Self::Delta),
            _ => Err(Error::Config(format!("unknown error model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelPrediction {
    pub kind: StateKind,
    pub parameter: f64,
    /// Element labels (`I`, `g1`, `g12`, ...) in group order.
    pub labels: Vec<String>,
    pub expectations: Vec<f64>,
    pub fidelity: f64,
    /// Monte Carlo standard error of the fidelity (zero for exact models).
    pub fidelity_error: f64,
    /// Conditioned outcome probabilities per non-identity setting.
    pub probabilities: ProbabilityTable,
}

/// Non-identity stabilizer elements, one measurement setting each.
pub fn measurement_settings(group: &StabilizerGroup) -> Vec<PauliString> {
    group.elements()[1..].iter().map(|e| e.pauli.clone()).collect()
}

fn conditioned_table(raw: &ProbabilityTable) -> Result<ProbabilityTable> {
    let mut out = ProbabilityTable::new(raw.qubits())?;
    for (setting, row) in raw.iter() {
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        out.insert(setting, row.iter().map(|p| p / total).collect())?;
    }
    Ok(out)
}

fn assemble(kind: StateKind, parameter: f64, table: ProbabilityTable, fidelity_error: f64) -> Result<ModelPrediction> {
    let group = kind.group();
    let estimates = group
        .elements()
        .iter()
        .map(|e| table.expectation(&e.pauli).map(|x| x.value))
        .collect::<Result<Vec<f64>>>()?;
    let f = fidelity(&estimates.iter().map(|&v| Estimate::exact(v)).collect::<Vec<_>>()).value;
    Ok(ModelPrediction {
        kind,
        parameter,
        labels: group.elements().iter().map(|e| e.label()).collect(),
        expectations: estimates,
        fidelity: f,
        fidelity_error,
        probabilities: table,
    })
}

/// Exact prediction for an arbitrary device configuration.
pub fn predict_config(kind: StateKind, config: &DeviceConfig, parameter: f64) -> Result<ModelPrediction> {
    let device = Device::new(config)?;
    let raw = device.probability_table(&measurement_settings(&kind.group()), &config.phase_offsets)?;
    assemble(kind, parameter, conditioned_table(&raw)?, 0.0)
}

/// Distinguishable photons with first-order sources and no phase error.
pub fn predict_distinguishability(kind: StateKind, sigma: f64) -> Result<ModelPrediction> {
    let cfg = DeviceConfig::ideal(kind.rpeg(), FIRST_ORDER_P)?.with_sigma(sigma);
    predict_config(kind, &cfg, sigma)
}

/// Multiphoton emission at pair probability `p` with identical photons.
pub fn predict_multiphoton(kind: StateKind, p: f64) -> Result<ModelPrediction> {
    predict_multiphoton_with(kind, p, MULTIPHOTON_PAIRS, MULTIPHOTON_CUTOFF)
}

pub fn predict_multiphoton_with(kind: StateKind, p: f64, max_pairs: usize, cutoff: usize) -> Result<ModelPrediction> {
    if cutoff < 6 || max_pairs < 2 {
        return Err(Error::CutoffViolation { needed: 6, cutoff: cutoff.min(2 * max_pairs) });
    }
    if !(p > 0.0) {
        return Err(Error::OutOfRange(format!("pair probability {p} must be positive")));
    }
    let mut cfg = DeviceConfig::ideal(kind.rpeg(), FIRST_ORDER_P)?.with_pair_probability(p, max_pairs)?;
    cfg.cutoff = Some(cutoff);
    predict_config(kind, &cfg, p)
}

/// Monte Carlo over normal phase offsets of standard deviation `delta` on
/// every phase site. Each setting draws its own `n_samples` offset vectors
/// from stream `k` of a ChaCha8 generator seeded with `seed`, `k` being the
/// setting's position; outcome probabilities are averaged over samples
/// before conditioning.
pub fn predict_phase_error(kind: StateKind, delta: f64, n_samples: usize, seed: u64) -> Result<ModelPrediction> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::OutOfRange(format!("delta {delta} must be non-negative")));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let cfg = DeviceConfig::ideal(kind.rpeg(), FIRST_ORDER_P)?;
    let device = Device::new(&cfg)?;
    let settings = measurement_settings(&kind.group());
    let normal = Normal::new(0.0, delta).map_err(|e| Error::OutOfRange(e.to_string()))?;

    let rows = settings
        .par_iter()
        .enumerate()
        .map(|(k, setting)| -> Result<(Vec<f64>, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let analysis = device.full_setting(setting)?;
            let mut sum = vec![0.0; 16];
            let (mut m1, mut m2) = (0.0, 0.0);
            for _ in 0..n_samples {
                let offsets: Vec<f64> = (0..PHASE_SITES).map(|_| normal.sample(&mut rng)).collect();
                let out = device.gate_output(&offsets)?;
                let dist = device.measure(&out, &analysis, &offsets)?;
                let total = dist.total();
                let mut e = 0.0;
                for (j, p) in dist.probabilities.iter().enumerate() {
                    sum[j] += p;
                    e += setting.eigenvalue(j as u32) * p;
                }
                if total > 0.0 {
                    e /= total;
                }
                m1 += e;
                m2 += e * e;
            }
            let n = n_samples as f64;
            let var = (m2 / n - (m1 / n).powi(2)).max(0.0);
            Ok((sum.iter().map(|s| s / n).collect(), var / n))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut raw = ProbabilityTable::new(4)?;
    let mut var_sum = 0.0;
    for (setting, (row, var)) in settings.iter().zip(rows) {
        raw.insert(&setting.setting(), row)?;
        var_sum += var;
    }
    assemble(kind, delta, conditioned_table(&raw)?, var_sum.sqrt() / 16.0)
}

/// Heralded purity implied by the unheralded second-order correlation,
/// `purity = g2(0) - 1`.
pub fn purity_from_g2(g2_zero: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&g2_zero) {
        return Err(Error::OutOfRange(format!("g2(0) = {g2_zero} outside [1, 2]")));
    }
    Ok(g2_zero - 1.0)
}

/// Writes `parameter,stabilizer_label,expectation` rows.
pub fn write_expectation_grid<W: Write>(writer: W, predictions: &[ModelPrediction]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["parameter", "stabilizer_label", "expectation"])?;
    for p in predictions {
        for (label, e) in p.labels.iter().zip(&p.expectations) {
            w.serialize((p.parameter, label, e))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `parameter,fidelity` rows.
pub fn write_fidelity_grid<W: Write>(writer: W, predictions: &[ModelPrediction]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["parameter", "fidelity"])?;
    for p in predictions {
        w.serialize((p.parameter, p.fidelity))?;
    }
    w.flush()?;
    Ok(())
}
