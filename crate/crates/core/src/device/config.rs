use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::source::xi_for_pair_probability;
use crate::error::{Error, Result};
use crate::stabilizer::{Pauli, PauliString};

/// Number of photonic qubits on the device.
pub const QUBITS: usize = 4;
/// Physical waveguide modes: two rails per qubit plus two gate loss ports.
pub const MODES: usize = 2 * QUBITS + 2;
/// Thermo-optic phase sites that receive random offsets.
pub const PHASE_SITES: usize = 18;

/// Index of the pump phase of source `i`.
pub const fn pump_site(source: usize) -> usize {
    source
}

/// Index of the internal (`external == false`) or input phase of gate
/// interferometer `k` (0 = central, 1 and 2 = attenuators).
pub const fn gate_site(mzi: usize, external: bool) -> usize {
    4 + 2 * mzi + external as usize
}

/// Index of the Z-rotation (`false`) or Y-rotation (`true`) phase of qubit `q`.
pub const fn analysis_site(qubit: usize, rotation: bool) -> usize {
    10 + 2 * qubit + rotation as usize
}

/// Physical mode of rail `rail` of qubit `q` (both 0-based).
pub const fn rail_mode(qubit: usize, rail: usize) -> usize {
    2 * qubit + rail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub xi_re: f64,
    pub xi_im: f64,
    pub signal: usize,
    pub idler: usize,
}

impl SourceSpec {
    pub fn xi(&self) -> Complex64 {
        Complex64::new(self.xi_re, self.xi_im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RpegMode {
    Fusion,
    Cz,
    /// All gate interferometers in the bar state; used for Bell-pair checks.
    Passthrough,
}

impl std::str::FromStr for RpegMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fusion" => Ok(Self::Fusion),
            "cz" => Ok(Self::Cz),
            "passthrough" => Ok(Self::Passthrough),
            other => Err(Error::Config(format!("unknown gate mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitAnalysis {
    pub phi_z: f64,
    pub theta_y: f64,
    /// Rail watched by the detector in single-pattern use.
    #[serde(default)]
    pub monitor: u8,
}

impl QubitAnalysis {
    /// Angles are wrapped into `[0, 2π)`.
    pub fn new(phi_z: f64, theta_y: f64, monitor: u8) -> Self {
        Self { phi_z: phi_z.rem_euclid(TAU), theta_y: theta_y.rem_euclid(TAU), monitor }
    }

    /// Setting that measures a Pauli letter; identity is read out in Z.
    pub fn for_pauli(p: Pauli) -> Self {
        match p {
            Pauli::X => Self::new(0.0, FRAC_PI_2, 0),
            Pauli::Y => Self::new(FRAC_PI_2, FRAC_PI_2, 0),
            Pauli::Z | Pauli::I => Self::new(0.0, 0.0, 0),
        }
    }

    /// Observable `cos θ Z + sin θ X` (with `φ = 0`).
    pub fn in_xz_plane(theta: f64) -> Self {
        Self::new(0.0, theta, 0)
    }
}

pub type AnalysisSetting = [QubitAnalysis; QUBITS];

pub fn setting_for_pauli(pauli: &PauliString) -> Result<AnalysisSetting> {
    if pauli.len() != QUBITS {
        return Err(Error::InvalidArgument(format!("{pauli} is not a {QUBITS}-qubit setting")));
    }
    let mut s = [QubitAnalysis::for_pauli(Pauli::Z); QUBITS];
    for (q, &p) in pauli.letters().iter().enumerate() {
        s[q] = QubitAnalysis::for_pauli(p);
    }
    Ok(s)
}

fn default_sigma() -> f64 {
    1.0
}

fn default_max_pairs() -> usize {
    1
}

/// Complete parametric description of the chip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub sources: Vec<SourceSpec>,
    pub rpeg: RpegMode,
    pub analysis: Vec<QubitAnalysis>,
    /// Offsets (radians) added to each phase site; empty means all zero.
    #[serde(default)]
    pub phase_offsets: Vec<f64>,
    /// Heralded HOM fringe visibility between photons of different sources.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Pairs kept per source. `1` keeps only the lowest contributing photon
    /// sector; larger values keep every sector up to the cutoff.
    #[serde(default = "default_max_pairs")]
    pub max_pairs: usize,
    /// Total photon cutoff; defaults to 4 for first-order sources and 6
    /// otherwise.
    #[serde(default)]
    pub cutoff: Option<usize>,
}

impl DeviceConfig {
    /// Ideal device at pair probability `p` with first-order sources.
    pub fn ideal(rpeg: RpegMode, p: f64) -> Result<Self> {
        let xi = xi_for_pair_probability(p, 1)?;
        // signals on rails of qubits 1 and 2, idlers on the matching rails
        // of qubits 3 and 4
        let routes = [(0, 4), (1, 5), (3, 7), (2, 6)];
        Ok(Self {
            sources: routes
                .iter()
                .map(|&(signal, idler)| SourceSpec { xi_re: xi, xi_im: 0.0, signal, idler })
                .collect(),
            rpeg,
            analysis: vec![QubitAnalysis::for_pauli(Pauli::Z); QUBITS],
            phase_offsets: Vec::new(),
            sigma: 1.0,
            max_pairs: 1,
            cutoff: None,
        })
    }

    pub fn with_pair_probability(mut self, p: f64, max_pairs: usize) -> Result<Self> {
        let xi = xi_for_pair_probability(p, max_pairs)?;
        for s in &mut self.sources {
            let phase = s.xi().arg();
            let z = Complex64::from_polar(xi, phase);
            s.xi_re = z.re;
            s.xi_im = z.im;
        }
        self.max_pairs = max_pairs;
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_setting(mut self, setting: &AnalysisSetting) -> Self {
        self.analysis = setting.to_vec();
        self
    }

    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Self {
        self.phase_offsets = offsets;
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff.unwrap_or(if self.max_pairs == 1 { 4 } else { 6 })
    }

    pub fn offset(&self, site: usize) -> f64 {
        self.phase_offsets.get(site).copied().unwrap_or(0.0)
    }

    pub fn setting(&self) -> AnalysisSetting {
        let mut s = [QubitAnalysis::for_pauli(Pauli::Z); QUBITS];
        s.copy_from_slice(&self.analysis);
        s
    }

    /// Outcome pattern formed by the per-qubit monitored rails (qubit 1 is
    /// the most significant bit).
    pub fn monitored_pattern(&self) -> usize {
        self.analysis.iter().fold(0, |acc, a| (acc << 1) | (a.monitor & 1) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.sources.len() != 4 {
            return bad(format!("expected 4 sources, found {}", self.sources.len()));
        }
        if self.analysis.len() != QUBITS {
            return bad(format!("expected {QUBITS} analysis stages, found {}", self.analysis.len()));
        }
        let mut used = vec![false; 2 * QUBITS];
        for (i, s) in self.sources.iter().enumerate() {
            if s.xi().norm() >= 1.0 || !s.xi().norm().is_finite() {
                return bad(format!("source {i}: |xi| must be below 1"));
            }
            for m in [s.signal, s.idler] {
                if m >= 2 * QUBITS || used[m] {
                    return bad(format!("source {i}: mode {m} is out of range or reused"));
                }
                used[m] = true;
            }
            if s.signal >= 4 || s.idler < 4 {
                return bad(format!("source {i}: signals must use qubits 1-2 and idlers qubits 3-4"));
            }
        }
        for (q, a) in self.analysis.iter().enumerate() {
            let ok = |x: f64| (0.0..TAU).contains(&x);
            if !ok(a.phi_z) || !ok(a.theta_y) || a.monitor > 1 {
                return bad(format!("analysis stage {q}: phases must lie in [0, 2π) and monitor in {{0,1}}"));
            }
        }
        if !self.phase_offsets.is_empty() && self.phase_offsets.len() != PHASE_SITES {
            return bad(format!("phase_offsets needs {PHASE_SITES} entries or none"));
        }
        if self.phase_offsets.iter().any(|x| !x.is_finite()) {
            return bad("phase offsets must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return bad(format!("sigma {} outside [0, 1]", self.sigma));
        }
        if self.max_pairs == 0 {
            return bad("max_pairs must be at least 1".into());
        }
        if self.cutoff() < 4 {
            return bad("cutoff must allow four photons".into());
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut cfg = DeviceConfig::ideal(RpegMode::Cz, 0.03).unwrap().with_sigma(0.9);
        cfg.analysis[2] = QubitAnalysis::new(0.4, 1.1, 1);
        cfg.phase_offsets = (0..PHASE_SITES).map(|i| i as f64 * 0.01).collect();
        let text = cfg.to_toml_string().unwrap();
        assert!(text.contains("rpeg = \"cz\""));
        assert_eq!(DeviceConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = DeviceConfig::ideal(RpegMode::Fusion, 0.03).unwrap();
        cfg.sources[0].idler = 5;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = DeviceConfig::ideal(RpegMode::Fusion, 0.03).unwrap();
        cfg.phase_offsets = vec![0.0; 3];
        assert!(cfg.validate().is_err());
        assert!(DeviceConfig::from_toml_str("rpeg = \"swap\"").is_err());
    }

    #[test]
    fn monitored_pattern_bits() {
        let mut cfg = DeviceConfig::ideal(RpegMode::Fusion, 0.03).unwrap();
        cfg.analysis[0].monitor = 1;
        cfg.analysis[3].monitor = 1;
        assert_eq!(cfg.monitored_pattern(), 0b1001);
    }
}
