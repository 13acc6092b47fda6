use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pure state of a photon's internal (spectral) degree of freedom, expanded
/// over a small basis of labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalState {
    amplitudes: Vec<Complex64>,
}

impl InternalState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "internal state must have unit norm, got {norm}"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, label: usize) -> Self {
        assert!(label < dim, "label {label} out of range for dimension {dim}");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[label] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &InternalState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Same state embedded in a larger label basis.
    pub fn padded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim());
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(dim, Complex64::new(0.0, 0.0));
        Self { amplitudes }
    }
}

/// Probability-level overlap `|<ψ_i|ψ_j>|²` that makes a heralded two-photon
/// fringe on a tunable MZI reach visibility `v`.
///
/// Sweeping the MZI phase gives coincidences `∝ s cos²θ + (1 - s)(1 - sin²θ / 2)`,
/// a sinusoid in `2θ` with visibility `(1 + s) / (3 - s)`. Fully distinguishable photons
/// still produce `v = 1/3`, so targets below that clamp to `s = 0`.
pub fn hom_overlap_for_visibility(v: f64) -> f64 {
    ((3.0 * v - 1.0) / (1.0 + v)).clamp(0.0, 1.0)
}

/// Fringe visibility produced by two heralded photons with probability-level
/// overlap `s`.
pub fn fringe_visibility_for_overlap(s: f64) -> f64 {
    (1.0 + s) / (3.0 - s)
}

/// Internal states for the heralded signal photons of `sources` sources with
/// indistinguishability `sigma`.
///
/// Source `i` gets `√w|0> + √(1-w)|i+1>` in a `sources + 1` dimensional label
/// space, with `w` chosen so every pair of photons shows heralded fringe
/// visibility `sigma` (`w² = s`, see [`hom_overlap_for_visibility`]).
pub fn dephase_internal(sources: usize, sigma: f64) -> Result<Vec<InternalState>> {
    if !(0.0..=1.0).contains(&sigma) || sigma.is_nan() {
        return Err(Error::OutOfRange(format!("sigma = {sigma} outside [0, 1]")));
    }
    let dim = sources + 1;
    let w = hom_overlap_for_visibility(sigma).sqrt();
    Ok((0..sources)
        .map(|i| {
            let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
            amplitudes[0] = Complex64::new(w.sqrt(), 0.0);
            amplitudes[i + 1] = Complex64::new((1.0 - w).sqrt(), 0.0);
            InternalState { amplitudes }
        })
        .collect())
}
