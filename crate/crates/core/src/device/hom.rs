use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::circuit::{gate_modes, mzi_with_input_phase};
use super::config::{gate_site, DeviceConfig};
use super::sim::unphased_pair;
use crate::error::{Error, Result};

/// Least-squares fit of `offset + a cos(kx) + b sin(kx)` at a known
/// angular frequency `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub offset: f64,
    pub cos_coef: f64,
    pub sin_coef: f64,
    pub rms: f64,
}

impl HarmonicFit {
    pub fn amplitude(&self) -> f64 {
        self.cos_coef.hypot(self.sin_coef)
    }

    /// Phase `φ` in `offset + A sin(kx + φ)`.
    pub fn phase(&self) -> f64 {
        self.cos_coef.atan2(self.sin_coef)
    }

    /// `(max - min) / (max + min)` of the fitted curve.
    pub fn visibility(&self) -> f64 {
        self.amplitude() / self.offset
    }

    pub fn max(&self) -> f64 {
        self.offset + self.amplitude()
    }

    /// Fitted minimum, floored at zero.
    pub fn min(&self) -> f64 {
        (self.offset - self.amplitude()).max(0.0)
    }
}

pub fn fit_harmonic(samples: &[(f64, f64)], k: f64) -> Result<HarmonicFit> {
    if samples.len() < 3 {
        return Err(Error::FitFailed("need at least three samples".into()));
    }
    let rows = samples.len();
    let design = DMatrix::from_fn(rows, 3, |i, j| match j {
        0 => 1.0,
        1 => (k * samples[i].0).cos(),
        _ => (k * samples[i].0).sin(),
    });
    let y = DVector::from_iterator(rows, samples.iter().map(|s| s.1));
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::FitFailed(e.to_string()))?;
    let resid = &design * &coef - &y;
    Ok(HarmonicFit {
        offset: coef[0],
        cos_coef: coef[1],
        sin_coef: coef[2],
        rms: (resid.norm_squared() / rows as f64).sqrt(),
    })
}

/// Heralded two-source interference on the central gate interferometer.
///
/// Sources 2 and 3 are pumped; their idlers herald, their signals meet on
/// the interferometer whose internal phase is swept. Each sample is the
/// fourfold coincidence probability (both heralds and both interferometer
/// outputs click).
pub fn hom_fringe(config: &DeviceConfig, phases: &[f64]) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    let (a, b) = (1, 2);
    let state = unphased_pair(config, &[a, b])?.photon_sector(4);
    let heralds = [config.sources[a].idler, config.sources[b].idler];
    let modes = gate_modes(0);
    let ext = config.offset(gate_site(0, true));
    let int = config.offset(gate_site(0, false));
    phases
        .iter()
        .map(|&phase| {
            let out = state.apply_passive(&mzi_with_input_phase(phase + int, ext), &modes)?;
            let p = out.probability_where(|c| {
                c[heralds[0]] > 0 && c[heralds[1]] > 0 && c[modes[0]] > 0 && c[modes[1]] > 0
            });
            Ok((phase, p))
        })
        .collect()
}

/// Evenly spaced sweep over one full turn.
pub fn phase_sweep(points: usize) -> Vec<f64> {
    (0..points).map(|i| TAU * i as f64 / points as f64).collect()
}

/// Fits a fringe sampled against interferometer phase; coincidences vary as
/// `cos 2θ`.
pub fn fit_fringe_visibility(samples: &[(f64, f64)]) -> Result<HarmonicFit> {
    fit_harmonic(samples, 2.0)
}

/// `(V, V_HOM) = ((N_max - N_min)/(N_max + N_min), (N_max - 2 N_min)/N_max)`.
pub fn visibility_conversion(n_max: f64, n_min: f64) -> Result<(f64, f64)> {
    if !(n_max > 0.0) || !(n_min >= 0.0) || n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "need n_max > 0 and 0 <= n_min <= n_max, got ({n_max}, {n_min})"
        )));
    }
    Ok(((n_max - n_min) / (n_max + n_min), (n_max - 2.0 * n_min) / n_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::RpegMode;

    fn visibility(sigma: f64) -> (f64, f64) {
        let cfg = DeviceConfig::ideal(RpegMode::Fusion, 0.03).unwrap().with_sigma(sigma);
        let fit = fit_fringe_visibility(&hom_fringe(&cfg, &phase_sweep(24)).unwrap()).unwrap();
        let (v, v_hom) = visibility_conversion(fit.max(), fit.min()).unwrap();
        assert!((v - fit.visibility()).abs() < 1e-12);
        (v, v_hom)
    }

    #[test]
    fn ideal_photons_interfere_fully() {
        let (v, v_hom) = visibility(1.0);
        assert!((v - 1.0).abs() < 1e-9 && (v_hom - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partial_and_no_overlap() {
        let (v, _) = visibility(0.82);
        assert!((v - 0.82).abs() < 1e-9);
        let (v0, h0) = visibility(0.0);
        assert!((v0 - 1.0 / 3.0).abs() < 1e-9 && h0.abs() < 1e-9);
    }

    #[test]
    fn conversion_examples() {
        assert_eq!(visibility_conversion(100.0, 0.0).unwrap(), (1.0, 1.0));
        let (v, h) = visibility_conversion(100.0, 50.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15 && h == 0.0);
        assert!(visibility_conversion(0.0, 0.0).is_err());
    }
}
