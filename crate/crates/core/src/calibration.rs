//! Thermo-optic phaseshifter calibration: fringe and IV fits, phase
//! dial-in, crosstalk and loss bookkeeping.

use std::f64::consts::{PI, TAU};
use std::io::Read;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::device::fit_harmonic;
use crate::error::{Error, Result};

/// `A sin(f P + φ0) + c`, with `P` the dissipated power in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub amplitude: f64,
    /// rad/W
    pub frequency: f64,
    pub phase0: f64,
    pub offset: f64,
    pub rms: f64,
}

impl FringeFit {
    pub fn eval(&self, power: f64) -> f64 {
        self.amplitude * (self.frequency * power + self.phase0).sin() + self.offset
    }
}

/// `I(V) = ρ1 V + ρ2 V² + ρ3 V³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvFit {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl IvFit {
    pub fn current(&self, v: f64) -> f64 {
        v * (self.rho1 + v * (self.rho2 + v * self.rho3))
    }

    pub fn power(&self, v: f64) -> f64 {
        self.current(v) * v
    }
}

fn residuals(p: &[f64; 4], samples: &[(f64, f64)]) -> f64 {
    samples
        .iter()
        .map(|&(x, y)| (p[0] * (p[1] * x + p[2]).sin() + p[3] - y).powi(2))
        .sum()
}

/// Least-squares fringe fit. A scan over trial frequencies (each solved
/// linearly for amplitude, phase and offset) seeds a damped Gauss-Newton
/// refinement of all four parameters.
pub fn fit_fringe(samples: &[(f64, f64)]) -> Result<FringeFit> {
    if samples.len() < 8 {
        return Err(Error::FitFailed(format!("need at least 8 samples, got {}", samples.len())));
    }
    if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite()) {
        return Err(Error::FitFailed("non-finite sample".into()));
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.0), b.max(s.0)));
    let span = hi - lo;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    let spread = samples.iter().map(|s| (s.1 - mean_y).powi(2)).sum::<f64>().sqrt();
    if !(span > 0.0) || spread <= 1e-12 * mean_y.abs().max(1.0) {
        return Err(Error::FitFailed("samples show no fringe".into()));
    }

    // trial frequencies from one period over the span up to the sampling limit
    let f_min = TAU / span * 0.5;
    let f_max = PI * samples.len() as f64 / span;
    let steps = 40 * samples.len();
    let mut best: Option<([f64; 4], f64)> = None;
    for i in 0..=steps {
        let f = f_min * (f_max / f_min).powf(i as f64 / steps as f64);
        let h = fit_harmonic(samples, f)?;
        let start = [h.amplitude(), f, h.phase(), h.offset];
        let cost = residuals(&start, samples);
        if best.is_none_or(|b| cost < b.1) {
            best = Some((start, cost));
        }
    }
    let (mut p, mut cost) = best.ok_or_else(|| Error::FitFailed("empty scan".into()))?;

    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for &(x, y) in samples {
            let arg = p[1] * x + p[2];
            let (s, c) = arg.sin_cos();
            let r = p[0] * s + p[3] - y;
            let j = Vector4::new(s, p[0] * x * c, p[0] * c, 1.0);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut damped = jtj;
        for k in 0..4 {
            damped[(k, k)] += lambda * jtj[(k, k)].max(1e-30);
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            break;
        };
        let trial = [p[0] - step[0], p[1] - step[1], p[2] - step[2], p[3] - step[3]];
        let trial_cost = residuals(&trial, samples);
        if trial_cost < cost {
            let done = cost - trial_cost <= 1e-30 + 1e-15 * cost;
            p = trial;
            cost = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if done {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    let (mut amplitude, frequency, mut phase0) = (p[0], p[1], p[2]);
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase0 += PI;
    }
    if !(frequency > 0.0) || !(amplitude > 0.0) || !cost.is_finite() {
        return Err(Error::FitFailed("fit did not converge to a positive fringe".into()));
    }
    Ok(FringeFit {
        amplitude,
        frequency,
        phase0: phase0.rem_euclid(TAU),
        offset: p[3],
        rms: (cost / samples.len() as f64).sqrt(),
    })
}

/// Linear least-squares IV fit through the origin.
pub fn fit_iv(samples: &[(f64, f64)]) -> Result<IvFit> {
    if samples.len() < 3 {
        return Err(Error::FitFailed("need at least 3 IV samples".into()));
    }
    let a = nalgebra::DMatrix::from_fn(samples.len(), 3, |i, j| samples[i].0.powi(j as i32 + 1));
    let b = nalgebra::DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let x = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::FitFailed(e.to_string()))?;
    let fit = IvFit { rho1: x[0], rho2: x[1], rho3: x[2] };
    if samples.iter().any(|&(v, _)| v > 0.0 && fit.current(v) <= 0.0) {
        return Err(Error::FitFailed("fitted current is not positive over the sampled range".into()));
    }
    Ok(fit)
}

/// Phase set by a voltage: `f P(V) + φ_c`, with `φ_c` the fringe phase.
pub fn phase_at(v: f64, fringe: &FringeFit, iv: &IvFit) -> f64 {
    fringe.frequency * iv.power(v) + fringe.phase0
}

/// Smallest voltage in `[v_min, v_max]` whose phase equals `target` modulo
/// 2π. The range is scanned for sign changes of `phase(V) - target - 2πm`
/// and each bracket is refined by bisection.
pub fn dial_phase(target: f64, fringe: &FringeFit, iv: &IvFit, v_range: (f64, f64)) -> Result<f64> {
    let (v_min, v_max) = v_range;
    if !(v_min >= 0.0 && v_max > v_min) || !target.is_finite() {
        return Err(Error::InvalidArgument(format!("bad voltage range {v_range:?}")));
    }
    // offset into [0, 2π) so that m = 0, 1, ... walks up in phase
    let g = |v: f64| phase_at(v, fringe, iv) - target;
    let wrapped = |v: f64| {
        let x = g(v).rem_euclid(TAU);
        x.min(TAU - x)
    };
    if wrapped(v_min) < 1e-12 {
        return Ok(v_min);
    }
    let steps = 4096;
    let dv = (v_max - v_min) / steps as f64;
    let mut prev_v = v_min;
    let mut prev_g = g(v_min);
    for i in 1..=steps {
        let v = v_min + dv * i as f64;
        let gv = g(v);
        let (a, b) = (prev_g.min(gv), prev_g.max(gv));
        // multiples of 2π inside [a, b]
        let m = (a / TAU).ceil();
        if m * TAU <= b {
            let level = m * TAU;
            let (mut lo, mut hi) = (prev_v, v);
            let rising = gv > prev_g;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (g(mid) < level) == rising {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = if (g(lo) - level).abs() <= (g(hi) - level).abs() { lo } else { hi };
            return Ok(root);
        }
        prev_v = v;
        prev_g = gv;
    }
    Err(Error::NoRoot(format!("phase {target} not reachable below {v_max} V")))
}

/// Phase error from a power deviation (mW) and a crosstalk coefficient
/// (rad/mW).
pub fn crosstalk_phase_error(power_deviation_mw: f64, coefficient_rad_per_mw: f64) -> Result<f64> {
    if !(power_deviation_mw >= 0.0) || !(coefficient_rad_per_mw >= 0.0) {
        return Err(Error::OutOfRange("crosstalk inputs must be non-negative".into()));
    }
    Ok(power_deviation_mw * coefficient_rad_per_mw)
}

/// Statistics of dissipated power over chip configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerStats {
    pub count: usize,
    pub mean_mw: f64,
    /// Mean absolute deviation from the mean.
    pub mad_mw: f64,
    /// Population standard deviation.
    pub std_mw: f64,
}

pub fn power_stats(powers_mw: &[f64]) -> Result<PowerStats> {
    if powers_mw.is_empty() {
        return Err(Error::InvalidArgument("no power samples".into()));
    }
    let n = powers_mw.len() as f64;
    let mean = powers_mw.iter().sum::<f64>() / n;
    let mad = powers_mw.iter().map(|p| (p - mean).abs()).sum::<f64>() / n;
    let var = powers_mw.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
    Ok(PowerStats { count: powers_mw.len(), mean_mw: mean, mad_mw: mad, std_mw: var.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeSample {
    pub voltage: f64,
    pub current: f64,
    pub transmission: f64,
}

/// Reads `voltage,current,transmission` rows.
pub fn read_fringe_csv<R: Read>(reader: R) -> Result<Vec<FringeSample>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Reads `configuration_id,power_mW` rows.
pub fn read_power_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(reader);
    r.records()
        .map(|row| {
            let row = row?;
            row.get(1)
                .and_then(|x| x.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidArgument(format!("bad power row {row:?}")))
        })
        .collect()
}

/// Fits the IV curve and the fringe from one calibration sweep.
pub fn calibrate(samples: &[FringeSample]) -> Result<(IvFit, FringeFit)> {
    let iv = fit_iv(&samples.iter().map(|s| (s.voltage, s.current)).collect::<Vec<_>>())?;
    let fringe = fit_fringe(&samples.iter().map(|s| (s.voltage * s.current, s.transmission)).collect::<Vec<_>>())?;
    Ok((iv, fringe))
}

pub const GRATING_DB: f64 = 4.0;
pub const MMI_DB: f64 = 0.65;
pub const STRAIGHT_DB_PER_CM: f64 = 3.0;
pub const SPIRAL_DB_PER_CM: f64 = 7.5;
pub const OFF_CHIP_DB: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    pub entries: Vec<(String, f64)>,
    pub total_db: f64,
}

pub fn loss_total<S: Into<String>>(entries: impl IntoIterator<Item = (S, f64)>) -> LossBudget {
    let entries: Vec<(String, f64)> = entries.into_iter().map(|(l, d)| (l.into(), d)).collect();
    let total_db = entries.iter().map(|e| e.1).sum();
    LossBudget { entries, total_db }
}

/// Loss seen by a signal photon: the measured insertion loss of the
/// source-to-detector path minus input coupling (one grating, two MMIs) and
/// half of the source spiral, plus off-chip loss.
pub fn signal_photon_loss(insertion_db: f64, source_length_cm: f64) -> LossBudget {
    loss_total([
        ("insertion loss".to_string(), insertion_db),
        ("input grating".to_string(), -GRATING_DB),
        ("input MMI".to_string(), -MMI_DB),
        ("input MMI".to_string(), -MMI_DB),
        ("half source spiral".to_string(), -SPIRAL_DB_PER_CM * source_length_cm / 2.0),
        ("off-chip".to_string(), OFF_CHIP_DB),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a: f64, f: f64, phi: f64, c: f64, n: usize, p_max: f64) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let p = p_max * i as f64 / (n - 1) as f64;
                (p, a * (f * p + phi).sin() + c)
            })
            .collect()
    }

    #[test]
    fn noiseless_fringe_recovered() {
        let fit = fit_fringe(&synthetic(0.5, 20.0, 0.3, 0.5, 60, 0.5)).unwrap();
        assert!((fit.amplitude - 0.5).abs() < 1e-6, "{fit:?}");
        assert!((fit.frequency - 20.0).abs() < 1e-6);
        assert!((fit.phase0 - 0.3).abs() < 1e-6);
        assert!((fit.offset - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constant_signal_rejected() {
        let flat: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 0.7)).collect();
        assert!(matches!(fit_fringe(&flat), Err(Error::FitFailed(_))));
        assert!(fit_fringe(&flat[..5]).is_err());
    }

    #[test]
    fn linear_resistor_closed_form() {
        let fringe = FringeFit { amplitude: 1.0, frequency: 15.0, phase0: 0.4, offset: 0.0, rms: 0.0 };
        let iv = IvFit { rho1: 0.02, rho2: 0.0, rho3: 0.0 };
        let target = 2.0;
        let v = dial_phase(target, &fringe, &iv, (0.0, 20.0)).unwrap();
        let expected = ((target - 0.4) / (15.0 * 0.02)).sqrt();
        assert!((v - expected).abs() < 1e-9);
        assert_eq!(dial_phase(0.4, &fringe, &iv, (0.0, 20.0)).unwrap(), 0.0);
        assert!(matches!(dial_phase(target, &fringe, &iv, (0.0, 0.1)), Err(Error::NoRoot(_))));
    }

    #[test]
    fn iv_fit_round_trip() {
        let truth = IvFit { rho1: 0.01, rho2: 2e-4, rho3: -3e-6 };
        let samples: Vec<(f64, f64)> = (1..30).map(|i| (i as f64 * 0.3, truth.current(i as f64 * 0.3))).collect();
        let fit = fit_iv(&samples).unwrap();
        assert!((fit.rho1 - truth.rho1).abs() < 1e-12 && (fit.rho3 - truth.rho3).abs() < 1e-12);
    }

    #[test]
    fn crosstalk_examples() {
        assert!((crosstalk_phase_error(39.0, 0.003).unwrap() - 0.117).abs() < 1e-12);
        assert!((crosstalk_phase_error(22.0, 0.003).unwrap() - 0.066).abs() < 1e-12);
        assert_eq!(crosstalk_phase_error(0.0, 0.003).unwrap(), 0.0);
        assert!(crosstalk_phase_error(-1.0, 0.003).is_err());
    }

    #[test]
    fn loss_examples() {
        let b = loss_total([("grating", 4.0), ("mmi", 0.65), ("mmi", 0.65), ("off-chip", 3.0)]);
        assert!((b.total_db - 8.3).abs() < 1e-12);
        assert_eq!(loss_total(Vec::<(String, f64)>::new()).total_db, 0.0);
        assert!((signal_photon_loss(26.1, 1.2).total_db - 19.3).abs() < 1e-9);
    }

    #[test]
    fn power_statistics() {
        let s = power_stats(&[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert_eq!(s.mean_mw, 4.0);
        assert_eq!(s.mad_mw, 2.0);
        assert!((s.std_mw - 5f64.sqrt()).abs() < 1e-12);
    }
}
