//! Grid-based Bayesian estimation of one error parameter from stabilizer
//! counts, with a uniform prior.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_models::{predict_distinguishability, predict_multiphoton, predict_phase_error, ErrorModel, StateKind};
use crate::stabilizer::{CountsTable, PauliString, ProbabilityTable};

/// Model probabilities below this value are raised to it.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub model: ErrorModel,
    values: Vec<f64>,
}

impl ParameterGrid {
    /// Values must be finite and strictly increasing; a single point is
    /// allowed.
    pub fn new(model: ErrorModel, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid needs finite values".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        Ok(Self { model, values })
    }

    pub fn uniform(model: ErrorModel, start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || stop < start {
            return Err(Error::InvalidArgument(format!("bad grid [{start}, {stop}] step {step}")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Self::new(model, (0..n).map(|i| start + step * i as f64).collect())
    }

    /// σ ∈ [0.5, 1] step 0.005, p ∈ [0, 0.1] step 0.001, δ ∈ [0, 0.5] step 0.005.
    pub fn default_for(model: ErrorModel) -> Self {
        let grid = match model {
            ErrorModel::Sigma => Self::uniform(model, 0.5, 1.0, 0.005),
            ErrorModel::P => Self::uniform(model, 0.0, 0.1, 0.001),
            ErrorModel::Delta => Self::uniform(model, 0.0, 0.5, 0.005),
        };
        grid.expect("static grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-grid-point conditioned outcome probabilities.
#[derive(Debug, Clone)]
pub struct GridModel {
    pub grid: ParameterGrid,
    pub tables: Vec<ProbabilityTable>,
}

/// Options for Monte Carlo models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    pub phase_samples: usize,
    pub seed: u64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { phase_samples: 1000, seed: 0 }
    }
}

/// Evaluates the chosen error model at every grid point. A zero pair
/// probability has no coincidences and is replaced by `1e-6`.
pub fn model_tables(kind: StateKind, grid: &ParameterGrid, options: ModelOptions) -> Result<GridModel> {
    let tables = grid
        .values()
        .par_iter()
        .map(|&x| {
            let pred = match grid.model {
                ErrorModel::Sigma => predict_distinguishability(kind, x),
                ErrorModel::P => predict_multiphoton(kind, x.max(1e-6)),
                ErrorModel::Delta => predict_phase_error(kind, x, options.phase_samples, options.seed),
            }?;
            Ok(pred.probabilities)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridModel { grid: grid.clone(), tables })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LikelihoodMethod {
    /// `Σ_settings Σ_j n_j log P_j`, dropping the parameter-free
    /// multinomial coefficient.
    Multinomial,
    /// Per setting, the observed expectation is binned with `bin_width`
    /// and its probability is the fraction of `samples` simulated datasets
    /// (same count total) landing in the same bin.
    SampledFrequency { samples: usize, bin_width: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLikelihoods {
    pub values: Vec<f64>,
    /// Set when any model probability had to be floored for a nonzero count.
    pub floored: bool,
}

pub fn likelihood(model: &GridModel, data: &CountsTable, method: LikelihoodMethod) -> Result<LogLikelihoods> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("no data".into()));
    }
    let results: Vec<(f64, bool)> = model
        .tables
        .par_iter()
        .enumerate()
        .map(|(k, table)| match method {
            LikelihoodMethod::Multinomial => multinomial(table, data),
            LikelihoodMethod::SampledFrequency { samples, bin_width, seed } => {
                sampled_frequency(table, data, samples, bin_width, seed.wrapping_add(k as u64))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LogLikelihoods {
        values: results.iter().map(|r| r.0).collect(),
        floored: results.iter().any(|r| r.1),
    })
}

fn model_row<'a>(table: &'a ProbabilityTable, setting: &str) -> Result<&'a [f64]> {
    table
        .row(setting)
        .ok_or_else(|| Error::InvalidArgument(format!("model has no setting {setting}")))
}

fn multinomial(table: &ProbabilityTable, data: &CountsTable) -> Result<(f64, bool)> {
    let mut total = 0.0;
    let mut floored = false;
    for (setting, counts) in data.iter() {
        let probs = model_row(table, setting)?;
        for (&n, &p) in counts.iter().zip(probs) {
            if n == 0 {
                continue;
            }
            if p < PROBABILITY_FLOOR {
                floored = true;
            }
            total += n as f64 * p.max(PROBABILITY_FLOOR).ln();
        }
    }
    Ok((total, floored))
}

fn sampled_frequency(
    table: &ProbabilityTable,
    data: &CountsTable,
    samples: usize,
    bin_width: f64,
    seed: u64,
) -> Result<(f64, bool)> {
    if samples == 0 || !(bin_width > 0.0) {
        return Err(Error::InvalidArgument("sampled likelihood needs samples and a bin width".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    let mut floored = false;
    for (setting, counts) in data.iter() {
        let pauli: PauliString = setting.parse()?;
        let n: u64 = counts.iter().sum();
        if n == 0 {
            continue;
        }
        let probs = model_row(table, setting)?;
        let expectation = |c: &[u64]| {
            c.iter().enumerate().map(|(j, &x)| pauli.eigenvalue(j as u32) * x as f64).sum::<f64>() / n as f64
        };
        let bin = |e: f64| (e / bin_width).floor() as i64;
        let target = bin(expectation(counts));
        let mut hits = 0usize;
        for _ in 0..samples {
            let draw = sample_multinomial(n, probs, &mut rng)?;
            if bin(expectation(&draw)) == target {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        if p < PROBABILITY_FLOOR {
            floored = true;
        }
        total += p.max(PROBABILITY_FLOOR).ln();
    }
    Ok((total, floored))
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_multinomial<R: rand::Rng>(n: u64, probs: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    let mut out = vec![0u64; probs.len()];
    for (j, &p) in probs.iter().enumerate() {
        if left == 0 || mass <= 0.0 {
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = if j + 1 == probs.len() {
            left
        } else {
            Binomial::new(left, q).map_err(|e| Error::OutOfRange(e.to_string()))?.sample(rng)
        };
        out[j] = k;
        left -= k;
        mass -= p;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSummary {
    /// Least-squares normal fit (raw moments when degenerate).
    pub mean: f64,
    pub std: f64,
    pub raw_mean: f64,
    pub raw_std: f64,
    pub map_estimate: f64,
    /// Too few grid points carry mass for a fit.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub grid: ParameterGrid,
    pub probabilities: Vec<f64>,
    pub summary: GaussianSummary,
}

/// Uniform-prior posterior normalized with log-sum-exp.
pub fn posterior(grid: &ParameterGrid, log_likelihoods: &[f64]) -> Result<Posterior> {
    if log_likelihoods.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} likelihoods for {} grid points",
            log_likelihoods.len(),
            grid.len()
        )));
    }
    if log_likelihoods.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
        return Err(Error::DegenerateLikelihood);
    }
    let max = log_likelihoods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateLikelihood);
    }
    let weights: Vec<f64> = log_likelihoods.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let summary = gaussian_summary(grid.values(), &probabilities);
    Ok(Posterior { grid: grid.clone(), probabilities, summary })
}

/// Fits `A exp(-(x - μ)² / 2s²)` to the posterior by iteratively
/// reweighted least squares on `ln p` (weights `p²`, which matches a
/// least-squares fit of `p` itself).
pub fn gaussian_summary(values: &[f64], probabilities: &[f64]) -> GaussianSummary {
    let raw_mean: f64 = values.iter().zip(probabilities).map(|(x, p)| x * p).sum();
    let raw_var: f64 = values.iter().zip(probabilities).map(|(x, p)| (x - raw_mean).powi(2) * p).sum();
    let raw_std = raw_var.max(0.0).sqrt();
    let map_estimate = values
        .iter()
        .zip(probabilities)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(f64::NAN, |(x, _)| *x);
    let raw = GaussianSummary { mean: raw_mean, std: raw_std, raw_mean, raw_std, map_estimate, degenerate: true };

    let peak = probabilities.iter().copied().fold(0.0, f64::max);
    let support: Vec<usize> = (0..values.len()).filter(|&i| probabilities[i] > 1e-9 * peak).collect();
    if values.len() < 3 || support.len() < 3 {
        return raw;
    }
    // centre the abscissa for conditioning
    let scale = raw_std.max(1e-12);
    let xs: Vec<f64> = support.iter().map(|&i| (values[i] - raw_mean) / scale).collect();
    let ys: Vec<f64> = support.iter().map(|&i| probabilities[i]).collect();
    let mut weights = ys.clone();
    let mut coef = nalgebra::Vector3::zeros();
    for _ in 0..20 {
        let mut a = nalgebra::Matrix3::<f64>::zeros();
        let mut b = nalgebra::Vector3::<f64>::zeros();
        for ((x, y), w) in xs.iter().zip(&ys).zip(&weights) {
            let w2 = w * w;
            let basis = nalgebra::Vector3::new(1.0, *x, x * x);
            a += w2 * basis * basis.transpose();
            b += w2 * y.ln() * basis;
        }
        let Some(solution) = a.lu().solve(&b) else {
            return raw;
        };
        coef = solution;
        weights = xs.iter().map(|x| (coef[0] + coef[1] * x + coef[2] * x * x).exp()).collect();
    }
    if !(coef[2] < 0.0) {
        return raw;
    }
    let s = (-1.0 / (2.0 * coef[2])).sqrt();
    let mu = coef[1] * s * s;
    GaussianSummary {
        mean: raw_mean + mu * scale,
        std: s * scale,
        raw_mean,
        raw_std,
        map_estimate,
        degenerate: false,
    }
}

/// Convenience: model evaluation, multinomial likelihood and posterior.
pub fn estimate(kind: StateKind, grid: &ParameterGrid, data: &CountsTable, options: ModelOptions) -> Result<Posterior> {
    let model = model_tables(kind, grid, options)?;
    let ll = likelihood(&model, data, LikelihoodMethod::Multinomial)?;
    posterior(grid, &ll.values)
}

/// Writes `parameter,probability` rows.
pub fn write_posterior_csv<W: Write>(writer: W, posterior: &Posterior) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["parameter", "probability"])?;
    for (x, p) in posterior.grid.values().iter().zip(&posterior.probabilities) {
        w.serialize((x, p))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_posterior_csv<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: Vec<f64>) -> ParameterGrid {
        ParameterGrid::new(ErrorModel::Sigma, values).unwrap()
    }

    #[test]
    fn single_point_grid() {
        let post = posterior(&grid(vec![0.8]), &[-12.0]).unwrap();
        assert_eq!(post.probabilities, vec![1.0]);
        assert!(post.summary.degenerate);
    }

    #[test]
    fn uniform_and_dominant() {
        let g = grid(vec![0.1, 0.2, 0.3, 0.4]);
        let post = posterior(&g, &[3.0; 4]).unwrap();
        assert!(post.probabilities.iter().all(|p| (p - 0.25).abs() < 1e-15));
        assert!((post.summary.raw_mean - 0.25).abs() < 1e-12);
        let post = posterior(&g, &[0.0, 50.0, 0.0, 0.0]).unwrap();
        assert!(post.probabilities[1] >= 1.0 - 1e-9);
    }

    #[test]
    fn shift_invariance() {
        let g = grid(vec![0.0, 0.5, 1.0]);
        let a = posterior(&g, &[-1.0, -2.0, -4.0]).unwrap();
        let b = posterior(&g, &[-1001.0, -1002.0, -1004.0]).unwrap();
        for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_fit_recovers_parameters() {
        let values: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let ll: Vec<f64> = values.iter().map(|x| -(x - 0.5f64).powi(2) / (2.0 * 0.05f64.powi(2))).collect();
        let post = posterior(&grid(values), &ll).unwrap();
        assert!(!post.summary.degenerate);
        assert!((post.summary.mean - 0.5).abs() < 1e-3);
        assert!((post.summary.std - 0.05).abs() < 1e-3);
    }

    #[test]
    fn triangular_peak() {
        let values: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let probs: Vec<f64> = values.iter().map(|x| 6.0 - (x - 5.0f64).abs()).collect();
        let s = gaussian_summary(&values, &probs.iter().map(|p| p / 36.0).collect::<Vec<_>>());
        assert!((s.mean - 5.0).abs() < 1e-9 && s.map_estimate == 5.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(ParameterGrid::new(ErrorModel::P, vec![0.2, 0.1]).is_err());
        assert!(posterior(&grid(vec![0.1, 0.2]), &[f64::NEG_INFINITY; 2]).is_err());
        assert_eq!(ParameterGrid::default_for(ErrorModel::Sigma).len(), 101);
        assert_eq!(ParameterGrid::default_for(ErrorModel::P).len(), 101);
    }

    #[test]
    fn multinomial_draw_conserves_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = sample_multinomial(1000, &[0.2, 0.3, 0.5], &mut rng).unwrap();
        assert_eq!(d.iter().sum::<u64>(), 1000);
    }
}
