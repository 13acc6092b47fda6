use crate::error::{Error, Result};

/// Single-pair probability of a truncated squeezer with squeezing magnitude
/// `xi`: `x / Σ_{k=0..K} x^k` with `x = |ξ|²`.
pub fn pair_probability(xi: f64, max_pairs: usize) -> f64 {
    let x = xi * xi;
    let norm: f64 = (0..=max_pairs).map(|k| x.powi(k as i32)).sum();
    x / norm
}

/// Inverse of [`pair_probability`] for `|ξ| < 1`.
pub fn xi_for_pair_probability(p: f64, max_pairs: usize) -> Result<f64> {
    if max_pairs == 0 {
        return Err(Error::InvalidArgument("max_pairs must be at least 1".into()));
    }
    let ceiling = 1.0 / (max_pairs as f64 + 1.0);
    if !(0.0..ceiling).contains(&p) {
        return Err(Error::OutOfRange(format!(
            "pair probability {p} not reachable with {max_pairs} pairs (limit {ceiling:.4})"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pair_probability(mid, max_pairs) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
