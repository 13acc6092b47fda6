//! Truncated multimode Fock space with linear-optical evolution.
//!
//! States are sparse maps from occupation vectors to complex amplitudes.
//! Each physical mode carries `internal_dim` internal labels (a proxy for the
//! photons' spectral state); effective mode `m * internal_dim + l` is label
//! `l` of physical mode `m`. Passive optics act identically on every label,
//! detectors sum probabilities over labels.

mod internal;
mod unitary;

pub use internal::{
    dephase_internal, fringe_visibility_for_overlap, hom_overlap_for_visibility, InternalState,
};
pub use unitary::ModeUnitary;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes below this magnitude are dropped after every operation.
pub const PRUNE_TOLERANCE: f64 = 1e-12;

/// Largest photon number the engine is built to handle in a single mode.
const MAX_PHOTONS: usize = 24;

// Fixed hasher keeps iteration order (and so floating-point summation order)
// identical from run to run.
type AmpMap = HashMap<Vec<u8>, Complex64, BuildHasherDefault<DefaultHasher>>;

fn new_map(capacity: usize) -> AmpMap {
    AmpMap::with_capacity_and_hasher(capacity, Default::default())
}

fn sqrt_factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().sqrt()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shape of a truncated Fock space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    pub modes: usize,
    pub internal_dim: usize,
    pub cutoff: usize,
}

impl FockSpace {
    pub fn new(modes: usize, internal_dim: usize, cutoff: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("at least one mode is required".into()));
        }
        if internal_dim == 0 {
            return Err(Error::InvalidArgument("internal dimension must be >= 1".into()));
        }
        if cutoff > MAX_PHOTONS {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff} exceeds {MAX_PHOTONS}")));
        }
        Ok(Self { modes, internal_dim, cutoff })
    }

    pub fn effective_modes(&self) -> usize {
        self.modes * self.internal_dim
    }

    pub fn effective(&self, mode: usize, label: usize) -> usize {
        mode * self.internal_dim + label
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange { index: mode, modes: self.modes });
        }
        Ok(())
    }
}

/// Sparse state vector over occupation numbers of the effective modes.
#[derive(Clone, Debug)]
pub struct FockState {
    space: FockSpace,
    amps: AmpMap,
    truncated_weight: f64,
}

impl FockState {
    pub fn vacuum(modes: usize, internal_dim: usize, cutoff: usize) -> Result<Self> {
        Ok(Self::vacuum_in(FockSpace::new(modes, internal_dim, cutoff)?))
    }

    pub fn vacuum_in(space: FockSpace) -> Self {
        let mut amps = new_map(1);
        amps.insert(vec![0; space.effective_modes()], Complex64::new(1.0, 0.0));
        Self { space, amps, truncated_weight: 0.0 }
    }

    pub fn empty(space: FockSpace) -> Self {
        Self { space, amps: new_map(0), truncated_weight: 0.0 }
    }

    /// Builds a state from explicit `(effective occupation, amplitude)` terms.
    pub fn from_terms<I>(space: FockSpace, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, Complex64)>,
    {
        let mut state = Self::empty(space);
        for (occupation, amplitude) in terms {
            if occupation.len() != space.effective_modes() {
                return Err(Error::ModeMismatch(format!(
                    "occupation has {} entries, space has {} effective modes",
                    occupation.len(),
                    space.effective_modes()
                )));
            }
            let total: usize = occupation.iter().map(|&n| n as usize).sum();
            if total > space.cutoff {
                return Err(Error::CutoffViolation { needed: total, cutoff: space.cutoff });
            }
            *state.amps.entry(occupation).or_default() += amplitude;
        }
        state.prune();
        Ok(state)
    }

    /// Number state with the given photon count in each physical mode, all in
    /// internal label 0.
    pub fn number_state(space: FockSpace, counts: &[usize]) -> Result<Self> {
        if counts.len() != space.modes {
            return Err(Error::ModeMismatch(format!(
                "{} counts for {} modes",
                counts.len(),
                space.modes
            )));
        }
        let mut occupation = vec![0u8; space.effective_modes()];
        for (m, &n) in counts.iter().enumerate() {
            occupation[space.effective(m, 0)] = n as u8;
        }
        Self::from_terms(space, [(occupation, Complex64::new(1.0, 0.0))])
    }

    /// `Σ_{k=0..max_pairs} ξ^k |k>_signal |k>_idler`, unnormalized, with both
    /// photons in internal label 0.
    pub fn two_mode_squeezed(
        space: FockSpace,
        xi: Complex64,
        signal: usize,
        idler: usize,
        max_pairs: usize,
    ) -> Result<Self> {
        let label0 = InternalState::basis(space.internal_dim, 0);
        Self::two_mode_squeezed_internal(space, xi, (signal, &label0), (idler, &label0), max_pairs)
    }

    /// Pair source emitting signal and idler photons with the given internal
    /// states: `Σ_k ξ^k (A† B†)^k / k! |0>` where `A†`, `B†` create a photon in
    /// the respective mode and internal state.
    pub fn two_mode_squeezed_internal(
        space: FockSpace,
        xi: Complex64,
        signal: (usize, &InternalState),
        idler: (usize, &InternalState),
        max_pairs: usize,
    ) -> Result<Self> {
        space.check_mode(signal.0)?;
        space.check_mode(idler.0)?;
        if signal.0 == idler.0 {
            return Err(Error::InvalidArgument("signal and idler modes must differ".into()));
        }
        if 2 * max_pairs > space.cutoff {
            return Err(Error::CutoffViolation { needed: 2 * max_pairs, cutoff: space.cutoff });
        }
        let creator = |(mode, state): (usize, &InternalState)| -> Result<Vec<(usize, Complex64)>> {
            if state.dim() > space.internal_dim {
                return Err(Error::ModeMismatch("internal state larger than label space".into()));
            }
            Ok(state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > 0.0)
                .map(|(l, &a)| (space.effective(mode, l), a))
                .collect())
        };
        let signal_op = creator(signal)?;
        let idler_op = creator(idler)?;

        let mut total = Self::vacuum_in(space);
        let mut term = Self::vacuum_in(space);
        let mut weight = Complex64::new(1.0, 0.0);
        for k in 1..=max_pairs {
            term = term.create(&signal_op)?.create(&idler_op)?.scaled(Complex64::new(1.0 / k as f64, 0.0));
            weight *= xi;
            total = total.add(&term.scaled(weight));
        }
        total.prune();
        Ok(total)
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Probability weight discarded by cutoff truncation while building this
    /// state (zero unless a truncating operation was used).
    pub fn truncated_weight(&self) -> f64 {
        self.truncated_weight
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], Complex64)> {
        self.amps.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    /// Terms sorted by occupation, for reproducible reductions.
    pub fn sorted_terms(&self) -> Vec<(&[u8], Complex64)> {
        let mut terms: Vec<_> = self.iter().collect();
        terms.sort_by(|a, b| a.0.cmp(b.0));
        terms
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        self.amps.get(occupation).copied().unwrap_or_default()
    }

    /// Amplitude of a number state given per physical mode (label 0).
    pub fn amplitude_of_counts(&self, counts: &[usize]) -> Complex64 {
        let mut occupation = vec![0u8; self.space.effective_modes()];
        for (m, &n) in counts.iter().enumerate() {
            occupation[self.space.effective(m, 0)] = n as u8;
        }
        self.amplitude(&occupation)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sorted_terms().iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / n.sqrt(), 0.0))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.amps.values_mut() {
            *v *= factor;
        }
        out.prune();
        out
    }

    fn add(&self, other: &FockState) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.amps {
            *out.amps.entry(k.clone()).or_default() += *v;
        }
        out.truncated_weight += other.truncated_weight;
        out
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
    }

    /// Photon count in each physical mode, summed over internal labels.
    pub fn physical_counts(&self, occupation: &[u8]) -> Vec<usize> {
        occupation
            .chunks(self.space.internal_dim)
            .map(|c| c.iter().map(|&n| n as usize).sum())
            .collect()
    }

    /// Applies `Σ_m c_m a†_m` over effective modes.
    pub fn create(&self, op: &[(usize, Complex64)]) -> Result<Self> {
        let n_eff = self.space.effective_modes();
        let mut out = new_map(self.amps.len() * op.len().max(1));
        for (occupation, &amp) in &self.amps {
            let total: usize = occupation.iter().map(|&n| n as usize).sum();
            if total + 1 > self.space.cutoff {
                return Err(Error::CutoffViolation { needed: total + 1, cutoff: self.space.cutoff });
            }
            for &(m, c) in op {
                if m >= n_eff {
                    return Err(Error::ModeOutOfRange { index: m, modes: n_eff });
                }
                let mut next = occupation.clone();
                next[m] += 1;
                let factor = (next[m] as f64).sqrt();
                *out.entry(next).or_default() += amp * c * factor;
            }
        }
        let mut state = Self { space: self.space, amps: out, truncated_weight: self.truncated_weight };
        state.prune();
        Ok(state)
    }

    /// Tensor product: modes of `b` are appended after those of `a`; the
    /// cutoff of the result is the combined budget `a.cutoff + b.cutoff`.
    pub fn tensor(a: &FockState, b: &FockState) -> Result<Self> {
        Self::tensor_with_cutoff(a, b, a.space.cutoff + b.space.cutoff)
    }

    /// Tensor product truncated to `cutoff` photons. Dropped weight is added
    /// to [`FockState::truncated_weight`].
    pub fn tensor_with_cutoff(a: &FockState, b: &FockState, cutoff: usize) -> Result<Self> {
        if a.space.internal_dim != b.space.internal_dim {
            return Err(Error::ModeMismatch("internal dimensions differ".into()));
        }
        let space = FockSpace::new(a.space.modes + b.space.modes, a.space.internal_dim, cutoff)?;
        let mut amps = new_map(a.amps.len() * b.amps.len());
        let mut dropped = 0.0;
        for (ka, va) in a.sorted_terms() {
            let na: usize = ka.iter().map(|&n| n as usize).sum();
            for (kb, vb) in b.sorted_terms() {
                let nb: usize = kb.iter().map(|&n| n as usize).sum();
                let amp = va * vb;
                if na + nb > cutoff {
                    dropped += amp.norm_sqr();
                    continue;
                }
                let mut key = Vec::with_capacity(ka.len() + kb.len());
                key.extend_from_slice(ka);
                key.extend_from_slice(kb);
                amps.insert(key, amp);
            }
        }
        let mut state = Self {
            space,
            amps,
            truncated_weight: a.truncated_weight + b.truncated_weight + dropped,
        };
        state.prune();
        Ok(state)
    }

    /// Relabels physical modes: mode `i` moves to `perm[i]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        ModeUnitary::permutation(perm)?;
        if perm.len() != self.space.modes {
            return Err(Error::ModeMismatch(format!(
                "permutation of {} modes applied to {} modes",
                perm.len(),
                self.space.modes
            )));
        }
        let d = self.space.internal_dim;
        let mut amps = new_map(self.amps.len());
        for (k, v) in &self.amps {
            let mut next = vec![0u8; k.len()];
            for (m, &target) in perm.iter().enumerate() {
                next[target * d..(target + 1) * d].copy_from_slice(&k[m * d..(m + 1) * d]);
            }
            amps.insert(next, *v);
        }
        Ok(Self { space: self.space, amps, truncated_weight: self.truncated_weight })
    }

    /// Extends the space with `extra` empty physical modes.
    pub fn with_extra_modes(&self, extra: usize) -> Result<Self> {
        let vac = Self::vacuum_in(FockSpace::new(extra.max(1), self.space.internal_dim, 0)?);
        if extra == 0 {
            return Ok(self.clone());
        }
        let mut out = Self::tensor_with_cutoff(self, &vac, self.space.cutoff)?;
        out.truncated_weight = self.truncated_weight;
        Ok(out)
    }

    /// Same state viewed in a space with a different cutoff. Terms above the
    /// new cutoff are dropped and their weight recorded.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        let space = FockSpace::new(self.space.modes, self.space.internal_dim, cutoff)?;
        let mut amps = new_map(self.amps.len());
        let mut dropped = 0.0;
        for (k, v) in &self.amps {
            let n: usize = k.iter().map(|&x| x as usize).sum();
            if n > cutoff {
                dropped += v.norm_sqr();
            } else {
                amps.insert(k.clone(), *v);
            }
        }
        Ok(Self { space, amps, truncated_weight: self.truncated_weight + dropped })
    }

    /// Applies `U` to the listed effective modes (`a†_j -> Σ_k U_kj a†_k`).
    pub fn apply_unitary(&self, u: &ModeUnitary, effective_modes: &[usize]) -> Result<Self> {
        let n_eff = self.space.effective_modes();
        check_subset(effective_modes, n_eff)?;
        if u.dim() != effective_modes.len() {
            return Err(Error::ModeMismatch(format!(
                "{}-mode unitary applied to {} modes",
                u.dim(),
                effective_modes.len()
            )));
        }
        let mut out = Self {
            space: self.space,
            amps: apply_general(&self.amps, u, effective_modes),
            truncated_weight: self.truncated_weight,
        };
        out.prune();
        Ok(out)
    }

    /// Applies a passive element to physical modes, acting identically on
    /// every internal label (`U ⊗ I`).
    pub fn apply_passive(&self, u: &ModeUnitary, modes: &[usize]) -> Result<Self> {
        check_subset(modes, self.space.modes)?;
        if u.dim() != modes.len() {
            return Err(Error::ModeMismatch(format!(
                "{}-mode unitary applied to {} modes",
                u.dim(),
                modes.len()
            )));
        }
        let d = self.space.internal_dim;
        let mut amps = self.amps.clone();
        for label in 0..d {
            let eff: Vec<usize> = modes.iter().map(|&m| m * d + label).collect();
            amps = match u.as_2x2() {
                Some(u2) => apply_two_mode(&amps, &u2, eff[0], eff[1]),
                None => apply_general(&amps, u, &eff),
            };
            amps.retain(|_, a| a.norm() >= PRUNE_TOLERANCE);
        }
        Ok(Self { space: self.space, amps, truncated_weight: self.truncated_weight })
    }

    /// Phase shift `e^{iφ n}` on a physical mode.
    pub fn apply_phase(&self, mode: usize, phi: f64) -> Result<Self> {
        self.space.check_mode(mode)?;
        let d = self.space.internal_dim;
        let mut out = self.clone();
        for (k, v) in out.amps.iter_mut() {
            let n: usize = k[mode * d..(mode + 1) * d].iter().map(|&x| x as usize).sum();
            if n > 0 {
                *v *= Complex64::from_polar(1.0, phi * n as f64);
            }
        }
        Ok(out)
    }

    /// Keeps only terms with exactly `n` photons in total.
    pub fn photon_sector(&self, n: usize) -> Self {
        self.filter(|k| k.iter().map(|&x| x as usize).sum::<usize>() == n)
    }

    /// Keeps only terms with at least `n` photons in total.
    pub fn sectors_at_least(&self, n: usize) -> Self {
        self.filter(|k| k.iter().map(|&x| x as usize).sum::<usize>() >= n)
    }

    fn filter<F: Fn(&[u8]) -> bool>(&self, keep: F) -> Self {
        let mut amps = new_map(self.amps.len());
        for (k, v) in &self.amps {
            if keep(k) {
                amps.insert(k.clone(), *v);
            }
        }
        Self { space: self.space, amps, truncated_weight: self.truncated_weight }
    }

    /// Conditions on a detection pattern over physical modes.
    ///
    /// With `threshold == false` each listed mode must hold exactly the given
    /// photon number; with `threshold == true` a nonzero entry means "at least
    /// one photon" and a zero entry means "no photon". Unlisted modes are not
    /// observed. Internal labels are summed over. Returns the renormalized
    /// conditional state and the success probability; an impossible pattern
    /// yields probability 0 and an empty state.
    pub fn postselect(&self, pattern: &[(usize, usize)], threshold: bool) -> Result<(Self, f64)> {
        for &(m, _) in pattern {
            self.space.check_mode(m)?;
        }
        let d = self.space.internal_dim;
        let kept = self.filter(|k| {
            pattern.iter().all(|&(m, want)| {
                let n: usize = k[m * d..(m + 1) * d].iter().map(|&x| x as usize).sum();
                if threshold {
                    (n > 0) == (want > 0)
                } else {
                    n == want
                }
            })
        });
        let p = kept.norm_sqr();
        if p == 0.0 {
            return Ok((Self::empty(self.space), 0.0));
        }
        Ok((kept.normalized(), p))
    }

    /// Total probability of terms whose physical photon counts satisfy `pred`.
    pub fn probability_where<F: Fn(&[usize]) -> bool>(&self, pred: F) -> f64 {
        self.sorted_terms()
            .into_iter()
            .filter(|(k, _)| pred(&self.physical_counts(k)))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `<a|b>`.
    pub fn overlap(a: &FockState, b: &FockState) -> Result<Complex64> {
        if a.space.modes != b.space.modes || a.space.internal_dim != b.space.internal_dim {
            return Err(Error::ModeMismatch(format!(
                "{}x{} vs {}x{} modes",
                a.space.modes, a.space.internal_dim, b.space.modes, b.space.internal_dim
            )));
        }
        Ok(a
            .sorted_terms()
            .into_iter()
            .map(|(k, va)| va.conj() * b.amplitude(k))
            .sum())
    }
}

fn check_subset(modes: &[usize], limit: usize) -> Result<()> {
    for (i, &m) in modes.iter().enumerate() {
        if m >= limit {
            return Err(Error::ModeOutOfRange { index: m, modes: limit });
        }
        if modes[..i].contains(&m) {
            return Err(Error::InvalidArgument(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

/// Two-mode fast path. For `na` photons in `a` and `nb` in `b`, the output
/// amplitude with `k` photons in `a` is the coefficient of `x^k y^(n-k)` in
/// `(U00 x + U10 y)^na (U01 x + U11 y)^nb`, times `√(k!(n-k)!/(na! nb!))`.
fn apply_two_mode(amps: &AmpMap, u: &[[Complex64; 2]; 2], a: usize, b: usize) -> AmpMap {
    let mut out = new_map(amps.len() * 2);
    let mut cache: HashMap<(u8, u8), Vec<Complex64>> = HashMap::new();
    for (k, &amp) in amps {
        let (na, nb) = (k[a], k[b]);
        if na == 0 && nb == 0 {
            *out.entry(k.clone()).or_default() += amp;
            continue;
        }
        let coeffs = cache.entry((na, nb)).or_insert_with(|| two_mode_coefficients(u, na, nb));
        for (ka, &c) in coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let mut next = k.clone();
            next[a] = ka as u8;
            next[b] = na + nb - ka as u8;
            *out.entry(next).or_default() += amp * c;
        }
    }
    out
}

fn two_mode_coefficients(u: &[[Complex64; 2]; 2], na: u8, nb: u8) -> Vec<Complex64> {
    let (na, nb) = (na as usize, nb as usize);
    let n = na + nb;
    let norm_in = sqrt_factorial(na) * sqrt_factorial(nb);
    (0..=n)
        .map(|k| {
            let mut sum = Complex64::new(0.0, 0.0);
            let lo = k.saturating_sub(nb);
            for i in lo..=na.min(k) {
                let j = k - i;
                sum += binomial(na, i)
                    * u[0][0].powu(i as u32)
                    * u[1][0].powu((na - i) as u32)
                    * binomial(nb, j)
                    * u[0][1].powu(j as u32)
                    * u[1][1].powu((nb - j) as u32);
            }
            sum * (sqrt_factorial(k) * sqrt_factorial(n - k) / norm_in)
        })
        .collect()
}

/// General path: expands the product of transformed creation operators one
/// photon at a time, merging monomials as it goes.
fn apply_general(amps: &AmpMap, u: &ModeUnitary, modes: &[usize]) -> AmpMap {
    let m = modes.len();
    let mut out = new_map(amps.len() * m);
    for (k, &amp) in amps {
        let mut poly: HashMap<Vec<u8>, Complex64> = HashMap::new();
        poly.insert(vec![0; m], Complex64::new(1.0, 0.0));
        let mut norm_in = 1.0;
        for (j, &mode) in modes.iter().enumerate() {
            let nj = k[mode] as usize;
            norm_in *= sqrt_factorial(nj);
            for _ in 0..nj {
                let mut next: HashMap<Vec<u8>, Complex64> = HashMap::with_capacity(poly.len() * m);
                for (mono, c) in &poly {
                    for row in 0..m {
                        let coef = u.entry(row, j);
                        if coef.norm() == 0.0 {
                            continue;
                        }
                        let mut mono2 = mono.clone();
                        mono2[row] += 1;
                        *next.entry(mono2).or_default() += c * coef;
                    }
                }
                poly = next;
            }
        }
        for (mono, c) in poly {
            if c.norm() == 0.0 {
                continue;
            }
            let norm_out: f64 = mono.iter().map(|&x| sqrt_factorial(x as usize)).product();
            let mut next = k.clone();
            for (slot, &mode) in modes.iter().enumerate() {
                next[mode] = mono[slot];
            }
            *out.entry(next).or_default() += amp * c * (norm_out / norm_in);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_has_single_unit_amplitude() {
        let v = FockState::vacuum(2, 1, 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.amplitude(&[0, 0]), c(1.0, 0.0));
        assert!((FockState::vacuum(8, 1, 4).unwrap().norm_sqr() - 1.0).abs() < 1e-15);
        let z = FockState::vacuum(1, 1, 0).unwrap();
        assert_eq!(z.amplitude(&[0]), c(1.0, 0.0));
        assert!(FockState::vacuum(0, 1, 2).is_err());
    }

    #[test]
    fn squeezer_geometric_series() {
        let space = FockSpace::new(2, 1, 4).unwrap();
        let s = FockState::two_mode_squeezed(space, c(0.2, 0.0), 0, 1, 2).unwrap();
        assert!((s.amplitude(&[0, 0]) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(&[1, 1]) - c(0.2, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(&[2, 2]) - c(0.04, 0.0)).norm() < 1e-15);
        let zero = FockState::two_mode_squeezed(space, c(0.0, 0.0), 0, 1, 2).unwrap();
        assert_eq!(zero.len(), 1);
        assert!(matches!(
            FockState::two_mode_squeezed(space, c(0.1, 0.0), 0, 1, 3),
            Err(Error::CutoffViolation { .. })
        ));
    }

    #[test]
    fn squeezer_pair_probability() {
        let space = FockSpace::new(2, 1, 4).unwrap();
        let s = FockState::two_mode_squeezed(space, c(0.03f64.sqrt(), 0.0), 0, 1, 2)
            .unwrap()
            .normalized();
        let p = s.amplitude(&[1, 1]).norm_sqr();
        assert!((p - 0.03).abs() < 1e-3, "p = {p}");
    }

    #[test]
    fn single_photon_through_balanced_coupler() {
        let space = FockSpace::new(2, 1, 2).unwrap();
        let s = FockState::number_state(space, &[1, 0]).unwrap();
        let out = s.apply_passive(&ModeUnitary::balanced(), &[0, 1]).unwrap();
        assert!((out.amplitude(&[1, 0]) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(&[0, 1]) - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn hom_dip_on_balanced_coupler() {
        let space = FockSpace::new(2, 1, 2).unwrap();
        let s = FockState::number_state(space, &[1, 1]).unwrap();
        let out = s.apply_passive(&ModeUnitary::balanced(), &[0, 1]).unwrap();
        assert!(out.amplitude(&[1, 1]).norm() < 1e-15);
        let (_, p) = out.postselect(&[(0, 1), (1, 1)], false).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn two_photons_in_one_input() {
        // oracle: (a† + i b†)² / 2 / √2! applied to vacuum
        // = (a†² + 2i a†b† - b†²) / (2√2) -> amplitudes 1/2, i/√2, -1/2
        let space = FockSpace::new(2, 1, 2).unwrap();
        let s = FockState::number_state(space, &[2, 0]).unwrap();
        for out in [
            s.apply_passive(&ModeUnitary::balanced(), &[0, 1]).unwrap(),
            s.apply_unitary(&ModeUnitary::balanced(), &[0, 1]).unwrap(),
        ] {
            assert!((out.amplitude(&[2, 0]) - c(0.5, 0.0)).norm() < 1e-12);
            assert!((out.amplitude(&[1, 1]) - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-12);
            assert!((out.amplitude(&[0, 2]) - c(-0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn tensor_concatenates_modes() {
        let one = FockState::number_state(FockSpace::new(1, 1, 1).unwrap(), &[1]).unwrap();
        let t = FockState::tensor(&one, &one).unwrap();
        assert_eq!(t.space().modes, 2);
        assert_eq!(t.amplitude(&[1, 1]), c(1.0, 0.0));
        let vac = FockState::vacuum(1, 1, 0).unwrap();
        let vv = FockState::tensor(&vac, &vac).unwrap();
        assert_eq!(vv.amplitude(&[0, 0]), c(1.0, 0.0));
    }

    #[test]
    fn tensor_truncation_is_flagged() {
        let space = FockSpace::new(2, 1, 2).unwrap();
        let s = FockState::two_mode_squeezed(space, c(0.5, 0.0), 0, 1, 1).unwrap().normalized();
        let t = FockState::tensor_with_cutoff(&s, &s, 2).unwrap();
        let dropped = s.amplitude(&[1, 1]).norm_sqr().powi(2);
        assert!((t.truncated_weight() - dropped).abs() < 1e-12);
        assert!((t.norm_sqr() + t.truncated_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_postselection_aggregates_labels() {
        let space = FockSpace::new(2, 2, 2).unwrap();
        // photon in mode 0 label 1, photon in mode 1 label 0
        let s = FockState::from_terms(space, [(vec![0, 1, 1, 0], c(1.0, 0.0))]).unwrap();
        let (_, p) = s.postselect(&[(0, 1), (1, 1)], true).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let (_, p) = s.postselect(&[(0, 0)], true).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn overlap_checks_structure() {
        let a = FockState::vacuum(2, 1, 2).unwrap();
        let b = FockState::vacuum(3, 1, 2).unwrap();
        assert!(FockState::overlap(&a, &b).is_err());
        let s10 = FockState::number_state(a.space(), &[1, 0]).unwrap();
        let s01 = FockState::number_state(a.space(), &[0, 1]).unwrap();
        assert_eq!(FockState::overlap(&s10, &s01).unwrap(), c(0.0, 0.0));
        assert!((FockState::overlap(&s10, &s10).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mode_range_errors() {
        let s = FockState::vacuum(2, 1, 2).unwrap();
        assert!(matches!(
            s.apply_passive(&ModeUnitary::balanced(), &[0, 5]),
            Err(Error::ModeOutOfRange { .. })
        ));
        assert!(s.apply_passive(&ModeUnitary::balanced(), &[1, 1]).is_err());
    }
}
