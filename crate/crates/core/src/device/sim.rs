use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{gate_elements, measurement_matrix, Matrix2};
use super::config::{pump_site, rail_mode, setting_for_pauli, AnalysisSetting, DeviceConfig, RpegMode, MODES, QUBITS};
use crate::error::{Error, Result};
use crate::fock::{dephase_internal, FockSpace, FockState, InternalState, ModeUnitary};
use crate::stabilizer::{PauliString, ProbabilityTable, StateVector};

/// Coincidence probabilities for every outcome pattern of the measured
/// qubits. Pattern bit `m-1-k` is the rail clicked on `qubits[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub qubits: Vec<usize>,
    /// Unconditioned probability per pulse of each pattern.
    pub probabilities: Vec<f64>,
    /// Weight lost to the photon-number cutoff.
    pub truncated_weight: f64,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Probabilities conditioned on a coincidence.
    pub fn conditioned(&self) -> Vec<f64> {
        let t = self.total();
        self.probabilities.iter().map(|p| if t > 0.0 { p / t } else { 0.0 }).collect()
    }
}

/// Signal photon internal states for the configured `σ` (one label when the
/// photons are identical).
fn internal_states(config: &DeviceConfig) -> Result<(usize, Vec<InternalState>)> {
    if config.sigma >= 1.0 {
        return Ok((1, vec![InternalState::basis(1, 0); config.sources.len()]));
    }
    let states = dephase_internal(config.sources.len(), config.sigma)?;
    Ok((states[0].dim(), states))
}

/// Product of the four (normalized) pair sources on the ten device modes,
/// truncated at the configured cutoff. Pump phase offsets are applied.
pub fn build_bell_pairs(config: &DeviceConfig) -> Result<FockState> {
    config.validate()?;
    let state = unphased_sources(config, &[0, 1, 2, 3])?;
    apply_pump_phases(&state, config, &config.phase_offsets)
}

/// Normalized product of the listed sources on the device modes, before
/// pump phase offsets.
pub(crate) fn unphased_pair(config: &DeviceConfig, pumped: &[usize]) -> Result<FockState> {
    unphased_sources(config, pumped)
}

fn unphased_sources(config: &DeviceConfig, pumped: &[usize]) -> Result<FockState> {
    let (dim, internal) = internal_states(config)?;
    let idler = InternalState::basis(dim, 0);
    let cutoff = config.cutoff();
    let mut total: Option<FockState> = None;
    let mut perm = Vec::with_capacity(MODES);
    for &i in pumped {
        let s = &config.sources[i];
        let pairs = config.max_pairs.min(cutoff / 2);
        let space = FockSpace::new(2, dim, 2 * pairs)?;
        let one = FockState::two_mode_squeezed_internal(space, s.xi(), (0, &internal[i]), (1, &idler), pairs)?
            .normalized();
        total = Some(match total {
            None => one,
            Some(t) => FockState::tensor_with_cutoff(&t, &one, cutoff)?,
        });
        perm.push(s.signal);
        perm.push(s.idler);
    }
    let total = total.ok_or_else(|| Error::InvalidArgument("no source pumped".into()))?;
    let free: Vec<usize> = (0..MODES).filter(|m| !perm.contains(m)).collect();
    perm.extend(free);
    total.with_extra_modes(MODES - total.space().modes)?.permute_modes(&perm)
}

fn apply_pump_phases(state: &FockState, config: &DeviceConfig, offsets: &[f64]) -> Result<FockState> {
    let mut out = state.clone();
    for (i, s) in config.sources.iter().enumerate() {
        let eps = offsets.get(pump_site(i)).copied().unwrap_or(0.0);
        if eps != 0.0 {
            // two pump photons per pair
            out = out.apply_phase(s.signal, 2.0 * eps)?;
        }
    }
    Ok(out)
}

fn apply_2x2(state: &FockState, m: &Matrix2, modes: [usize; 2]) -> Result<FockState> {
    let u = ModeUnitary::from_row_slice(2, &[m[0][0], m[0][1], m[1][0], m[1][1]])?;
    state.apply_passive(&u, &modes)
}

/// Precomputed source state for repeated simulation of one configuration.
#[derive(Debug, Clone)]
pub struct Device {
    config: DeviceConfig,
    qubits: Vec<usize>,
    input: FockState,
}

impl Device {
    /// Device measured on all four qubits.
    pub fn new(config: &DeviceConfig) -> Result<Self> {
        Self::for_qubits(config, &[0, 1, 2, 3])
    }

    /// Device whose coincidences are formed on the listed 0-based qubits.
    /// First-order sources keep only the sector with one photon per
    /// measured qubit; otherwise every sector that can click is kept.
    pub fn for_qubits(config: &DeviceConfig, qubits: &[usize]) -> Result<Self> {
        config.validate()?;
        if qubits.is_empty() || qubits.iter().any(|&q| q >= QUBITS) {
            return Err(Error::InvalidArgument(format!("bad qubit list {qubits:?}")));
        }
        let state = unphased_sources(config, &[0, 1, 2, 3])?;
        let m = qubits.len();
        let input = if config.max_pairs == 1 { state.photon_sector(m) } else { state.sectors_at_least(m) };
        Ok(Self { config: config.clone(), qubits: qubits.to_vec(), input })
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.config
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    /// State after the sources and the gate for the given phase offsets.
    pub fn gate_output(&self, offsets: &[f64]) -> Result<FockState> {
        let mut state = apply_pump_phases(&self.input, &self.config, offsets)?;
        for (u, modes) in gate_elements(self.config.rpeg, offsets) {
            state = state.apply_passive(&u, &modes)?;
        }
        Ok(state)
    }

    /// Applies frame and analysis stages and collects pattern probabilities.
    pub fn measure(&self, gate_output: &FockState, setting: &AnalysisSetting, offsets: &[f64]) -> Result<OutcomeDistribution> {
        let mut state = gate_output.clone();
        for &q in &self.qubits {
            let m = measurement_matrix(self.config.rpeg, setting, q, offsets);
            state = apply_2x2(&state, &m, [rail_mode(q, 0), rail_mode(q, 1)])?;
        }
        Ok(OutcomeDistribution {
            qubits: self.qubits.clone(),
            probabilities: pattern_probabilities(&state, &self.qubits),
            truncated_weight: state.truncated_weight(),
        })
    }

    /// Distribution for the given setting using the configured offsets.
    pub fn distribution(&self, setting: &AnalysisSetting) -> Result<OutcomeDistribution> {
        let offsets = &self.config.phase_offsets;
        self.measure(&self.gate_output(offsets)?, setting, offsets)
    }

    /// Pattern probabilities for each Pauli setting (letters over the
    /// measured qubits, in order).
    pub fn probability_table(&self, settings: &[PauliString], offsets: &[f64]) -> Result<ProbabilityTable> {
        let out = self.gate_output(offsets)?;
        let mut table = ProbabilityTable::new(self.qubits.len())?;
        for s in settings {
            let dist = self.measure(&out, &self.full_setting(s)?, offsets)?;
            table.insert(&s.setting(), dist.probabilities)?;
        }
        Ok(table)
    }

    /// Expands a setting on the measured qubits to all four stages.
    pub fn full_setting(&self, pauli: &PauliString) -> Result<AnalysisSetting> {
        if pauli.len() != self.qubits.len() {
            return Err(Error::InvalidArgument(format!("{pauli} does not match {} measured qubits", self.qubits.len())));
        }
        let mut letters = vec![crate::stabilizer::Pauli::Z; QUBITS];
        for (k, &q) in self.qubits.iter().enumerate() {
            letters[q] = pauli.letters()[k];
        }
        setting_for_pauli(&PauliString::new(letters, false))
    }

    /// Logical density matrix of the measured qubits after the frame,
    /// conditioned on exactly one photon per measured qubit. Internal labels
    /// and photons elsewhere are traced out. Returns `(ρ, probability)`.
    pub fn logical_state(&self) -> Result<(DMatrix<Complex64>, f64)> {
        let offsets = &self.config.phase_offsets;
        let mut state = self.gate_output(offsets)?;
        let frames = super::circuit::frame(self.config.rpeg);
        for &q in &self.qubits {
            state = apply_2x2(&state, &frames[q], [rail_mode(q, 0), rail_mode(q, 1)])?;
        }
        logical_density(&state, &self.qubits)
    }
}

/// Probability of every threshold-click pattern on the given qubits: pattern
/// `j` fires when the rail selected by its bit holds at least one photon on
/// every listed qubit. Other rails and modes are not observed.
pub fn pattern_probabilities(state: &FockState, qubits: &[usize]) -> Vec<f64> {
    let m = qubits.len();
    let d = state.space().internal_dim;
    let mut probs = vec![0.0; 1 << m];
    let mut patterns: Vec<usize> = Vec::with_capacity(1 << m);
    for (occ, amp) in state.sorted_terms() {
        let w = amp.norm_sqr();
        patterns.clear();
        patterns.push(0);
        for &q in qubits {
            let lit = |rail: usize| {
                let mode = rail_mode(q, rail);
                occ[mode * d..(mode + 1) * d].iter().any(|&n| n > 0)
            };
            let (r0, r1) = (lit(0), lit(1));
            let n = patterns.len();
            match (r0, r1) {
                (false, false) => {
                    patterns.clear();
                    break;
                }
                (true, false) => patterns.iter_mut().for_each(|p| *p <<= 1),
                (false, true) => patterns.iter_mut().for_each(|p| *p = (*p << 1) | 1),
                (true, true) => {
                    for i in 0..n {
                        let p = patterns[i] << 1;
                        patterns[i] = p;
                        patterns.push(p | 1);
                    }
                }
            }
        }
        for &p in &patterns {
            probs[p] += w;
        }
    }
    probs
}

fn logical_density(state: &FockState, qubits: &[usize]) -> Result<(DMatrix<Complex64>, f64)> {
    use std::collections::BTreeMap;
    let d = state.space().internal_dim;
    let m = qubits.len();
    let mut branches: BTreeMap<Vec<u8>, StateVector> = BTreeMap::new();
    for (occ, amp) in state.sorted_terms() {
        let mut env = occ.to_vec();
        let mut index = 0usize;
        let mut ok = true;
        for &q in qubits {
            let r0 = rail_mode(q, 0) * d;
            let r1 = rail_mode(q, 1) * d;
            let n0: u8 = occ[r0..r0 + d].iter().sum();
            let n1: u8 = occ[r1..r1 + d].iter().sum();
            if n0 + n1 != 1 {
                ok = false;
                break;
            }
            index = (index << 1) | n1 as usize;
            // keep the internal label, forget the rail
            for l in 0..d {
                env[r0 + l] += env[r1 + l];
                env[r1 + l] = 0;
            }
        }
        if ok {
            branches.entry(env).or_insert_with(|| vec![Complex64::new(0.0, 0.0); 1 << m])[index] += amp;
        }
    }
    let mut rho = DMatrix::<Complex64>::zeros(1 << m, 1 << m);
    for v in branches.values() {
        let col = nalgebra::DVector::from_column_slice(v);
        rho += &col * col.adjoint();
    }
    let p = rho.trace().re;
    if p <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok((rho / Complex64::new(p, 0.0), p))
}

/// `<ψ|ρ|ψ>` for a normalized target vector.
pub fn state_fidelity(rho: &DMatrix<Complex64>, target: &[Complex64]) -> f64 {
    let v = nalgebra::DVector::from_column_slice(target);
    (v.adjoint() * rho * &v)[(0, 0)].re
}

/// Full outcome distribution of a configuration on all four qubits.
pub fn simulate(config: &DeviceConfig) -> Result<OutcomeDistribution> {
    Device::new(config)?.distribution(&config.setting())
}

/// Like [`simulate`] but forming coincidences on a subset of qubits.
pub fn simulate_subset(config: &DeviceConfig, qubits: &[usize]) -> Result<OutcomeDistribution> {
    Device::for_qubits(config, qubits)?.distribution(&config.setting())
}

/// Probability that one photon per qubit leaves the gate given one photon
/// per qubit entering it, for ideal first-order sources.
pub fn gate_success_probability(mode: RpegMode) -> Result<f64> {
    let config = DeviceConfig::ideal(mode, 0.03)?;
    let device = Device::new(&config)?;
    let one_each = |c: &[usize]| (0..QUBITS).all(|q| c[rail_mode(q, 0)] + c[rail_mode(q, 1)] == 1);
    let before = device.input.probability_where(one_each);
    let after = device.gate_output(&[])?.probability_where(one_each);
    Ok(after / before)
}

/// Postselected two-qubit action of the gate on qubits 1 and 2:
/// entry `(out, in)` is the amplitude for logical `in -> out`.
pub fn gate_logical_matrix(mode: RpegMode) -> Result<DMatrix<Complex64>> {
    let space = FockSpace::new(MODES, 1, 2)?;
    let mut out = DMatrix::zeros(4, 4);
    for input in 0..4usize {
        let mut counts = vec![0usize; MODES];
        counts[rail_mode(0, input >> 1)] = 1;
        counts[rail_mode(1, input & 1)] = 1;
        let mut state = FockState::number_state(space, &counts)?;
        for (u, modes) in gate_elements(mode, &[]) {
            state = state.apply_passive(&u, &modes)?;
        }
        for o in 0..4usize {
            let mut c = vec![0usize; MODES];
            c[rail_mode(0, o >> 1)] = 1;
            c[rail_mode(1, o & 1)] = 1;
            out[(o, input)] = state.amplitude_of_counts(&c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::QubitAnalysis;
    use crate::stabilizer::{ideal_state_vector, Graph, Pauli};

    fn z_setting() -> AnalysisSetting {
        [QubitAnalysis::for_pauli(Pauli::Z); QUBITS]
    }

    #[test]
    fn gate_success_probabilities() {
        assert!((gate_success_probability(RpegMode::Fusion).unwrap() - 0.5).abs() < 1e-9);
        assert!((gate_success_probability(RpegMode::Cz).unwrap() - 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn ideal_states_match_graphs() {
        for (mode, graph) in [(RpegMode::Fusion, Graph::star4()), (RpegMode::Cz, Graph::line4())] {
            let cfg = DeviceConfig::ideal(mode, 0.03).unwrap();
            let (rho, _) = Device::new(&cfg).unwrap().logical_state().unwrap();
            let f = state_fidelity(&rho, &ideal_state_vector(&graph).unwrap());
            assert!((f - 1.0).abs() < 1e-9, "{mode:?}: {f}");
        }
    }

    #[test]
    fn fusion_z_basis_is_ghz_like() {
        let cfg = DeviceConfig::ideal(RpegMode::Fusion, 0.03).unwrap();
        // Z on every qubit after the frame: undo the Hadamards
        let mut s = z_setting();
        for q in 0..3 {
            s[q] = QubitAnalysis::for_pauli(Pauli::X);
        }
        let d = Device::new(&cfg).unwrap().distribution(&s).unwrap();
        let c = d.conditioned();
        assert!((c[0] - 0.5).abs() < 1e-9 && (c[15] - 0.5).abs() < 1e-9, "{c:?}");
    }

    #[test]
    fn cz_on_zero_zero_has_no_phase() {
        let g = gate_logical_matrix(RpegMode::Cz).unwrap();
        let (a00, a11) = (g[(0, 0)], g[(3, 3)]);
        assert!((a00.norm_sqr() - 1.0 / 9.0).abs() < 1e-12);
        // relative to |00> the |11> branch carries CZ·Z2 = +1
        assert!((a11 / a00 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((g[(1, 1)] / a00 + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(g[(1, 0)].norm() < 1e-12);
    }

    #[test]
    fn bell_pairs_pass_through() {
        let cfg = DeviceConfig::ideal(RpegMode::Passthrough, 0.03).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let target: Vec<Complex64> = [h, 0.0, 0.0, h].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for qubits in [[0, 2], [1, 3]] {
            let (rho, _) = Device::for_qubits(&cfg, &qubits).unwrap().logical_state().unwrap();
            assert!((state_fidelity(&rho, &target) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn distribution_sums_to_postselection() {
        let cfg = DeviceConfig::ideal(RpegMode::Cz, 0.03).unwrap();
        let device = Device::new(&cfg).unwrap();
        let (_, p) = device.logical_state().unwrap();
        let out = device.gate_output(&[]).unwrap();
        for setting in [z_setting(), [QubitAnalysis::new(0.3, 1.2, 0); QUBITS]] {
            let d = device.measure(&out, &setting, &[]).unwrap();
            assert!((d.total() - p).abs() < 1e-12 * p);
        }
    }
}
