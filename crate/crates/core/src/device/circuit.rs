//! Passive optics of the gate and the analysis stages.
//!
//! Interferometer convention: `MZI(θ) = C·diag(e^{iθ}, 1)·C` with the
//! symmetric coupler `C = [[1, i], [i, 1]]/√2`, which evaluates to
//! `i e^{iθ/2} [[sin θ/2, cos θ/2], [cos θ/2, -sin θ/2]]`. `θ = 0` swaps the
//! two inputs, `θ = π` leaves them in place.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::config::{analysis_site, gate_site, rail_mode, AnalysisSetting, QubitAnalysis, RpegMode, MODES, QUBITS};
use crate::fock::ModeUnitary;

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Internal phase giving bar-state probability 1/3.
pub fn third_splitter_phase() -> f64 {
    2.0 * (1.0f64 / 3.0).sqrt().asin()
}

/// Gate interferometer `k` with the modes it couples: 0 joins the `|1>`
/// rails of qubits 1 and 2, 1 and 2 couple the `|0>` rails to loss ports.
pub fn gate_modes(k: usize) -> [usize; 2] {
    match k {
        0 => [rail_mode(0, 1), rail_mode(1, 1)],
        1 => [rail_mode(0, 0), 2 * QUBITS],
        _ => [rail_mode(1, 0), 2 * QUBITS + 1],
    }
}

/// Nominal internal phases of the three gate interferometers.
pub fn gate_phases(mode: RpegMode) -> [f64; 3] {
    match mode {
        RpegMode::Fusion => [0.0, PI, PI],
        RpegMode::Cz => [third_splitter_phase(); 3],
        RpegMode::Passthrough => [PI, PI, PI],
    }
}

/// `MZI(θ)·diag(e^{iφ}, 1)`.
pub fn mzi_with_input_phase(theta: f64, phi: f64) -> ModeUnitary {
    ModeUnitary::mzi(theta).compose(&ModeUnitary::diagonal(&[phi, 0.0]))
}

/// The three gate elements with their modes, including phase offsets.
pub fn gate_elements(mode: RpegMode, offsets: &[f64]) -> Vec<(ModeUnitary, [usize; 2])> {
    let at = |i: usize| offsets.get(i).copied().unwrap_or(0.0);
    gate_phases(mode)
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let u = mzi_with_input_phase(theta + at(gate_site(k, false)), at(gate_site(k, true)));
            (u, gate_modes(k))
        })
        .collect()
}

/// Full-device matrix of the gate (identity on qubits 3 and 4).
pub fn rpeg_unitary(mode: RpegMode) -> ModeUnitary {
    embed(&gate_elements(mode, &[]))
}

fn embed(blocks: &[(ModeUnitary, [usize; 2])]) -> ModeUnitary {
    let mut total = ModeUnitary::identity(MODES);
    for (u, [a, b]) in blocks {
        let mut m = DMatrix::<Complex64>::identity(MODES, MODES);
        m[(*a, *a)] = u.entry(0, 0);
        m[(*a, *b)] = u.entry(0, 1);
        m[(*b, *a)] = u.entry(1, 0);
        m[(*b, *b)] = u.entry(1, 1);
        total = ModeUnitary::new(m).expect("embedded block is unitary").compose(&total);
    }
    total
}

/// Per-qubit local frame relating the rails after the gate to the logical
/// basis of the target state.
pub fn frame(mode: RpegMode) -> [Matrix2; QUBITS] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let hadamard = [[h, h], [h, -h]];
    let z = [[ONE, ZERO], [ZERO, -ONE]];
    let id = [[ONE, ZERO], [ZERO, ONE]];
    match mode {
        RpegMode::Fusion => [hadamard, hadamard, hadamard, z],
        RpegMode::Cz => [id, z, hadamard, hadamard],
        RpegMode::Passthrough => [id, z, id, id],
    }
}

pub fn mul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Two-rail analysis stage: Z phase on rail 0, then an interferometer set to
/// `π - θ`, then a fixed `π` phase on rail 1. Up to a global phase this is
/// `[[cos θ/2, sin θ/2], [-sin θ/2, cos θ/2]]·diag(e^{iφ}, 1)`, so rail 0
/// reports the `+1` eigenvalue of `cos θ Z + sin θ (cos φ X - sin φ Y)`.
pub fn analysis_matrix(a: &QubitAnalysis, phi_offset: f64, theta_offset: f64) -> Matrix2 {
    let u = ModeUnitary::diagonal(&[0.0, PI])
        .compose(&mzi_with_input_phase(PI - a.theta_y + theta_offset, a.phi_z + phi_offset));
    [[u.entry(0, 0), u.entry(0, 1)], [u.entry(1, 0), u.entry(1, 1)]]
}

/// Analysis matrix of qubit `q` including the device frame and offsets.
pub fn measurement_matrix(mode: RpegMode, setting: &AnalysisSetting, q: usize, offsets: &[f64]) -> Matrix2 {
    let at = |i: usize| offsets.get(i).copied().unwrap_or(0.0);
    let a = analysis_matrix(&setting[q], at(analysis_site(q, false)), at(analysis_site(q, true)));
    mul2(&a, &frame(mode)[q])
}

/// Block-diagonal matrix of the four analysis stages on the qubit rails.
pub fn analysis_unitary(setting: &AnalysisSetting) -> ModeUnitary {
    let blocks: Vec<(ModeUnitary, [usize; 2])> = (0..QUBITS)
        .map(|q| {
            let m = analysis_matrix(&setting[q], 0.0, 0.0);
            let u = ModeUnitary::from_row_slice(2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
                .expect("analysis stage is unitary");
            (u, [rail_mode(q, 0), rail_mode(q, 1)])
        })
        .collect();
    embed(&blocks)
}
