//! Dense qubit state vectors used as an independent reference for the
//! stabilizer and device paths. Basis index bit `n-1-q` holds qubit `q`.

use num_complex::Complex64;

use super::graph::Graph;
use super::group::MAX_QUBITS;
use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};

pub type StateVector = Vec<Complex64>;

/// `|G> = Π_{(i,j) ∈ E} CZ_ij |+>^n`.
pub fn ideal_state_vector(graph: &Graph) -> Result<StateVector> {
    let n = graph.vertex_count();
    if n > MAX_QUBITS {
        return Err(Error::GraphTooLarge(n));
    }
    let dim = 1usize << n;
    let amp = 1.0 / (dim as f64).sqrt();
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    Ok((0..dim)
        .map(|b| {
            let parity = edges
                .iter()
                .filter(|&&(i, j)| bit(b, n, i) == 1 && bit(b, n, j) == 1)
                .count();
            Complex64::new(if parity % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect())
}

fn bit(index: usize, n: usize, qubit: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

pub fn apply_pauli(state: &[Complex64], pauli: &PauliString) -> StateVector {
    let n = pauli.len();
    assert_eq!(state.len(), 1 << n);
    let mut out = state.to_vec();
    for (q, &p) in pauli.letters().iter().enumerate() {
        if p == Pauli::I {
            continue;
        }
        out = apply_single(&out, n, q, &p.matrix());
    }
    let phase = Complex64::new(0.0, 1.0).powu(pauli.phase() as u32);
    out.iter().map(|a| a * phase).collect()
}

/// Applies a 2×2 matrix to one qubit.
pub fn apply_single(state: &[Complex64], n: usize, qubit: usize, m: &[[Complex64; 2]; 2]) -> StateVector {
    let stride = 1usize << (n - 1 - qubit);
    let mut out = state.to_vec();
    for b in 0..state.len() {
        if b & stride == 0 {
            let (a0, a1) = (state[b], state[b | stride]);
            out[b] = m[0][0] * a0 + m[0][1] * a1;
            out[b | stride] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
    out
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn expectation(state: &[Complex64], pauli: &PauliString) -> f64 {
    inner(state, &apply_pauli(state, pauli)).re
}

/// `|<a|b>|² / (<a|a><b|b>)`.
pub fn pure_fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    inner(a, b).norm_sqr() / (inner(a, a).re * inner(b, b).re)
}

/// Projects the listed qubits onto `|0>` and removes them, leaving an
/// unnormalized state on the remaining qubits (in their original order).
pub fn project_qubits_zero(state: &[Complex64], n: usize, qubits: &[usize]) -> StateVector {
    let keep: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
    let m = keep.len();
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << m];
    for (b, &a) in state.iter().enumerate() {
        if qubits.iter().any(|&q| bit(b, n, q) == 1) {
            continue;
        }
        let mut idx = 0usize;
        for &q in &keep {
            idx = (idx << 1) | bit(b, n, q);
        }
        out[idx] = a;
    }
    out
}
