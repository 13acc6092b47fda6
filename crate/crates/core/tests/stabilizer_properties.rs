use graphchip::error_models::StateKind;
use graphchip::stabilizer::{
    apply_pauli, fidelity, generators_from_graph, ideal_state_vector, inner, mermin_three_setting,
    project_qubits_zero, pure_fidelity, Estimate, Graph, Pauli, PauliString,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1usize..=6).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
        let m = pairs.len();
        proptest::collection::vec(any::<bool>(), m).prop_map(move |keep| {
            let labels: Vec<usize> = (1..=n).collect();
            let edges: Vec<(usize, usize)> =
                pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| *e).collect();
            Graph::new(&labels, &edges).unwrap()
        })
    })
}

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (proptest::collection::vec(0u8..4, n), any::<bool>()).prop_map(|(letters, neg)| {
        let letters = letters
            .into_iter()
            .map(|k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize])
            .collect();
        PauliString::new(letters, neg)
    })
}

/// Dense matrix of a Pauli string, qubit 0 as the most significant factor.
fn dense(p: &PauliString) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::new(p.sign(), 0.0)]];
    for letter in p.letters() {
        let f = letter.matrix();
        let d = m.len();
        let mut next = vec![vec![Complex64::new(0.0, 0.0); 2 * d]; 2 * d];
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        next[2 * i + a][2 * j + b] = v * f[a][b];
                    }
                }
            }
        }
        m = next;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_elements_stabilize_the_graph_state(graph in arb_graph()) {
        let state = ideal_state_vector(&graph).unwrap();
        let group = generators_from_graph(&graph).unwrap();
        for e in group.elements() {
            let moved = apply_pauli(&state, &e.pauli);
            let diff = moved.iter().zip(&state).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-10, "{} moves the state", e.pauli);
        }
    }

    #[test]
    fn group_is_closed(graph in arb_graph()) {
        let group = generators_from_graph(&graph).unwrap();
        for a in group.elements() {
            for b in group.elements() {
                let product = a.pauli.mul(&b.pauli);
                prop_assert_eq!(group.find(&product).map(|e| &e.pauli), Some(&product));
            }
        }
    }

    #[test]
    fn outcome_signs_match_the_matrix_diagonal(p in (1usize..=4).prop_flat_map(arb_pauli)) {
        prop_assume!(p.is_hermitian());
        // rotate to the Z basis: the eigenvalue of outcome j is the diagonal
        // entry of the Pauli with every non-identity letter replaced by Z
        let z_letters = p.letters().iter().map(|&l| if l == Pauli::I { Pauli::I } else { Pauli::Z }).collect();
        let diag = dense(&PauliString::new(z_letters, p.sign() < 0.0));
        for (j, row) in diag.iter().enumerate() {
            prop_assert!((row[j].re - p.eigenvalue(j as u32)).abs() < 1e-12);
        }
    }

    #[test]
    fn three_setting_sum_is_sixteen_fidelities(values in proptest::collection::vec(-1.0f64..=1.0, 15)) {
        let group = StateKind::S4.group();
        let mut est = vec![Estimate::exact(1.0)];
        est.extend(values.iter().map(|&v| Estimate { value: v, error: 0.01 }));
        let m3 = mermin_three_setting(&group, &est).unwrap();
        prop_assert!((m3.value - 16.0 * fidelity(&est).value).abs() < 1e-12);
    }
}

#[test]
fn stored_pauli_products_match_matrices() {
    let group = StateKind::L4.group();
    for a in group.elements() {
        for b in group.elements() {
            let (ma, mb, mab) = (dense(&a.pauli), dense(&b.pauli), dense(&a.pauli.mul(&b.pauli)));
            for i in 0..16 {
                for j in 0..16 {
                    let prod: Complex64 = (0..16).map(|k| ma[i][k] * mb[k][j]).sum();
                    assert!((prod - mab[i][j]).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn deleting_projected_vertices_matches_the_state_vector() {
    for graph in [Graph::star4(), Graph::line4()] {
        let full = ideal_state_vector(&graph).unwrap();
        let labels = graph.labels().to_vec();
        let mut removals: Vec<Vec<usize>> = labels.iter().map(|&l| vec![l]).collect();
        for (i, &a) in labels.iter().enumerate() {
            for &b in &labels[i + 1..] {
                removals.push(vec![a, b]);
            }
        }
        for removed in removals {
            let qubits: Vec<usize> = removed.iter().map(|l| graph.index_of(*l).unwrap()).collect();
            let projected = project_qubits_zero(&full, 4, &qubits);
            let reduced = ideal_state_vector(&graph.project_zero(&removed).unwrap()).unwrap();
            assert!((pure_fidelity(&projected, &reduced) - 1.0).abs() < 1e-10, "{removed:?}");
            assert!((inner(&projected, &projected).re - 1.0 / (1 << removed.len()) as f64).abs() < 1e-12);
        }
    }
}
