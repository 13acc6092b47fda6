use graphchip::error_models::{predict_distinguishability, predict_multiphoton, predict_phase_error, StateKind};

#[test]
fn ideal_parameters_give_unit_fidelity() {
    for kind in [StateKind::S4, StateKind::L4] {
        assert!((predict_distinguishability(kind, 1.0).unwrap().fidelity - 1.0).abs() < 1e-6);
        assert!((predict_phase_error(kind, 0.0, 50, 1).unwrap().fidelity - 1.0).abs() < 1e-6);
        assert!((predict_multiphoton(kind, 1e-5).unwrap().fidelity - 1.0).abs() < 1e-2);
    }
}

#[test]
fn monte_carlo_is_deterministic_under_a_seed() {
    let a = predict_phase_error(StateKind::L4, 0.2, 200, 17).unwrap();
    let b = predict_phase_error(StateKind::L4, 0.2, 200, 17).unwrap();
    assert_eq!(a.expectations, b.expectations);
    assert_eq!(a.fidelity.to_bits(), b.fidelity.to_bits());
    let c = predict_phase_error(StateKind::L4, 0.2, 200, 18).unwrap();
    assert_ne!(a.fidelity, c.fidelity);
}

/// The reported standard error falls as `1/√n`, and matches the scatter
/// between independent seeds.
#[test]
fn monte_carlo_error_scales_as_inverse_root_n() {
    let se: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&n| predict_phase_error(StateKind::S4, 0.185, n, 3).unwrap().fidelity_error)
        .collect();
    for (w, ratio) in se.windows(2).zip([10f64.sqrt(); 2]) {
        let r = w[0] / w[1];
        assert!((r / ratio - 1.0).abs() < 0.25, "SE ratio {r} vs {ratio}");
    }

    let runs: Vec<f64> = (0..24).map(|seed| predict_phase_error(StateKind::S4, 0.185, 100, 100 + seed).unwrap().fidelity).collect();
    let mean = runs.iter().sum::<f64>() / runs.len() as f64;
    let spread = (runs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (runs.len() - 1) as f64).sqrt();
    // sampling error of a standard deviation from 24 runs is about 15%
    assert!((spread / se[0] - 1.0).abs() < 0.5, "scatter {spread} vs reported {}", se[0]);
}
