//! Fidelity of both states under each single-parameter error model.

use graphchip::error_models::{predict_distinguishability, predict_multiphoton, predict_phase_error, StateKind};

fn main() -> graphchip::Result<()> {
    for kind in [StateKind::S4, StateKind::L4] {
        println!("{kind:?}");
        for sigma in [1.0, 0.9, 0.82, 0.7] {
            println!("  sigma {sigma:<5} F = {:.4}", predict_distinguishability(kind, sigma)?.fidelity);
        }
        for p in [0.01, 0.036, 0.06] {
            println!("  p     {p:<5} F = {:.4}", predict_multiphoton(kind, p)?.fidelity);
        }
        for delta in [0.05, 0.185, 0.3] {
            let pred = predict_phase_error(kind, delta, 300, 1)?;
            println!("  delta {delta:<5} F = {:.4} ± {:.4}", pred.fidelity, pred.fidelity_error);
        }
    }
    Ok(())
}
