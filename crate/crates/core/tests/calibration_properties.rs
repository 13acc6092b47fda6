use std::f64::consts::TAU;

use graphchip::calibration::{dial_phase, fit_fringe, loss_total, phase_at, FringeFit, IvFit};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noiseless_fringes_are_fit_exactly(
        a in 0.1f64..1.0,
        f in 10.0f64..100.0,
        phi in 0.0f64..TAU,
        c in 0.0f64..1.0,
    ) {
        // two to five periods over 80 samples
        let span = TAU * 3.5 / f;
        let samples: Vec<(f64, f64)> = (0..80)
            .map(|i| {
                let p = span * i as f64 / 79.0;
                (p, a * (f * p + phi).sin() + c)
            })
            .collect();
        let fit = fit_fringe(&samples).unwrap();
        prop_assert!(fit.rms < 1e-6, "{fit:?}");
        prop_assert!((fit.frequency - f).abs() < 1e-6 * f);
        prop_assert!((fit.amplitude - a).abs() < 1e-6);
    }

    #[test]
    fn dialled_voltages_hit_their_targets(
        f in 80.0f64..300.0,
        phi in 0.0f64..TAU,
        rho1 in 2e-3f64..5e-3,
        rho2 in 0.0f64..5e-5,
        target in 0.0f64..TAU,
    ) {
        let fringe = FringeFit { amplitude: 0.5, frequency: f, phase0: phi, offset: 0.5, rms: 0.0 };
        let iv = IvFit { rho1, rho2, rho3: 0.0 };
        let v = dial_phase(target, &fringe, &iv, (0.0, 10.0)).unwrap();
        let d = (phase_at(v, &fringe, &iv) - target).rem_euclid(TAU);
        prop_assert!(d.min(TAU - d) < 1e-6);
        // smallest solution: no lower voltage reaches the target
        let below = (0..200).map(|i| v * i as f64 / 200.0).all(|u| {
            let d = (phase_at(u, &fringe, &iv) - target).rem_euclid(TAU);
            d.min(TAU - d) > 1e-9 || (v - u) < 1e-6
        });
        prop_assert!(below);
    }

    #[test]
    fn loss_total_ignores_order(entries in proptest::collection::vec(0.0f64..10.0, 0..8)) {
        let forward = loss_total(entries.iter().map(|&d| ("x", d)));
        let backward = loss_total(entries.iter().rev().map(|&d| ("x", d)));
        prop_assert!((forward.total_db - backward.total_db).abs() < 1e-9);
    }
}
