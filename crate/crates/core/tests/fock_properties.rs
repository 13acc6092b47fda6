use graphchip::fock::{FockSpace, FockState, ModeUnitary};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random superposition of up to three number states with `photons` photons
/// spread over `modes` modes.
fn random_state(modes: usize, photons: usize, seed: u64) -> FockState {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = FockSpace::new(modes, 1, photons.max(1)).unwrap();
    let terms: Vec<(Vec<u8>, Complex64)> = (0..rng.random_range(1..=3))
        .map(|_| {
            let mut occ = vec![0u8; modes];
            for _ in 0..photons {
                occ[rng.random_range(0..modes)] += 1;
            }
            (occ, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        })
        .collect();
    FockState::from_terms(space, terms).unwrap()
}

fn haar(dim: usize, seed: u64) -> ModeUnitary {
    ModeUnitary::haar_random(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn max_difference(a: &FockState, b: &FockState) -> f64 {
    let one = a.sorted_terms().into_iter().map(|(k, v)| (v - b.amplitude(k)).norm());
    let two = b.sorted_terms().into_iter().map(|(k, v)| (v - a.amplitude(k)).norm());
    one.chain(two).fold(0.0, f64::max)
}

/// All occupation vectors of `n` photons in `modes` modes.
fn compositions(modes: usize, n: usize) -> Vec<Vec<usize>> {
    if modes == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|k| {
            compositions(modes - 1, n - k).into_iter().map(move |mut rest| {
                rest.insert(0, k);
                rest
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_evolution_preserves_norm(modes in 2usize..=8, photons in 1usize..=4, seed in any::<u64>()) {
        let s = random_state(modes, photons, seed);
        let all: Vec<usize> = (0..modes).collect();
        let out = s.apply_unitary(&haar(modes, seed ^ 1), &all).unwrap();
        prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn evolution_is_a_homomorphism(modes in 2usize..=5, photons in 1usize..=3, seed in any::<u64>()) {
        let s = random_state(modes, photons, seed);
        let (u, v) = (haar(modes, seed ^ 2), haar(modes, seed ^ 3));
        let all: Vec<usize> = (0..modes).collect();
        let joint = s.apply_unitary(&u.compose(&v), &all).unwrap();
        let stepwise = s.apply_unitary(&v, &all).unwrap().apply_unitary(&u, &all).unwrap();
        prop_assert!(max_difference(&joint, &stepwise) < 1e-9);
    }

    #[test]
    fn exact_patterns_partition_a_sector(modes in 2usize..=4, photons in 1usize..=3, seed in any::<u64>()) {
        let all: Vec<usize> = (0..modes).collect();
        let s = random_state(modes, photons, seed).apply_unitary(&haar(modes, seed), &all).unwrap();
        let total: f64 = compositions(modes, photons)
            .iter()
            .map(|c| {
                let pattern: Vec<(usize, usize)> = c.iter().copied().enumerate().collect();
                s.postselect(&pattern, false).unwrap().1
            })
            .sum();
        prop_assert!((total - s.photon_sector(photons).norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn single_photon_sector_is_the_matrix(modes in 2usize..=8, seed in any::<u64>()) {
        let u = haar(modes, seed);
        let space = FockSpace::new(modes, 1, 1).unwrap();
        let all: Vec<usize> = (0..modes).collect();
        for j in 0..modes {
            let mut counts = vec![0; modes];
            counts[j] = 1;
            let out = FockState::number_state(space, &counts).unwrap().apply_unitary(&u, &all).unwrap();
            for k in 0..modes {
                let mut at = vec![0; modes];
                at[k] = 1;
                prop_assert!((out.amplitude_of_counts(&at) - u.entry(k, j)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn identical_photons_never_coincide_on_a_balanced_coupler() {
    let space = FockSpace::new(2, 1, 2).unwrap();
    let out = FockState::number_state(space, &[1, 1])
        .unwrap()
        .apply_passive(&ModeUnitary::balanced(), &[0, 1])
        .unwrap();
    assert!(out.amplitude_of_counts(&[1, 1]).norm() < 1e-15);
    assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
}
