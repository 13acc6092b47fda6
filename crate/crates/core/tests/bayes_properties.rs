use graphchip::bayes::{
    likelihood, model_tables, posterior, sample_multinomial, GridModel, LikelihoodMethod, ModelOptions, ParameterGrid,
};
use graphchip::error_models::{predict_distinguishability, ErrorModel, StateKind};
use graphchip::stabilizer::CountsTable;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn counts_at(sigma: f64, per_setting: u64, seed: u64) -> CountsTable {
    let pred = predict_distinguishability(StateKind::S4, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = CountsTable::new(4).unwrap();
    for (s, row) in pred.probabilities.iter() {
        t.insert(s, sample_multinomial(per_setting, row, &mut rng).unwrap()).unwrap();
    }
    t
}

fn scaled(t: &CountsTable, k: u64) -> CountsTable {
    let mut out = CountsTable::new(t.qubits()).unwrap();
    for (s, row) in t.iter() {
        out.insert(s, row.iter().map(|c| c * k).collect()).unwrap();
    }
    out
}

fn model(grid: &ParameterGrid) -> GridModel {
    model_tables(StateKind::S4, grid, ModelOptions::default()).unwrap()
}

#[test]
fn large_samples_peak_at_the_truth() {
    let grid = ParameterGrid::uniform(ErrorModel::Sigma, 0.7, 0.95, 0.01).unwrap();
    let data = counts_at(0.82, 5000, 1);
    let ll = likelihood(&model(&grid), &data, LikelihoodMethod::Multinomial).unwrap();
    let best = ll.values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!((grid.values()[best] - 0.82).abs() < 0.015);
}

#[test]
fn doubling_counts_sharpens_the_posterior() {
    let grid = ParameterGrid::default_for(ErrorModel::Sigma);
    let m = model(&grid);
    let data = counts_at(0.82, 176, 2);
    let std = |t: &CountsTable| {
        let ll = likelihood(&m, t, LikelihoodMethod::Multinomial).unwrap();
        posterior(&grid, &ll.values).unwrap().summary.std
    };
    let (one, two) = (std(&data), std(&scaled(&data, 2)));
    assert!(two < one, "{two} vs {one}");
}

#[test]
fn refining_the_grid_keeps_the_mean() {
    let coarse = ParameterGrid::uniform(ErrorModel::Sigma, 0.7, 0.95, 0.01).unwrap();
    let fine = ParameterGrid::uniform(ErrorModel::Sigma, 0.7, 0.95, 0.005).unwrap();
    let data = counts_at(0.82, 176, 3);
    let mean = |g: &ParameterGrid| {
        let ll = likelihood(&model(g), &data, LikelihoodMethod::Multinomial).unwrap();
        posterior(g, &ll.values).unwrap().summary.mean
    };
    assert!((mean(&coarse) - mean(&fine)).abs() < 0.01);
}

#[test]
fn two_std_intervals_are_calibrated() {
    let grid = ParameterGrid::default_for(ErrorModel::Sigma);
    let m = model(&grid);
    for truth in [0.75, 0.9] {
        let covered = (0..20)
            .filter(|&seed| {
                let ll = likelihood(&m, &counts_at(truth, 176, 40 + seed), LikelihoodMethod::Multinomial).unwrap();
                let s = posterior(&grid, &ll.values).unwrap().summary;
                (s.mean - truth).abs() <= 2.0 * s.std
            })
            .count();
        assert!(covered >= 18, "truth {truth}: {covered}/20");
    }
}

#[test]
fn sampled_frequency_likelihood_agrees_roughly() {
    let grid = ParameterGrid::uniform(ErrorModel::Sigma, 0.7, 0.95, 0.025).unwrap();
    let m = model(&grid);
    let data = counts_at(0.82, 400, 4);
    let method = LikelihoodMethod::SampledFrequency { samples: 400, bin_width: 0.05, seed: 9 };
    let ll = likelihood(&m, &data, method).unwrap();
    let s = posterior(&grid, &ll.values).unwrap().summary;
    assert!((s.raw_mean - 0.82).abs() < 0.06, "{s:?}");
}
