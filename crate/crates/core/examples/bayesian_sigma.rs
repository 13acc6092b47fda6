//! Recovers indistinguishability from finite stabilizer counts with a grid
//! posterior.

use graphchip::bayes::{estimate, ModelOptions, ParameterGrid};
use graphchip::device::{DeviceConfig, RpegMode};
use graphchip::error_models::{ErrorModel, StateKind};
use graphchip::harness::{run, ExperimentKind, ExperimentSpec};

fn main() -> graphchip::Result<()> {
    let truth = 0.82;
    let cfg = DeviceConfig::ideal(RpegMode::Fusion, 0.03)?.with_sigma(truth);
    let mut spec = ExperimentSpec::new(ExperimentKind::Stabilizers, cfg)?;
    spec.seed = 21;
    let report = run(&spec)?;
    let counts = report.data.counts.expect("sampled counts");
    println!("{} counts over {} settings", counts.grand_total(), counts.len());

    let grid = ParameterGrid::uniform(ErrorModel::Sigma, 0.6, 1.0, 0.005)?;
    let post = estimate(StateKind::S4, &grid, &counts, ModelOptions::default())?;
    let s = post.summary;
    println!("true sigma {truth}, posterior {:.4} ± {:.4} (MAP {:.3})", s.mean, s.std, s.map_estimate);
    Ok(())
}
