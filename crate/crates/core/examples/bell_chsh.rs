//! Bell pairs with the gate in pass-through: stabilizers and CHSH.

use graphchip::device::{DeviceConfig, RpegMode};
use graphchip::harness::{run, ExperimentKind, ExperimentSpec};

fn main() -> graphchip::Result<()> {
    for sigma in [1.0, 0.82] {
        let cfg = DeviceConfig::ideal(RpegMode::Passthrough, 0.03)?.with_sigma(sigma);
        let mut spec = ExperimentSpec::new(ExperimentKind::Bell, cfg)?;
        spec.seed = 2;
        let report = run(&spec)?;
        println!("sigma = {sigma}");
        for q in &report.quantities {
            println!("  {:<14} {:>7.4} ± {:.4}", q.name, q.value, q.error.unwrap_or(0.0));
        }
    }
    Ok(())
}
