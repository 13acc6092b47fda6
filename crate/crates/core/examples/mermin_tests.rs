//! Mermin tests from simulated stabilizer counts at the default rate.

use graphchip::device::{DeviceConfig, RpegMode};
use graphchip::harness::{run, ExperimentKind, ExperimentSpec};

fn main() -> graphchip::Result<()> {
    for (mode, sigma) in [(RpegMode::Fusion, 1.0), (RpegMode::Fusion, 0.82), (RpegMode::Cz, 0.82)] {
        let cfg = DeviceConfig::ideal(mode, 0.03)?.with_sigma(sigma);
        let mut spec = ExperimentSpec::new(ExperimentKind::Mermin, cfg)?;
        spec.seed = 11;
        let report = run(&spec)?;
        println!("{mode:?}, sigma = {sigma}");
        for q in &report.quantities {
            println!("  {:<24} {:>8.3} ± {:.3}", q.name, q.value, q.error.unwrap_or(0.0));
        }
    }
    Ok(())
}
