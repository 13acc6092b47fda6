//! Runs an experiment from a run file, exports it and re-derives the
//! results from the written data.

use graphchip::harness::{export, import, run, ExperimentSpec};

const RUN_FILE: &str = r#"
[preset]
rpeg = "fusion"
sigma = 0.82

[experiment]
kind = "stabilizers"
seed = 7
"#;

fn main() -> graphchip::Result<()> {
    let spec = ExperimentSpec::from_toml_str(RUN_FILE, None)?;
    let report = run(&spec)?;
    let dir = std::env::temp_dir().join("graphchip-run-artifacts");
    for path in export(&report, &dir)? {
        println!("wrote {}", path.display());
    }
    let again = import(&dir)?;
    let f = again.quantity("fidelity").expect("fidelity");
    println!("re-derived F = {:.4} ± {:.4}, identical: {}", f.value, f.error.unwrap_or(0.0), again.quantities == report.quantities);
    println!("config hash {}", report.provenance.config_hash);
    Ok(())
}
