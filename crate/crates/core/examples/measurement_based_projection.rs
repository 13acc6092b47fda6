//! Projecting star-state qubits onto |0> deletes them from the graph.

use graphchip::device::{DeviceConfig, RpegMode};
use graphchip::harness::{run, ExperimentKind, ExperimentSpec};
use graphchip::stabilizer::Graph;

fn main() -> graphchip::Result<()> {
    let star = Graph::star4();
    for removed in [vec![3], vec![2, 3], vec![1, 2]] {
        let reduced = star.project_zero(&removed)?;
        let mut spec = ExperimentSpec::new(ExperimentKind::Project, DeviceConfig::ideal(RpegMode::Fusion, 0.03)?)?;
        spec.project = removed.clone();
        spec.exact = true;
        let exact = run(&spec)?;
        spec.exact = false;
        spec.seed = 5;
        let sampled = run(&spec)?;
        let f = sampled.quantity("fidelity").expect("fidelity");
        println!(
            "remove {:?}: edges {:?}, rule check {:.6}, exact F {:.6}, sampled F {:.3} ± {:.3}",
            removed,
            reduced.edge_labels(),
            exact.quantity("graph_rule_fidelity").expect("rule").value,
            exact.quantity("fidelity").expect("fidelity").value,
            f.value,
            f.error.unwrap_or(0.0)
        );
    }
    Ok(())
}
