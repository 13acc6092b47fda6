use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphchip::device::{simulate, DeviceConfig, RpegMode};
use graphchip::error_models::FIRST_ORDER_P;
use graphchip::harness::{self, ExperimentKind, ExperimentSpec};
use graphchip::Result;

/// Simulate and analyse experiments on the four-photon graph-state chip.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Run file with a [device] or [preset] block and an [experiment] block.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $GRAPHCHIP_OUT_DIR or ./graphchip-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Infinite-count mode.
    #[arg(long, global = true)]
    exact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outcome distribution for the configured analysis setting.
    Sim,
    /// Heralded two-photon interference fringe.
    Hom,
    /// Stabilizer expectations and state fidelity.
    Stab,
    /// Mermin tests on the stabilizer data.
    Mermin,
    /// Measurement-based projection of qubits onto |0>.
    Project,
    /// Bell-pair stabilizers and CHSH.
    Bell,
    /// Grid posterior for one error-model parameter.
    Bayes,
    /// Phaseshifter calibration and crosstalk.
    Cal,
    /// Signal-photon loss budget.
    Loss,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Sim | Command::Stab => ExperimentKind::Stabilizers,
            Command::Hom => ExperimentKind::Hom,
            Command::Mermin => ExperimentKind::Mermin,
            Command::Project => ExperimentKind::Project,
            Command::Bell => ExperimentKind::Bell,
            Command::Bayes => ExperimentKind::Bayes,
            Command::Cal => ExperimentKind::Calibrate,
            Command::Loss => ExperimentKind::Loss,
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let kind = cli.command.kind();
    let mut spec = match &cli.config {
        Some(path) => ExperimentSpec::load(path, Some(kind))?,
        None => ExperimentSpec::new(kind, DeviceConfig::ideal(RpegMode::Fusion, FIRST_ORDER_P)?)?,
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    spec.exact |= cli.exact;
    spec.validate()?;
    let out = cli.out.clone().unwrap_or_else(harness::default_out_dir);
    std::fs::create_dir_all(&out)?;

    if let Command::Sim = cli.command {
        let dist = simulate(&spec.device)?;
        let path = out.join("distribution.csv");
        harness::write_distribution_csv(BufWriter::new(File::create(&path)?), &dist)?;
        println!("fourfold probability = {:.6e}", dist.total());
        println!("wrote {}", path.display());
        return Ok(());
    }

    let report = harness::run(&spec)?;
    for q in &report.quantities {
        match q.error {
            Some(e) => println!("{} = {} ± {}", q.name, num(q.value), num(e)),
            None => println!("{} = {}", q.name, num(q.value)),
        }
    }
    for path in harness::export(&report, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
