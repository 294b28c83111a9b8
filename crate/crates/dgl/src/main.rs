use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dgl::ExperimentKind;

#[derive(Parser)]
#[command(name = "dgl", version, about = "Dirac gauge laboratory experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the sea and check unitarity, charge, continuity and dual routes.
    Evolve(RunArgs),
    /// Compare a potential with its gauge transform.
    GaugeCheck(RunArgs),
    /// Truncated Fock model: spectrum and the pure-gauge energy witness.
    CanonicalDemo(RunArgs),
    /// Projector, two-point and equation-of-motion identities.
    Identities(RunArgs),
    /// Gauge discrepancy under joint grid and time-step refinement.
    Convergence(RunArgs),
    /// Complete Fock evolution against the one-particle mode sum.
    CrossOracle(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` from the config, then `dgl-out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Evolve(a) => (ExperimentKind::Evolve, a),
        Command::GaugeCheck(a) => (ExperimentKind::GaugeCheck, a),
        Command::CanonicalDemo(a) => (ExperimentKind::CanonicalDemo, a),
        Command::Identities(a) => (ExperimentKind::Identities, a),
        Command::Convergence(a) => (ExperimentKind::Convergence, a),
        Command::CrossOracle(a) => (ExperimentKind::CrossOracle, a),
    };
    let run = dgl::execute(kind, &args.config, args.out.as_deref());
    if let Some(summary) = &run.summary {
        for row in &summary.checks {
            let verdict = match row.pass {
                Some(true) => "ok  ",
                Some(false) => "FAIL",
                None => "    ",
            };
            match row.tolerance {
                Some(tol) => eprintln!("{verdict} {:<44} {:>12.4e}  (tol {:e})", row.name, row.value, tol),
                None => eprintln!("{verdict} {:<44} {:>12.4e}", row.name, row.value),
            }
        }
    }
    if let Some(e) = &run.error {
        eprintln!("dgl {}: {e}", kind.name());
    }
    if let Some(dir) = &run.out_dir {
        eprintln!("artifacts in {}", dir.display());
    }
    ExitCode::from(run.exit_code as u8)
}
