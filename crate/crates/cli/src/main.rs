use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wigprop_cli::{configure_threads, load_scenario, run, CliError, RunOptions};

/// Wigner phase-space propagation, influence phases, bath kernels and
/// the high-temperature Brownian motion limit, driven by JSON scenarios.
#[derive(Parser)]
#[command(name = "wigprop", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a Wigner state through a quadratic potential.
    Quad(RunArgs),
    /// Evaluate an influence phase on a path pair.
    Influence(RunArgs),
    /// Sample bath memory kernels A(t), R(t).
    Kernels(RunArgs),
    /// Run the high-temperature Caldeira-Leggett model.
    Cl(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON document.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Cross-check grid propagation against the Liouville oracle.
    #[arg(long)]
    oracle: bool,
    /// Seed override for Monte Carlo scenarios.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(expected_kind: &str, args: &RunArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    if scenario.kind() != expected_kind {
        return Err(CliError::Schema {
            field: "kind".into(),
            message: format!(
                "scenario kind is '{}', but the '{expected_kind}' subcommand was invoked",
                scenario.kind()
            ),
        });
    }
    let options = RunOptions {
        out_dir: args.out.clone(),
        oracle: args.oracle,
        seed: args.seed,
        base_dir: args
            .scenario
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    let report = run(&scenario, &options)?;
    println!(
        "{}",
        serde_json::json!({
            "report": options.out_dir.join("report.json").display().to_string(),
            "outputs": report.outputs.len(),
            "wall_time_s": report.wall_time_s,
        })
    );
    Ok(())
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Quad(args) => ("quad", args),
        Command::Influence(args) => ("influence", args),
        Command::Kernels(args) => ("kernels", args),
        Command::Cl(args) => ("cl", args),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
