use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use mopla::config::ScenarioConfig;
use mopla::diagnostics::Status;
use mopla::run::{execute, Subcommand};

/// Galerkin solver and diagnostics for the parabolic p-Laplacian on a moving domain.
///
/// Exit status: 0 when every enabled check passes, 2 when a check fails,
/// 1 on configuration or runtime errors.
#[derive(Parser)]
#[command(name = "mopla", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Integrate the Galerkin system and write the trajectory and identity series.
    Solve(Common),
    /// Solve and enforce the identity checks.
    Verify(Common),
    /// Randomized sweeps of the functional inequalities.
    Probes(Common),
    /// Manufactured-solution error study on the static unit interval.
    Mms(Common),
    /// Self-convergence against a reference basis size.
    Refine(Common),
    /// Continuous dependence on the initial datum.
    Stability(Common),
    /// Finite-difference validation of the domain motion.
    MotionCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Probe seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn split(self) -> (Subcommand, Common) {
        match self {
            Command::Solve(c) => (Subcommand::Solve, c),
            Command::Verify(c) => (Subcommand::Verify, c),
            Command::Probes(c) => (Subcommand::Probes, c),
            Command::Mms(c) => (Subcommand::Mms, c),
            Command::Refine(c) => (Subcommand::Refine, c),
            Command::Stability(c) => (Subcommand::Stability, c),
            Command::MotionCheck(c) => (Subcommand::MotionCheck, c),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (sub, args) = cli.command.split();
    let mut config = match ScenarioConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mopla: {e}");
            return ExitCode::from(1);
        }
    };
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("mopla-out").join(sub.name()));
    config.output_dir = Some(out.clone());

    let outcome = match execute(sub, &config, &out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("mopla {sub}: {e}");
            return ExitCode::from(1);
        }
    };
    for check in &outcome.report.checks {
        println!("{check}");
    }
    let failed: Vec<_> = outcome.report.checks.iter().filter(|c| c.status == Status::Fail).collect();
    println!("wrote {} files to {}", outcome.files.len(), out.display());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for c in failed {
            eprintln!("mopla {sub}: check failed: {} [{}]", c.formula, c.name);
        }
        ExitCode::from(outcome.exit_code() as u8)
    }
}
