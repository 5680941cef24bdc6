use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hkdelay::error::Result;
use hkdelay::limit::limit_study;
use hkdelay::runner::{run, Overrides};
use hkdelay::scenario::Scenario;
use hkdelay::stability::{stability_study, PNorm, PerturbationKind};

/// Simulation and verification laboratory for time-delayed
/// leader-follower Hegselmann-Krause opinion dynamics.
#[derive(Parser)]
#[command(name = "hkdelay", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario, check the consensus certificate, and write
    /// the CSV series and JSON report.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the scenario's output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the random-history seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the integration step.
        #[arg(long)]
        step: Option<f64>,
        /// Override the end time.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Perturb the initial data at three epsilon levels and report
    /// Wasserstein amplification ratios.
    Stability {
        /// Scenario JSON file (mode stability_case1 or stability_case2).
        #[arg(long)]
        config: PathBuf,
        /// Base perturbation size; the sweep runs eps, 2 eps, 4 eps.
        #[arg(long)]
        epsilon: f64,
        /// Wasserstein order: 1, 2, or inf.
        #[arg(long, default_value = "2")]
        p: PNorm,
        /// Perturbation shape: random per-agent offsets or a uniform
        /// translation.
        #[arg(long, default_value = "random")]
        perturbation: PerturbationKind,
    },
    /// Double the follower count repeatedly and report Wasserstein
    /// distances between consecutive refinements.
    Limit {
        /// Scenario JSON file (mode limit_study, random histories).
        #[arg(long)]
        config: PathBuf,
        /// Follower count at the coarsest level.
        #[arg(long)]
        n0: usize,
        /// Number of refinement levels (>= 2).
        #[arg(long)]
        levels: usize,
    },
}

/// Exit code 2 flags a failed certificate or study check; 1 is reserved
/// for configuration or runtime errors.
const CHECK_FAILED: u8 = 2;

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run { config, out, seed, step, t_end } => {
            let scenario = Scenario::load(&config)?;
            let out_dir = out
                .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let outcome = run(&scenario, &out_dir, &Overrides { seed, step, t_end })?;
            println!(
                "wrote {} and {}",
                outcome.csv_path.display(),
                outcome.json_path.display()
            );
            if outcome.certificate_passed {
                println!("certificate: PASS");
                Ok(0)
            } else {
                println!("certificate: FAIL");
                Ok(CHECK_FAILED)
            }
        }
        Command::Stability { config, epsilon, p, perturbation } => {
            let scenario = Scenario::load(&config)?;
            let report = stability_study(&scenario, epsilon, p, perturbation)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(hkdelay::Error::Json)?);
            Ok(if report.passed { 0 } else { CHECK_FAILED })
        }
        Command::Limit { config, n0, levels } => {
            let scenario = Scenario::load(&config)?;
            let report = limit_study(&scenario, n0, levels)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(hkdelay::Error::Json)?);
            Ok(if report.passed { 0 } else { CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
