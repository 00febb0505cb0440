use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use irsuav::deployment::Strategy;
use irsuav::report::{run_bundle, write_bundle, ResultBundle, RunResult, TrajectoryOverrides};
use irsuav::scenario::{load_scenario, scenario_digest, Scenario};
use irsuav::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "irsuav", version, about = "IRS-assisted UAV network experiments")]
struct Cli {
    /// Suppress the run summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum-time UAV data collection trajectory.
    Trajopt {
        scenario: PathBuf,
        /// Per-node average rate target, bps/Hz.
        #[arg(long)]
        rate_target: Option<f64>,
        /// Slot length, seconds.
        #[arg(long)]
        slot_duration: Option<f64>,
        /// Longest mission time searched, seconds.
        #[arg(long)]
        max_time: Option<f64>,
        #[arg(long, default_value = "./out")]
        out: PathBuf,
    },
    /// IRS deployment strategies under an element budget.
    Deploy {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::All)]
        strategies: StrategyArg,
        #[arg(long, default_value = "./out")]
        out: PathBuf,
    },
    /// Parse and validate a scenario file.
    Validate { scenario: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    User,
    Bs,
    Hybrid,
    All,
}

impl StrategyArg {
    fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyArg::User => vec![Strategy::UserSideOnly],
            StrategyArg::Bs => vec![Strategy::BsSideOnly],
            StrategyArg::Hybrid => vec![Strategy::Hybrid],
            StrategyArg::All => Strategy::ALL.to_vec(),
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn run_failure(e: Error) -> Failure {
    let code = match e {
        Error::Config(_) | Error::Validation { .. } | Error::Parse(_) => EXIT_USAGE,
        Error::Domain(_) | Error::Io(_) => EXIT_INTERNAL,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn load(path: &Path) -> Result<(Scenario<f64>, String), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let scenario = load_scenario(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok((scenario, scenario_digest(&bytes)))
}

fn print_summary(bundle: &ResultBundle<f64>, written: &[PathBuf]) {
    match &bundle.result {
        RunResult::Trajectory(o) => {
            let report = |label: &str, m: &irsuav::Mission| {
                println!(
                    "{label}: mission_time={} s min_rate={} bps/Hz feasible={} converged={}",
                    m.mission_time, m.achieved_min_rate, m.feasible, m.converged
                );
            };
            report("with_irs", &o.with_irs);
            if let Some(base) = &o.without_irs {
                report("without_irs", base);
            }
        }
        RunResult::Deployment(o) => {
            for r in &o.results {
                println!(
                    "{}: n1={} n2={} altitude={} m min_rate={} bps/Hz",
                    r.strategy.label(),
                    r.plan.n1,
                    r.plan.n2,
                    r.plan.uirs_altitude,
                    r.min_rate
                );
            }
        }
    }
    for p in written {
        println!("wrote {}", p.display());
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { scenario } => {
            let (s, digest) = load(&scenario)?;
            if !cli.quiet {
                println!(
                    "{}: ok ({} experiment, sha256 {digest})",
                    scenario.display(),
                    s.experiment.kind()
                );
            }
            Ok(())
        }
        Command::Trajopt {
            scenario,
            rate_target,
            slot_duration,
            max_time,
            out,
        } => {
            let (mut s, digest) = load(&scenario)?;
            if s.trajectory_experiment().is_err() {
                return Err(Failure::usage(format!(
                    "{}: trajopt needs a trajectory experiment, found {}",
                    scenario.display(),
                    s.experiment.kind()
                )));
            }
            let overrides = TrajectoryOverrides {
                rate_target,
                slot_duration,
                max_time,
            };
            if !overrides.is_empty() {
                overrides.apply(&mut s).map_err(|e| Failure::usage(e.to_string()))?;
            }
            let bundle = run_bundle(&s, &digest, None).map_err(run_failure)?;
            let written = write_bundle(&out, &bundle).map_err(run_failure)?;
            if !cli.quiet {
                print_summary(&bundle, &written);
            }
            match &bundle.result {
                RunResult::Trajectory(o) if !o.feasible() => Err(Failure {
                    code: EXIT_INFEASIBLE,
                    message: format!(
                        "rate target {} not reachable within {} s",
                        o.rate_target, o.with_irs.mission_time
                    ),
                }),
                _ => Ok(()),
            }
        }
        Command::Deploy {
            scenario,
            strategies,
            out,
        } => {
            let (s, digest) = load(&scenario)?;
            if s.deployment_experiment().is_err() {
                return Err(Failure::usage(format!(
                    "{}: deploy needs a deployment experiment, found {}",
                    scenario.display(),
                    s.experiment.kind()
                )));
            }
            let bundle = run_bundle(&s, &digest, Some(&strategies.strategies())).map_err(run_failure)?;
            let written = write_bundle(&out, &bundle).map_err(run_failure)?;
            if !cli.quiet {
                print_summary(&bundle, &written);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
