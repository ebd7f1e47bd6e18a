use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use obsplan::commands::{self, parse_measures, ObjectiveArg, Outcome};
use obsplan::config::{self, ConfigError, ScenarioFile};
use obsplan_core::eval::{preset, CompareOptions, ScenarioConfig};
use obsplan_core::gramian::MeasureKind;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "obsplan",
    version,
    about = "Observability-aware trajectory planning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    config: Option<PathBuf>,
    /// Use a built-in scenario instead of a file.
    #[arg(long, value_parser = ["A", "B", "C", "a", "b", "c"])]
    preset: Option<String>,
    /// Output directory (default: runs/<command>-<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra randomly perturbed solver starts.
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one planning problem from the waypoint initialization.
    Plan {
        #[command(flatten)]
        common: Common,
        /// `cov`, `og:<measure>` or `sfim:<measure>`.
        #[arg(long, default_value = "cov")]
        objective: ObjectiveArg,
    },
    /// Initial path versus Gramian and covariance-trace optima.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "condition_number", value_parser = parse_measure)]
        measure: MeasureKind,
    },
    /// One comparison per Gramian measure.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `all` or a comma-separated list.
        #[arg(long, default_value = "all", value_parser = parse_measure_list)]
        measures: MeasureList,
    },
    /// Print a built-in scenario as JSON.
    Preset { name: String },
}

fn parse_measure(s: &str) -> Result<MeasureKind, String> {
    s.parse().map_err(|e: obsplan_core::Error| e.to_string())
}

#[derive(Clone)]
struct MeasureList(Vec<MeasureKind>);

fn parse_measure_list(s: &str) -> Result<MeasureList, String> {
    parse_measures(s).map(MeasureList)
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && io::stderr().is_terminal()
}

fn status(ok: bool, text: &str) {
    let (color, tag) = if ok { ("32", "ok") } else { ("31", "warning") };
    if use_color() {
        eprintln!("\x1b[1;{color}m{tag}\x1b[0m: {text}");
    } else {
        eprintln!("{tag}: {text}");
    }
}

fn load(common: &Common) -> Result<ScenarioConfig, ConfigError> {
    config::resolve(common.config.as_deref(), common.preset.as_deref())
}

fn options(common: &Common) -> CompareOptions {
    CompareOptions {
        restarts: common.restarts,
        seed: common.seed,
        ..CompareOptions::default()
    }
}

fn out_dir(common: &Common, command: &str, scenario: &ScenarioConfig) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| commands::default_out(command, scenario))
}

fn finish(result: anyhow::Result<Outcome>, out: &Path) -> ExitCode {
    match result {
        Ok(outcome) => {
            // a closed pipe on stdout is not a run failure
            let _ = writeln!(io::stdout(), "{}\nartifacts: {}", outcome.summary, out.display());
            if outcome.failures > 0 {
                status(false, &format!("{} measure(s) failed", outcome.failures));
                ExitCode::from(EXIT_FAILURE)
            } else if !outcome.converged {
                status(false, "solver did not converge; best iterate written");
                ExitCode::from(EXIT_NOT_CONVERGED)
            } else {
                status(true, "converged");
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, command) = match &cli.command {
        Command::Preset { name } => {
            return match preset(name) {
                Ok(s) => {
                    let _ = io::stdout().write_all(ScenarioFile::from_config(&s).to_json().as_bytes());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
            };
        }
        Command::Plan { common, .. } => (common, "plan"),
        Command::Compare { common, .. } => (common, "compare"),
        Command::Sweep { common, .. } => (common, "sweep"),
    };
    let scenario = match load(common) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid scenario: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = out_dir(common, command, &scenario);
    if let Err(e) = commands::check_out(&out) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    let opts = options(common);
    let result = match &cli.command {
        Command::Plan { objective, .. } => commands::run_plan(&scenario, *objective, &opts, &out),
        Command::Compare { measure, .. } => commands::run_compare(&scenario, *measure, &opts, &out),
        Command::Sweep { measures, .. } => commands::run_sweep(&scenario, &measures.0, &opts, &out),
        Command::Preset { .. } => unreachable!(),
    };
    finish(result, &out)
}
