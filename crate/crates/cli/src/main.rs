use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use madelung::scenario::{self, ScenarioConfig, ScenarioOutcome};

/// Environment variable naming the default output root.
const OUT_ENV: &str = "MADELUNG_OUT";
const DEFAULT_OUT: &str = "madelung-out";

#[derive(Parser)]
#[command(name = "madelung", version, about = "Run Schrödinger / Wasserstein scenarios and their residual checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a JSON config or by built-in name.
    Run(RunArgs),
    /// List the built-in scenarios.
    List,
    /// Run every built-in scenario; exits 0 iff all checks pass.
    Suite {
        /// Output root; one directory per scenario is created below it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the JSON config of a built-in scenario.
    Show { name: String },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name (see `list`).
    #[arg(conflicts_with = "config", required_unless_present = "config")]
    name: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output.directory`, then `$MADELUNG_OUT/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `dotted.key=value`, value parsed as JSON (e.g. `integrator.dt=5e-4`).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn load(args: &RunArgs) -> Result<ScenarioConfig> {
    let base = match (&args.name, &args.config) {
        (Some(name), _) => scenario::builtin(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::from_json(&text).with_context(|| format!("loading {}", path.display()))?
        }
        (None, None) => bail!("either a scenario name or --config is required"),
    };
    Ok(base.with_overrides(&args.overrides)?)
}

fn report(outcome: &ScenarioOutcome) {
    let status = if outcome.passed { "PASS" } else { "FAIL" };
    println!("{status} {} -> {}", outcome.scenario, outcome.directory.display());
    for check in &outcome.checks {
        let max = check.max_residual.map_or("-".to_string(), |m| format!("{m:.3e}"));
        let mark = if check.passed { "ok" } else { "FAILED" };
        println!("  {:<24} {max:>10} <= {:.1e} {mark}", check.name, check.tolerance);
    }
    if let Some(err) = &outcome.error {
        println!("  error in {}: {err}", outcome.failed_stage.as_deref().unwrap_or("solver"));
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let config = load(&args)?;
    let dir = match (&args.out, &config.output.directory) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => PathBuf::from(dir),
        (None, None) => out_root().join(&config.name),
    };
    let outcome = scenario::run_scenario(&config, &dir)?;
    report(&outcome);
    Ok(outcome.passed)
}

fn suite(out: &Path, jobs: usize) -> Result<bool> {
    let outcomes = scenario::run_suite(out, jobs)?;
    for o in &outcomes {
        report(o);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} scenarios, {failed} failed", outcomes.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            for s in scenario::list_scenarios() {
                println!("{:<26} {}", s.name, s.description);
            }
            Ok(true)
        }
        Command::Suite { out, jobs } => suite(&out.unwrap_or_else(out_root), jobs),
        Command::Show { name } => scenario::builtin(&name).map(|s| {
            println!("{}", s.to_json());
            true
        }).map_err(Into::into),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
