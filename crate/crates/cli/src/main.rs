//! `helios`: validate scenarios, run them, and sweep a parameter.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, 3 runtime.

mod output;
mod scenario_file;
mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use helios_core::sim_engine::{run, run_pair, RunResult};
use helios_core::{Scenario, SimError};
use rayon::prelude::*;

use output::Files;
use scenario_file::LoadError;

#[derive(Parser)]
#[command(
    name = "helios",
    version,
    about = "Cloud nowcasting and PV ramp mitigation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print OK or diagnostics.
    Validate { scenario: PathBuf },
    /// Run a scenario and write CSV/JSON outputs.
    Run(RunArgs),
    /// Run a scenario once per value of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output directory (HELIOS_OUT overrides).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl OutArg {
    fn dir(&self) -> PathBuf {
        match std::env::var_os("HELIOS_OUT") {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.out.clone(),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[command(flatten)]
    out: OutArg,
    /// Also run with the other topology and write topology_comparison.csv.
    #[arg(long)]
    compare_topologies: bool,
    /// Run with and without control over identical weather.
    #[arg(long)]
    ab_control: bool,
}

#[derive(Args)]
struct SweepArgs {
    scenario: PathBuf,
    #[command(flatten)]
    out: OutArg,
    /// Dotted path into the scenario (`*` matches every array element), or an alias.
    #[arg(long)]
    param: String,
    /// Comma-separated values, e.g. `0.1,0.2,0.3`.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
}

enum Failure {
    Usage(String),
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invalid(v) => Failure::Validation(format!("InvariantError: {v}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn io_failure(dir: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("writing {}: {e}", dir.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    scenario_file::load(path)?;
    println!("OK");
    Ok(())
}

fn print_written(files: &Files) {
    let mut out = std::io::stdout().lock();
    for p in files.written() {
        // A closed pipe is not worth failing a finished run over.
        let _ = writeln!(out, "{}", p.display());
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let scenario = scenario_file::load(&args.scenario)?;
    let dir = args.out.dir();
    let (primary, ramp) = if args.ab_control {
        let pair = run_pair(&scenario)?;
        let ramp = pair.report().map_err(|e| Failure::Runtime(e.to_string()))?;
        (pair.controlled, ramp)
    } else {
        let r = run(&scenario)?;
        let ramp = r.ramp;
        (r, ramp)
    };

    let mut files = Files::new(&dir).map_err(io_failure(&dir))?;
    output::write_run(&mut files, &primary).map_err(io_failure(&dir))?;
    files
        .json(
            "summary.json",
            &output::Summary::new(&scenario, &primary, ramp, args.ab_control),
        )
        .map_err(io_failure(&dir))?;

    if args.compare_topologies {
        let other = run(&scenario.with_topology(scenario.topology.kind.other()))?;
        let mut runs: [&RunResult; 2] = [&primary, &other];
        runs.sort_by_key(|r| r.topology.as_str());
        files
            .csv(
                "topology_comparison.csv",
                output::COMPARISON_HEADER,
                runs.iter().map(|r| output::comparison_row(r)),
            )
            .map_err(io_failure(&dir))?;
    }
    print_written(&files);
    for w in &primary.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

const SWEEP_HEADER: [&str; 11] = [
    "value",
    "ramp_uncontrolled",
    "ramp_controlled",
    "reduction_fraction",
    "max_production_drop",
    "delta_energy",
    "central_node_traffic",
    "total_relayed",
    "mean_delay_hops",
    "forecasts",
    "actions",
];

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let raw: Vec<&str> = args
        .values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .collect();
    if raw.is_empty() {
        return Err(Failure::Usage("--values needs at least one value".into()));
    }
    let scenario = scenario_file::load(&args.scenario)?;
    let base = sweep::expanded(&scenario);
    let path = sweep::resolve_alias(&args.param);

    let mut variants: Vec<(String, Scenario)> = Vec::with_capacity(raw.len());
    for r in &raw {
        let mut doc = base.clone();
        if sweep::set_path(&mut doc, path, &sweep::parse_value(r)) == 0 {
            return Err(Failure::Validation(format!(
                "UnknownParam: `{}` does not address any field of this scenario",
                args.param
            )));
        }
        let s =
            scenario_file::from_value(doc).map_err(|e| Failure::Validation(format!("{} = {r}: {e}", args.param)))?;
        variants.push((r.to_string(), s));
    }

    let results: Vec<Result<[String; 11], Failure>> = variants
        .par_iter()
        .map(|(value, s)| {
            let pair = run_pair(s)?;
            let ramp = pair.report().map_err(|e| Failure::Runtime(e.to_string()))?;
            let c = &pair.controlled;
            let drop = c.plants.iter().map(|p| p.max_production_drop).fold(0.0, f64::max);
            let energy: f64 = c.plants.iter().map(|p| p.delta_energy).sum();
            Ok([
                value.clone(),
                ramp.ramp_uncontrolled.to_string(),
                ramp.ramp_controlled.to_string(),
                ramp.reduction_fraction.to_string(),
                drop.to_string(),
                energy.to_string(),
                c.traffic.central_node_traffic.to_string(),
                c.traffic.total_relayed.to_string(),
                c.traffic.mean_delay_hops.to_string(),
                c.forecasts.len().to_string(),
                c.actions.len().to_string(),
            ])
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let dir = args.out.dir();
    let mut files = Files::new(&dir).map_err(io_failure(&dir))?;
    files.csv("sweep.csv", SWEEP_HEADER, rows).map_err(io_failure(&dir))?;
    print_written(&files);
    Ok(())
}
