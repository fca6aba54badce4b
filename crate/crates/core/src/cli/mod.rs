//! The `rhlab` command-line front end.

pub mod cache;
pub mod config;
pub mod manifest;
pub mod report;
pub mod run;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_entries, plan_from, Command, KernelChoice, Plan};
pub use manifest::{code_version, run_id, Check, RunManifest};
pub use report::{emit_report, ReportBundle};
pub use run::{run_experiment, Outcome, EXIT_CHECKS_FAILED, EXIT_ERROR, EXIT_OK};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "rhlab", version, about = "Experiments on discrete rough truncated Hilbert transforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Assemble H_M (and its bands in gap mode) and write the kernels.
    BuildKernel(RunArgs),
    /// Per-scale building-block report of an assembled kernel.
    CheckCz(RunArgs),
    /// Resolvent kernel, identity check and expansion coefficients at one M.
    Resolvent(RunArgs),
    /// Seeded suite of products in the operator algebra.
    Algebra(RunArgs),
    /// Weak-l1 sweep over M.
    SweepWeak(RunArgs),
    /// Seeded suite of dyadic Calderon-Zygmund decompositions.
    CzDecompose(RunArgs),
    /// Split of block products into diagonal, local and smooth parts.
    RhoK(RunArgs),
    /// Expansion coefficients of the resolvent over M.
    Asymptotics(RunArgs),
    /// Summary text and SVG charts from run manifests.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Configuration file (`key = value` lines, optional `[section]` headers).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "M", value_name = "N")]
    pub m: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// `full` or `gap`.
    #[arg(long)]
    pub mode: Option<String>,
    /// `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Output directory of the run.
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Weak-type family: `h`, `hsq` or `resid`.
    #[arg(long)]
    pub family: Option<String>,
}

impl RunArgs {
    /// Flag overrides as config entries, in a fixed order.
    pub fn overrides(&self) -> Vec<(String, String)> {
        [
            ("M", &self.m),
            ("alpha", &self.alpha),
            ("delta", &self.delta),
            ("mode", &self.mode),
            ("lambda", &self.lambda),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("seed", &self.seed),
            ("family", &self.family),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Manifest files to summarize.
    pub manifests: Vec<PathBuf>,
    /// Directory for `summary.txt` and the charts.
    #[arg(long, default_value = "rhlab-report")]
    pub out: PathBuf,
}

impl Sub {
    fn run_command(&self) -> Option<(Command, &RunArgs)> {
        Some(match self {
            Sub::BuildKernel(a) => (Command::BuildKernel, a),
            Sub::CheckCz(a) => (Command::CheckCz, a),
            Sub::Resolvent(a) => (Command::Resolvent, a),
            Sub::Algebra(a) => (Command::Algebra, a),
            Sub::SweepWeak(a) => (Command::SweepWeak, a),
            Sub::CzDecompose(a) => (Command::CzDecompose, a),
            Sub::RhoK(a) => (Command::RhoK, a),
            Sub::Asymptotics(a) => (Command::Asymptotics, a),
            Sub::Report(_) => return None,
        })
    }
}

/// Reads the config and flags of one run into a plan and the inputs its run
/// id is computed from.
pub fn load_plan(command: Command, args: &RunArgs) -> Result<(Plan, Vec<u8>, Vec<(String, String)>)> {
    let bytes = std::fs::read(&args.config).map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Parse(format!("{}: config is not UTF-8", args.config.display())))?;
    let overrides = args.overrides();
    let plan = plan_from(command, &text, &overrides)?;
    Ok((plan, bytes, overrides))
}

/// Runs the CLI and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rhlab: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    if let Sub::Report(r) = &cli.command {
        let b = emit_report(&r.manifests, &r.out)?;
        println!("{}", b.summary.display());
        return Ok(EXIT_OK);
    }
    let (command, args) = cli.command.run_command().ok_or_else(|| Error::Internal("no subcommand".into()))?;
    let (plan, bytes, overrides) = load_plan(command, args)?;
    if let Some(j) = plan.jobs {
        // a pool already initialized by an earlier call in this process is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let cache = cache::cache_dir();
    let outcome = run_experiment(&plan, &bytes, &overrides, cache.as_deref())?;
    for c in &outcome.manifest.checks {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(e) = &outcome.manifest.error {
        eprintln!("rhlab: {e}");
    }
    println!("{}", outcome.manifest_path.display());
    Ok(outcome.exit_code)
}
