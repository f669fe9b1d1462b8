//! Command-line driver for the two-component Ginzburg-Landau vortex
//! toolkit.
//!
//! One subcommand per pipeline stage: `profile` solves the symmetric
//! vortex pair, `spectrum` decomposes its second variation into
//! angular blocks, `stability` classifies points and sweeps the
//! coupling for instability thresholds, and `bec-map` reduces
//! condensate parameters to the effective model.
//!
//! Exit status: 0 on success, 2 for invocation problems (bad flags,
//! missing or malformed input files), 1 for computation failures or
//! a failed cross-check. Failures print a single-line JSON object
//! `{"error":{"kind":…,"message":…,"path":…}}` to stderr.
//!
//! `VORTEX_THREADS` caps the worker-thread count (default: all
//! cores). All artifacts are deterministic: the same configuration
//! produces byte-identical files, and every metadata sidecar embeds
//! the configuration's SHA-256 hash.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN; `x <= 0.0` lets it through

mod commands;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "vortex",
    version,
    about = "Symmetric vortex profiles, spectra, and stability for the two-component Ginzburg-Landau model on a disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a degree-[1,1] symmetric vortex profile.
    Profile(ProfileArgs),
    /// Ground eigenvalue of each angular block of the second variation.
    Spectrum(SpectrumArgs),
    /// Classify stability or sweep the coupling for thresholds.
    Stability(StabilityArgs),
    /// Map condensate parameters to the effective model parameters.
    BecMap(BecMapArgs),
}

#[derive(Args)]
pub struct ProfileArgs {
    /// Model parameter file (JSON: a_plus, a_minus, b, t_plus, t_minus).
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Condensate parameter file (JSON), reduced to model parameters first.
    #[arg(long, value_name = "FILE", conflicts_with = "params")]
    pub bec: Option<PathBuf>,
    /// Disk radius of the rescaled frame (unit potential multiplier).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Coupling strength; shorthand for --radius sqrt(lambda).
    #[arg(long, conflicts_with = "radius")]
    pub lambda: Option<f64>,
    /// Radial cells (default: 32 per unit radius, clamped to [256, 8192]).
    #[arg(long)]
    pub cells: Option<usize>,
    /// Impose the two-term far-field expansion at the boundary instead
    /// of the bulk values (smaller domain-truncation error).
    #[arg(long)]
    pub corrected_bc: bool,
    /// Newton tolerance on the pointwise residual (--corrected-bc uses
    /// the default).
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Recorded in metadata; reserved for randomized diagnostics.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; metadata goes to the .meta.json sidecar.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// Previously written profile CSV (with its .meta.json sidecar).
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with_all = ["params", "bec", "lambda", "cells"]
    )]
    pub profile: Option<PathBuf>,
    /// Model parameter file for an inline solve.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Condensate parameter file for an inline solve.
    #[arg(long, value_name = "FILE", conflicts_with = "params")]
    pub bec: Option<PathBuf>,
    /// Coupling strength for an inline solve.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Radial cells for an inline solve (default: resolution policy).
    #[arg(long)]
    pub cells: Option<usize>,
    /// Highest angular block to compute (table covers n0..=nN).
    #[arg(long, default_value_t = 8)]
    pub blocks: u32,
    /// Also write the ground eigenvector of the n1 block to this CSV.
    #[arg(long, value_name = "FILE")]
    pub eigvec: Option<PathBuf>,
    /// Cross-check the n1 ground eigenvalue against the complex route;
    /// disagreement beyond 1e-9 exits nonzero.
    #[arg(long)]
    pub check_l1: bool,
    /// Recorded in metadata; reserved for randomized diagnostics.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path for the block table.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct StabilityArgs {
    /// Model parameter file (JSON).
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Condensate parameter file (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "params")]
    pub bec: Option<PathBuf>,
    /// Classify this single coupling strength and print one line.
    #[arg(long, conflicts_with_all = ["b_sweep", "b_values"])]
    pub lambda: Option<f64>,
    /// Radial cells for the single classification (default: policy).
    #[arg(long)]
    pub cells: Option<usize>,
    /// Eigenvalues within this margin of zero classify as marginal.
    #[arg(long, default_value_t = 1e-7)]
    pub margin: f64,
    /// Sweep the coupling sign parameter over LO:HI:STEP (inclusive).
    #[arg(long, value_name = "LO:HI:STEP", allow_hyphen_values = true)]
    pub b_sweep: Option<String>,
    /// Sweep an explicit comma-separated list of coupling values.
    #[arg(
        long,
        value_name = "B1,B2,...",
        conflicts_with = "b_sweep",
        allow_hyphen_values = true
    )]
    pub b_values: Option<String>,
    /// Upper end of the threshold search.
    #[arg(long, default_value_t = 1e4)]
    pub lambda_max: f64,
    /// Relative width at which the threshold bracket stops shrinking.
    #[arg(long, default_value_t = 1e-3)]
    pub rel_tol: f64,
    /// Recorded in metadata; reserved for randomized diagnostics.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Diagram CSV path (required for sweeps, optional for --lambda).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write every evaluated (b, lambda, mu0, mu1) to this CSV.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct BecMapArgs {
    /// Condensate parameter file (JSON: m1, m2, g1, g2, g12, mu1, mu2, hbar).
    #[arg(long, value_name = "FILE")]
    pub bec: PathBuf,
    /// Write the mapping to this JSON file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Apply the `VORTEX_THREADS` cap before any parallel region starts.
fn init_threads() -> anyhow::Result<()> {
    let Some(raw) = std::env::var_os("VORTEX_THREADS") else {
        return Ok(());
    };
    let parsed = raw
        .to_str()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let Some(n) = parsed else {
        return Err(emit::input_error(
            "invalid_input",
            format!("VORTEX_THREADS must be a positive integer, got {raw:?}"),
        ));
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("cannot configure the thread pool: {e}"))
}

fn fail(err: &anyhow::Error) -> ExitCode {
    let (kind, message, path, code) = if let Some(ie) = err.downcast_ref::<emit::InputError>() {
        (ie.kind, ie.message.clone(), ie.path.clone(), 2u8)
    } else if let Some(ve) = err.downcast_ref::<emit::VerificationError>() {
        ("verification_failed", ve.message.clone(), None, 1)
    } else if let Some(ce) = err.downcast_ref::<vortex_core::Error>() {
        ("compute", ce.to_string(), None, 1)
    } else {
        ("error", format!("{err:#}"), None, 1)
    };
    let mut inner = serde_json::Map::new();
    inner.insert("kind".into(), serde_json::json!(kind));
    inner.insert("message".into(), serde_json::json!(message));
    if let Some(p) = path {
        inner.insert("path".into(), serde_json::json!(p.display().to_string()));
    }
    let payload = serde_json::json!({ "error": inner });
    eprintln!("{}", serde_json::to_string(&payload).expect("error payload serializes"));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        return fail(&e);
    }
    let result = match &cli.command {
        Command::Profile(args) => commands::cmd_profile(args),
        Command::Spectrum(args) => commands::cmd_spectrum(args),
        Command::Stability(args) => commands::cmd_stability(args),
        Command::BecMap(args) => commands::cmd_bec_map(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
