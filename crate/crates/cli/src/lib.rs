//! Batch front end for `spread-core`: resolves configuration, runs the
//! pipelines on a worker pool and writes CSV/JSON/binary outputs.

pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod run;

pub use spread_core;

use crate::config::{parse_window, pick, require, FileConfig, GridSpec, ModelParams};
use crate::error::{CliError, CliResult};
use crate::output::{check_target, commit, sha256_hex, Artifacts, MANIFEST};
use crate::run::{FitJob, FitKind, FrmJob, ModelJob, SpinJob};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "spread", version, about = "Lanczos coefficients and spread complexity of quantum quenches")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output directory; created whole at the end of a successful run.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed; realization r uses seed + r.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Binary precision for the moment recursion (default: exact rationals).
    #[arg(long = "precision-bits", global = true, value_name = "N")]
    pub precision_bits: Option<usize>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    #[arg(long, global = true)]
    pub tpoints: Option<usize>,
    /// Log-spaced grid up to --tmax instead of a linear one.
    #[arg(long = "log-grid", global = true)]
    pub log_grid: bool,
    /// JSON config; flags override its keys.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Replace a non-empty output directory.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic model: moments, Lanczos coefficients, evolution, fits.
    Model(ModelArgs),
    /// GOE quench ensemble.
    Frm(FrmArgs),
    /// Disordered spin chain from a domain wall.
    Spin(SpinArgs),
    /// Refit a coefficient or survival CSV.
    Fit(FitArgs),
    /// Two-level form factor at a list of times.
    #[command(name = "b2-table")]
    B2Table(B2Args),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// gaussian | truncated-quadratic | interpolation | semicircle | frm | spin-sp
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long)]
    pub fbar: Option<f64>,
    /// Krylov depth.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Continue through non positive-definite moments, keeping the sign of b^2.
    #[arg(long)]
    pub formal: bool,
    /// Fit window: n range for coefficient fits, sigma0*t range for decay fits.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Args)]
pub struct FrmArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Write each Hamiltonian (KSH1, plus CSV when small).
    #[arg(long = "dump-matrix")]
    pub dump_matrix: bool,
    /// Write each Krylov basis (KSB1).
    #[arg(long = "dump-basis")]
    pub dump_basis: bool,
}

#[derive(Debug, Args)]
pub struct SpinArgs {
    /// Chain length L (even, at most 20).
    #[arg(long = "L", alias = "sites")]
    pub sites: Option<usize>,
    /// Disorder strength; fields are uniform in [-h, h].
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Also run L - 2 into the subdirectory `L<L-2>`.
    #[arg(long)]
    pub compare: bool,
    #[arg(long = "dump-matrix")]
    pub dump_matrix: bool,
    #[arg(long = "dump-basis")]
    pub dump_basis: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// coeffs.csv (`n,a_n,b_n`) or a series with `t` and `F` columns.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: FitKind,
    #[arg(long, value_parser = parse_window)]
    pub window: Option<[f64; 2]>,
    /// N for GOE profile fits (default: rows + 1).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Constant subtracted from F before a decay fit.
    #[arg(long)]
    pub baseline: Option<f64>,
    /// Fit only local maxima.
    #[arg(long)]
    pub envelope: bool,
}

#[derive(Debug, Args)]
pub struct B2Args {
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
}

/// A resolved run, ready to execute.
pub struct Plan {
    pub command: &'static str,
    pub out: PathBuf,
    pub force: bool,
    pub threads: Option<usize>,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    job: Job,
}

enum Job {
    Model(ModelJob),
    Frm(FrmJob),
    Spin(SpinJob),
    Fit(FitJob),
    B2(Vec<f64>),
}

impl Plan {
    /// Merges flags, config file and defaults.
    pub fn resolve(cli: Cli) -> CliResult<Plan> {
        let g = cli.global;
        let file = match &g.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let out = require(g.out.clone(), "out", "(flag only)")?;
        let seed = pick(g.seed, file.seed).unwrap_or(0);
        let threads = pick(g.threads, file.threads);
        if threads == Some(0) {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        let grid = GridSpec {
            tmax: pick(g.tmax, file.tmax),
            tpoints: pick(g.tpoints, file.tpoints),
            log: g.log_grid || file.log_grid.unwrap_or(false),
        };
        let precision_bits = pick(g.precision_bits, file.precision_bits);
        let (command, job, seeds) = match cli.command {
            Command::Model(a) => {
                let params = ModelParams {
                    variant: pick(a.variant, file.variant.clone()),
                    sigma0: pick(a.sigma0, file.sigma0),
                    gamma: pick(a.gamma, file.gamma),
                    alpha: pick(a.alpha, file.alpha),
                    dim: pick(a.dim, file.dim),
                    a: pick(a.a, file.a),
                    fbar: pick(a.fbar, file.fbar),
                };
                params.build()?;
                let job = ModelJob {
                    model: params.variant.clone().unwrap_or_default(),
                    params,
                    k: pick(a.k, file.k).unwrap_or(20),
                    formal: a.formal || file.formal.unwrap_or(false),
                    precision_bits,
                    grid,
                    window: pick(a.window, file.window),
                };
                ("model", Job::Model(job), vec![])
            }
            Command::Frm(a) => {
                let job = FrmJob {
                    dim: require(pick(a.dim, file.dim), "dim", "dim")?,
                    realizations: pick(a.realizations, file.realizations).unwrap_or(1),
                    k: pick(a.k, file.k),
                    seed,
                    grid,
                    dump_matrix: a.dump_matrix,
                    dump_basis: a.dump_basis,
                };
                let seeds = job.seeds();
                ("frm", Job::Frm(job), seeds)
            }
            Command::Spin(a) => {
                let job = SpinJob {
                    sites: require(pick(a.sites, file.sites), "L", "sites")?,
                    h: pick(a.h, file.h).unwrap_or(0.4),
                    g: pick(a.g, file.g).unwrap_or(1.0),
                    realizations: pick(a.realizations, file.realizations).unwrap_or(1),
                    k: pick(a.k, file.k),
                    seed,
                    grid,
                    compare: a.compare || file.compare.unwrap_or(false),
                    dump_matrix: a.dump_matrix,
                    dump_basis: a.dump_basis,
                };
                let seeds = job.seeds();
                ("spin", Job::Spin(job), seeds)
            }
            Command::Fit(a) => {
                let bytes = std::fs::read(&a.input).map_err(CliError::io(&a.input))?;
                let job = FitJob {
                    input: a.input.display().to_string(),
                    bytes,
                    kind: a.kind,
                    window: pick(a.window, file.window),
                    dim: pick(a.dim, file.dim),
                    baseline: a.baseline,
                    envelope: a.envelope,
                };
                ("fit", Job::Fit(job), vec![])
            }
            Command::B2Table(a) => {
                let t = a.t.unwrap_or_else(|| run::B2_TIMES.to_vec());
                ("b2-table", Job::B2(t), vec![])
            }
        };
        let config = match &job {
            Job::Model(j) => json!({ "model": model_json(&j.params), "run": j }),
            Job::Frm(j) => serde_json::to_value(j).expect("serializable"),
            Job::Spin(j) => serde_json::to_value(j).expect("serializable"),
            Job::Fit(j) => serde_json::to_value(j).expect("serializable"),
            Job::B2(t) => json!({ "t": t }),
        };
        Ok(Plan { command, out, force: g.force, threads, seeds, config, job })
    }

    /// Runs the pipeline on a pool of `threads` workers.
    pub fn execute(&self) -> CliResult<Artifacts> {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| match &self.job {
            Job::Model(j) => run::run_model(j),
            Job::Frm(j) => run::run_frm(j),
            Job::Spin(j) => run::run_spin(j),
            Job::Fit(j) => run::run_fit(j),
            Job::B2(t) => run::run_b2_table(t),
        })
    }

    pub fn config_hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(&self.config).expect("serializable"))
    }
}

fn model_json(p: &ModelParams) -> serde_json::Value {
    json!({
        "variant": p.variant, "sigma0": p.sigma0, "gamma": p.gamma, "alpha": p.alpha,
        "dim": p.dim, "A": p.a, "fbar": p.fbar,
    })
}

/// Resolves, runs and commits; returns the output directory.
pub fn main_with(cli: Cli) -> CliResult<PathBuf> {
    let start = Instant::now();
    let plan = Plan::resolve(cli)?;
    check_target(&plan.out, plan.force)?;
    let mut files = plan.execute()?;
    let digests = files.digests();
    files.json(
        MANIFEST,
        &json!({
            "command": plan.command,
            "config": plan.config,
            "config_sha256": plan.config_hash(),
            "seeds": plan.seeds,
            "seed_scheme": "realization r uses master seed + r (wrapping); ChaCha20 stream per seed",
            "versions": { "spread-cli": env!("CARGO_PKG_VERSION"), "spread-core": spread_core::VERSION },
            "threads": plan.threads.unwrap_or_else(rayon::current_num_threads),
            "wall_time_s": start.elapsed().as_secs_f64(),
            "files": digests.iter().map(|(n, h)| json!({ "name": n, "sha256": h })).collect::<Vec<_>>(),
        }),
    );
    commit(&plan.out, &files, plan.force)?;
    Ok(plan.out)
}
