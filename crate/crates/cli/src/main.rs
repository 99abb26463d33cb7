//! `smoe-lab`: reproducible bound evaluations, sweeps, lemma verification
//! suites, and gap experiments, each driven by a JSON config file.
//!
//! Exit codes: 0 on success, 2 on validation errors, 3 on runtime errors.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

const BOUND_FIELDS: &str = "Config fields (JSON) and defaults:
  lipschitz         loss Lipschitz constant C        (default 1.0)
  rademacher        expert-class Rademacher value    (default 0.05)
  rademacher_stderr Monte-Carlo standard error       (default 0.0 = exact)
  natarajan_dim     router Natarajan dimension       (default 0.0)
  sample_count      training sample count m          (default 1000)
  expert_count      total experts T                  (default 8)
  selected_count    selected experts k               (default 2)
  delta             confidence parameter in (0,1)    (default 0.05)
  output_dir        where reports are written        (default out/bound)
  seed              echoed into the manifest         (default 0)";

const SWEEP_FIELDS: &str = "Config fields (JSON) and defaults; every axis is a list:
  k                 selected experts                 (default [1,2,4,8])
  expert_count      total experts T                  (default [8])
  sample_count      sample counts m                  (default [1000])
  natarajan_dim     router dimensions                (default [4.0])
  lipschitz         Lipschitz constants C            (default [1.0])
  rademacher        Rademacher values R              (default [0.05])
  delta             confidence parameters            (default [0.05])
  output_dir        where reports are written        (default out/sweep)
  seed              echoed into the manifest         (default 0)";

const VERIFY_FIELDS: &str = "Config fields (JSON) and defaults:
  class_count       seeded corpus size               (default 50)
  grid_resolution   simplex grid divisions per axis  (default 10)
  corpus_dir        directory of class-table CSVs    (default none: seeded corpus)
  output_dir        where reports are written        (default out/verify)
  seed              corpus seed                      (default 2024)";

const GAP_FIELDS: &str = "Config fields (JSON) and defaults:
  expert_count      total experts T                  (default 8)
  k_values          sparsity levels to train         (default [1,2,4,8])
  train_size        training examples m              (default 512)
  test_size         held-out examples                (default 5120)
  feature_dim       input dimension d                (default 8)
  clusters_per_class Gaussian clusters per label     (default 2)
  norm_bound        feature-norm ball radius c       (default 1.0)
  expert_hidden     expert hidden widths             (default [4])
  router_hidden     router hidden widths             (default [])
  epochs            training epochs                  (default 30)
  batch_size        minibatch size                   (default 32)
  learning_rate     gradient-descent step            (default 0.1)
  weight_init_scale init scale s/sqrt(fan_in)        (default 1.0)
  loss              training surrogate               (default {\"kind\":\"clipped_hinge\",\"lipschitz\":1.0})
  delta             confidence parameter             (default 0.05)
  natarajan_constant big-O constant in d*p^2         (default 1.0)
  output_dir        where reports are written        (default out/gap)
  seed              data and training seed           (default 0)";

#[derive(Parser)]
#[command(
    name = "smoe-lab",
    version,
    about = "Sparse mixture-of-experts experiments: generalization bounds, sweeps, lemma verification, and gap measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the generalization bound once and write its breakdown.
    #[command(after_help = BOUND_FIELDS)]
    Bound(RunArgs),
    /// Evaluate the bound over a parameter grid.
    #[command(after_help = SWEEP_FIELDS)]
    Sweep(RunArgs),
    /// Run the lemma verification suite over a corpus of finite classes.
    #[command(after_help = VERIFY_FIELDS)]
    Verify(RunArgs),
    /// Train per-sparsity models and compare measured gaps to the bound.
    #[command(after_help = GAP_FIELDS)]
    Gap(RunArgs),
}

fn load_config<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("reading config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("parsing config {}: {e}", p.display())))
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bound(args) => {
            let mut cfg: config::BoundConfig = load_config(&args.config)?;
            if let Some(out) = args.out {
                cfg.output_dir = out;
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            commands::run_bound(&cfg)
        }
        Command::Sweep(args) => {
            let mut cfg: config::SweepConfig = load_config(&args.config)?;
            if let Some(out) = args.out {
                cfg.output_dir = out;
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            commands::run_sweep(&cfg)
        }
        Command::Verify(args) => {
            let mut cfg: config::VerifyConfig = load_config(&args.config)?;
            if let Some(out) = args.out {
                cfg.output_dir = out;
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            commands::run_verify(&cfg)
        }
        Command::Gap(args) => {
            let mut cfg: config::GapConfig = load_config(&args.config)?;
            if let Some(out) = args.out {
                cfg.output_dir = out;
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            commands::run_gap(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            match err {
                CliError::Validation(_) => ExitCode::from(2),
                CliError::Runtime(_) => ExitCode::from(3),
            }
        }
    }
}
