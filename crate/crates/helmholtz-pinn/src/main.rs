//! Thin CLI over the library: `train`, `hpo` and `sweep` subcommands.
//!
//! Each subcommand takes `--config <json>` plus flag overrides mirroring the
//! config fields; flags are applied after the file. Exit codes: 0 success
//! (including runs flagged diverged in their outputs), 1 usage/config error,
//! 2 numerical fault.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use helmholtz_pinn::config::{HardConstraintChoice, NeumannSourceChoice, RunConfig};
use helmholtz_pinn::net::Activation;
use helmholtz_pinn::problem::Case;
use helmholtz_pinn::runner;
use helmholtz_pinn::sampling::BoundaryCountMode;

#[derive(Parser)]
#[command(name = "helmholtz-pinn", version, about = "Helmholtz PINN training and GP-based hyper-parameter tuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one network with a fixed hyper-parameter point.
    Train(CommonArgs),
    /// Run a Bayesian hyper-parameter optimization campaign.
    Hpo(CommonArgs),
    /// Run one campaign per (omega, level) cell and summarize.
    Sweep(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem case: dirichlet2d or neumann3d.
    #[arg(long)]
    case: Option<String>,
    /// Output directory for the run.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    omega: Option<u32>,
    #[arg(long)]
    r_train: Option<f64>,
    #[arg(long)]
    r_test: Option<f64>,
    /// Training level (1, 3 or 5); replaces --r-train.
    #[arg(long)]
    level: Option<u32>,
    /// Inner ADAM epochs K.
    #[arg(long)]
    epochs: Option<u64>,
    /// Outer HPO iterations M.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    n_random: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    log_every: Option<u64>,
    /// Learning rate of the run's λ (λ₀ for campaigns).
    #[arg(long)]
    alpha: Option<f64>,
    /// Hidden-layer count of λ.
    #[arg(long)]
    depth: Option<usize>,
    /// Hidden-layer width of λ.
    #[arg(long)]
    width: Option<usize>,
    /// Activation of λ: sin, sigmoid or tanh.
    #[arg(long)]
    activation: Option<String>,
    /// Boundary weight of λ (Neumann).
    #[arg(long)]
    w_gamma: Option<f64>,
    /// Dirichlet hard constraint: vanishing, quadratic or none.
    #[arg(long)]
    hard_constraint: Option<String>,
    /// Neumann source variant: consistent or doubled.
    #[arg(long)]
    neumann_source: Option<String>,
    /// Boundary-point count rule: formula or sixteen.
    #[arg(long)]
    boundary_count: Option<String>,
    /// Feed log10 losses to the GP (true/false).
    #[arg(long)]
    log10_targets: Option<bool>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    n_candidates: Option<usize>,
    #[arg(long)]
    adam_epsilon: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    /// Comma-separated pulsations for sweep runs, e.g. 2,4,6.
    #[arg(long, value_delimiter = ',')]
    sweep_omegas: Option<Vec<u32>>,
    /// Comma-separated levels for sweep runs, e.g. 1,3,5.
    #[arg(long, value_delimiter = ',')]
    sweep_levels: Option<Vec<u32>>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn parse_case(s: &str) -> Option<Case> {
    match s {
        "dirichlet2d" => Some(Case::Dirichlet2d),
        "neumann3d" => Some(Case::Neumann3d),
        _ => None,
    }
}

impl CommonArgs {
    /// Base config from --config (or required flags), then flag overrides.
    fn build(self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
            None => {
                let case = self
                    .case
                    .as_deref()
                    .ok_or("either --config or --case is required")?;
                let case = parse_case(case).ok_or_else(|| format!("unknown case `{case}`"))?;
                let out = self.out_dir.clone().ok_or("--out-dir is required without --config")?;
                RunConfig::new(case, out)
            }
        };
        if let Some(s) = &self.case {
            cfg.case = parse_case(s).ok_or_else(|| format!("unknown case `{s}`"))?;
        }
        if let Some(v) = self.out_dir {
            cfg.out_dir = v;
        }
        if let Some(v) = self.omega {
            cfg.omega = v;
        }
        if let Some(v) = self.r_train {
            cfg.r_train = v;
        }
        if let Some(v) = self.r_test {
            cfg.r_test = v;
        }
        if self.level.is_some() {
            cfg.level = self.level;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = self.n_random {
            cfg.n_random = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.log_every {
            cfg.log_every = v;
        }
        if let Some(s) = &self.hard_constraint {
            cfg.hard_constraint = Some(match s.as_str() {
                "vanishing" => HardConstraintChoice::Vanishing,
                "quadratic" => HardConstraintChoice::Quadratic,
                "none" => HardConstraintChoice::None,
                _ => return Err(format!("unknown hard constraint `{s}`")),
            });
        }
        if let Some(s) = &self.neumann_source {
            cfg.neumann_source = match s.as_str() {
                "consistent" => NeumannSourceChoice::Consistent,
                "doubled" => NeumannSourceChoice::Doubled,
                _ => return Err(format!("unknown neumann source `{s}`")),
            };
        }
        if let Some(s) = &self.boundary_count {
            cfg.boundary_count = match s.as_str() {
                "formula" => BoundaryCountMode::Formula,
                "sixteen" => BoundaryCountMode::Sixteen,
                _ => return Err(format!("unknown boundary count mode `{s}`")),
            };
        }
        if let Some(v) = self.log10_targets {
            cfg.log10_targets = v;
        }
        if let Some(v) = self.xi {
            cfg.xi = v;
        }
        if let Some(v) = self.n_candidates {
            cfg.n_candidates = v;
        }
        if let Some(v) = self.adam_epsilon {
            cfg.adam_epsilon = v;
        }
        if self.grid_n.is_some() {
            cfg.grid_n = self.grid_n;
        }
        if let Some(v) = self.sweep_omegas {
            cfg.sweep_omegas = v;
        }
        if let Some(v) = self.sweep_levels {
            cfg.sweep_levels = v;
        }

        let touches_lambda = self.alpha.is_some()
            || self.depth.is_some()
            || self.width.is_some()
            || self.activation.is_some()
            || self.w_gamma.is_some();
        if touches_lambda {
            let mut lambda = cfg
                .lambda
                .clone()
                .unwrap_or_else(|| RunConfig::default_lambda(cfg.case));
            if let Some(v) = self.alpha {
                lambda.learning_rate = v;
            }
            if let Some(v) = self.depth {
                lambda.depth = v;
            }
            if let Some(v) = self.width {
                lambda.width = v;
            }
            if let Some(s) = &self.activation {
                lambda.activation = Activation::parse(s)
                    .ok_or_else(|| format!("unknown activation `{s}`"))?;
            }
            if let Some(v) = self.w_gamma {
                lambda.boundary_weight = Some(v);
            }
            cfg.lambda = Some(lambda);
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    type RunFn = fn(&RunConfig) -> Result<PathBuf, runner::RunnerError>;
    let (args, run): (CommonArgs, RunFn) = match cli.command {
        Command::Train(a) => (a, runner::cmd_train),
        Command::Hpo(a) => (a, runner::cmd_hpo),
        Command::Sweep(a) => (a, runner::cmd_sweep),
    };
    let cfg = match args.build() {
        Ok(cfg) => cfg,
        Err(msg) => return usage_error(&msg),
    };
    match run(&cfg) {
        Ok(dir) => {
            println!("run written to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
