//! Run orchestration behind the CLI: single trainings, HPO campaigns and
//! (ω, level) sweeps, each writing a self-contained run directory.
//!
//! Every run directory contains the resolved `config.json`; re-running from
//! that file reproduces all outputs byte for byte except wall-clock columns.
//! Tabular outputs are CSV with a header row and floats printed with 17
//! significant digits so they round-trip exactly.

use std::fs;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::gp::GpError;
use crate::hpo::{self, HpoError, HpoResult, TrialRecord};
use crate::loss::LossError;
use crate::net::{MlpParams, NetError};
use crate::optimizer::{self, TrainError, TrainOptions, TrainResult};
use crate::problem::ProblemSpec;
use crate::sampling::{self, precision_of, SamplingError};
use crate::seeds;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Hpo(#[from] HpoError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Net(#[from] NetError),
}

impl RunnerError {
    /// Process exit code: 1 for usage/config problems, 2 for numerical faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_) | RunnerError::Io(_) | RunnerError::Sampling(_) => 1,
            RunnerError::Hpo(HpoError::OutOfRange(_))
            | RunnerError::Hpo(HpoError::BadConfig(_))
            | RunnerError::Hpo(HpoError::BadDimension { .. }) => 1,
            RunnerError::Hpo(HpoError::Gp(GpError::InsufficientData(_))) => 1,
            _ => 2,
        }
    }
}

/// 17 significant digits; parses back to the identical f64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn create_run_dir(cfg: &RunConfig) -> Result<PathBuf, RunnerError> {
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("config.json"), cfg.to_json_pretty() + "\n")?;
    Ok(cfg.out_dir.clone())
}

fn write_epochs_csv(path: &Path, result: &TrainResult) -> Result<(), RunnerError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "epoch,loss_train,loss_test,pde_term,bc_term,data_term,metric,elapsed_secs")?;
    for r in &result.history {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.epoch,
            fmt_f64(r.loss_train),
            fmt_f64(r.loss_test),
            fmt_f64(r.pde_term),
            fmt_f64(r.bc_term),
            fmt_f64(r.data_term),
            fmt_opt(r.metric),
            fmt_f64(r.elapsed_secs),
        )?;
    }
    Ok(())
}

/// Regular lattice (grid_n points per dimension, endpoints included) with
/// predicted and exact values and the pointwise absolute error.
fn write_solution_grid(
    path: &Path,
    params: &MlpParams,
    spec: &ProblemSpec,
    grid_n: usize,
) -> Result<(), RunnerError> {
    let d = spec.dim;
    let mut w = BufWriter::new(File::create(path)?);
    let coord_names = ["x", "y", "z"];
    writeln!(w, "{},u_pred,u_exact,abs_error", coord_names[..d].join(","))?;
    let n = grid_n.max(2);
    let mut idx = vec![0usize; d];
    loop {
        let point: Vec<f64> = idx.iter().map(|&i| i as f64 / (n - 1) as f64).collect();
        let raw = params.forward(&point)?;
        let pred = match spec.hard_constraint {
            Some(h) => h.apply_value(&point, raw),
            None => raw,
        };
        let exact = spec.exact.as_ref().map(|u| u(&point));
        let err = exact.map(|e| (pred - e).abs());
        let coords: Vec<String> = point.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{},{},{},{}", coords.join(","), fmt_f64(pred), fmt_opt(exact), fmt_opt(err))?;
        // Odometer increment over the lattice.
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(());
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < n {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Train once with the configured λ and write the run directory:
/// `config.json`, `epochs.csv`, `final.json`, `grid.csv`, `params.bin`.
pub fn cmd_train(config: &RunConfig) -> Result<PathBuf, RunnerError> {
    let cfg = config.resolve()?;
    let dir = create_run_dir(&cfg)?;
    let spec = cfg.problem()?;
    let lambda = cfg.lambda.clone().expect("resolved");
    let mut sample_rng = seeds::derived_rng(cfg.seed, "sample", 0);
    let sets = sampling::assemble(&spec, &cfg.sampling_plan(), &mut sample_rng)?;
    let opts = TrainOptions {
        epochs: cfg.epochs,
        log_every: cfg.log_every,
        adam_epsilon: cfg.adam_epsilon,
    };
    let mut train_rng = seeds::derived_rng(cfg.seed, "train", 0);
    let result = optimizer::train(&lambda, &spec, &sets, &opts, &mut train_rng)?;

    write_epochs_csv(&dir.join("epochs.csv"), &result)?;
    let best = result.best_record();
    let final_json = serde_json::json!({
        "lambda": lambda,
        "best_epoch": result.best_epoch,
        "loss_train": best.loss_train,
        "loss_test": best.loss_test,
        "metric": best.metric,
        "param_count": lambda.param_count(spec.dim),
        "diverged": result.diverged,
        "wall_secs": result.wall_secs,
    });
    fs::write(dir.join("final.json"), serde_json::to_string_pretty(&final_json)? + "\n")?;
    write_solution_grid(
        &dir.join("grid.csv"),
        &result.best_params,
        &spec,
        cfg.grid_n.expect("resolved"),
    )?;
    let mut blob = BufWriter::new(File::create(dir.join("params.bin"))?);
    result.best_params.save_to(&mut blob)?;
    Ok(dir)
}

fn write_trials_csv(
    path: &Path,
    trials: &[TrialRecord],
    dim_names: &[&'static str],
) -> Result<(), RunnerError> {
    let mut w = BufWriter::new(File::create(path)?);
    let enc_cols: Vec<String> = dim_names.iter().map(|n| format!("enc_{n}")).collect();
    writeln!(
        w,
        "iteration,alpha,depth,width,activation,w_gamma,loss_train,loss_test,metric,param_count,best_epoch,diverged,wall_secs,{}",
        enc_cols.join(",")
    )?;
    for t in trials {
        let enc: Vec<String> = t.encoded.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.iteration,
            fmt_f64(t.lambda.learning_rate),
            t.lambda.depth,
            t.lambda.width,
            t.lambda.activation.name(),
            fmt_opt(t.lambda.boundary_weight),
            fmt_f64(t.loss_train),
            fmt_f64(t.loss_test),
            fmt_opt(t.metric),
            t.param_count,
            t.best_epoch,
            t.diverged,
            fmt_f64(t.wall_secs),
            enc.join(","),
        )?;
    }
    Ok(())
}

fn write_hpo_outputs(dir: &Path, cfg: &RunConfig, result: &HpoResult) -> Result<(), RunnerError> {
    let space = cfg.space.clone().expect("resolved");
    let dim_names = space.dim_names();
    write_trials_csv(&dir.join("trials.csv"), &result.trials, &dim_names)?;

    // Losses in ascending order of the objective; diverged trials sort last.
    let mut order: Vec<&TrialRecord> = result.trials.iter().collect();
    order.sort_by(|a, b| {
        let ka = if a.diverged || !a.loss_test.is_finite() { f64::INFINITY } else { a.loss_test };
        let kb = if b.diverged || !b.loss_test.is_finite() { f64::INFINITY } else { b.loss_test };
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut w = BufWriter::new(File::create(dir.join("sorted_losses.csv"))?);
    writeln!(w, "rank,iteration,loss_train,loss_test,metric,diverged")?;
    for (rank, t) in order.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            rank,
            t.iteration,
            fmt_f64(t.loss_train),
            fmt_f64(t.loss_test),
            fmt_opt(t.metric),
            t.diverged
        )?;
    }
    drop(w);

    // Best-so-far trajectory with the metric of the incumbent.
    let mut w = BufWriter::new(File::create(dir.join("best_so_far.csv"))?);
    writeln!(w, "iteration,best_loss_test,metric_at_best")?;
    let mut incumbent: Option<&TrialRecord> = None;
    for (m, t) in result.trials.iter().enumerate() {
        if !t.diverged
            && t.loss_test.is_finite()
            && incumbent.is_none_or(|b| t.loss_test < b.loss_test)
        {
            incumbent = Some(t);
        }
        writeln!(
            w,
            "{},{},{}",
            m,
            fmt_f64(result.best_so_far[m]),
            fmt_opt(incumbent.and_then(|b| b.metric))
        )?;
    }
    drop(w);

    fs::write(dir.join("gp_log.json"), serde_json::to_string_pretty(&result.gp_log)? + "\n")?;

    if let (Some(best_iter), Some(lambda)) = (result.best_iteration, &result.best_lambda) {
        let t = &result.trials[best_iter];
        let best_json = serde_json::json!({
            "iteration": best_iter,
            "lambda": lambda,
            "loss_train": t.loss_train,
            "loss_test": t.loss_test,
            "metric": t.metric,
            "param_count": t.param_count,
        });
        fs::write(dir.join("best.json"), serde_json::to_string_pretty(&best_json)? + "\n")?;
    } else {
        let best_json = serde_json::json!({ "all_diverged": true });
        fs::write(dir.join("best.json"), serde_json::to_string_pretty(&best_json)? + "\n")?;
    }

    if let Some(params) = &result.best_params {
        let mut blob = BufWriter::new(File::create(dir.join("best_params.bin"))?);
        params.save_to(&mut blob)?;
    }

    // Partial-dependence profiles of the final surrogate, one file per
    // encoded dimension. Needs at least two trials to fit.
    if result.trials.len() >= 2 {
        let hpo_cfg = cfg.hpo_config();
        let mut gp_rng = seeds::derived_rng(cfg.seed, "hpo-gp-final", 0);
        match hpo::fit_surrogate(&result.trials, &hpo_cfg, &mut gp_rng) {
            Ok(model) => {
                for (dim, name) in dim_names.iter().enumerate() {
                    let mut pd_rng = seeds::derived_rng(cfg.seed, "pdp", dim as u64);
                    let profile = hpo::partial_dependence(&model, dim, 40, 250, &mut pd_rng);
                    let mut w = BufWriter::new(File::create(dir.join(format!("pdp_{name}.csv")))?);
                    writeln!(w, "grid_encoded,grid_value,mean_target")?;
                    for (g, mu) in profile {
                        writeln!(
                            w,
                            "{},{},{}",
                            fmt_f64(g),
                            fmt_f64(space.decode_component(dim, g)),
                            fmt_f64(mu)
                        )?;
                    }
                }
            }
            Err(e) => log::warn!("final surrogate fit failed ({e}); skipping pdp export"),
        }
    }
    Ok(())
}

/// Run one HPO campaign and write the run directory: `config.json`,
/// `trials.csv`, `best.json`, `best_params.bin`, `sorted_losses.csv`,
/// `best_so_far.csv`, `gp_log.json` and `pdp_<dim>.csv` per encoded dimension.
pub fn cmd_hpo(config: &RunConfig) -> Result<PathBuf, RunnerError> {
    let cfg = config.resolve()?;
    let dir = create_run_dir(&cfg)?;
    let spec = cfg.problem()?;
    let mut sample_rng = seeds::derived_rng(cfg.seed, "sample", 0);
    let sets = sampling::assemble(&spec, &cfg.sampling_plan(), &mut sample_rng)?;
    let result = hpo::run_hpo(&spec, &sets, &cfg.hpo_config())?;
    write_hpo_outputs(&dir, &cfg, &result)?;
    Ok(dir)
}

/// One HPO campaign per (ω, level) cell, with per-cell seeds derived from the
/// master seed, plus a `summary.csv` across cells.
pub fn cmd_sweep(config: &RunConfig) -> Result<PathBuf, RunnerError> {
    let cfg = config.resolve()?;
    if cfg.sweep_omegas.is_empty() || cfg.sweep_levels.is_empty() {
        return Err(RunnerError::Config(ConfigError::Invalid(
            "sweep needs non-empty sweep_omegas and sweep_levels".into(),
        )));
    }
    for &l in &cfg.sweep_levels {
        if !matches!(l, 1 | 3 | 5) {
            return Err(RunnerError::Config(ConfigError::Invalid(format!(
                "unsupported sweep level {l}"
            ))));
        }
    }
    let dir = create_run_dir(&cfg)?;

    let mut w = BufWriter::new(File::create(dir.join("summary.csv"))?);
    writeln!(
        w,
        "omega,level,n_per_dim,precision,best_iteration,best_loss_test,best_metric,alpha,depth,width,activation,w_gamma,param_count"
    )?;
    for &omega in &cfg.sweep_omegas {
        for &level in &cfg.sweep_levels {
            let mut cell_cfg = cfg.clone();
            cell_cfg.omega = omega;
            cell_cfg.level = Some(level);
            cell_cfg.sweep_omegas = Vec::new();
            cell_cfg.sweep_levels = Vec::new();
            // Cells are reproducible in isolation under their derived seed.
            cell_cfg.seed = seeds::derive_seed(
                cfg.seed,
                "sweep-cell",
                (u64::from(omega) << 32) | u64::from(level),
            );
            cell_cfg.out_dir = dir.join("cells").join(format!("omega{omega}_level{level}"));
            let cell_cfg = cell_cfg.resolve()?;
            let cell_dir = cmd_hpo(&cell_cfg)?;
            log::info!("sweep cell omega={omega} level={level} written to {}", cell_dir.display());

            let (n_x, _) = sampling::level_size(level)?;
            let best: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(cell_dir.join("best.json"))?)
                    .map_err(ConfigError::Parse)?;
            let row = if best.get("all_diverged").is_some() {
                format!("{omega},{level},{n_x},{},,,,,,,,", fmt_f64(precision_of(n_x, omega)))
            } else {
                let lam = &best["lambda"];
                format!(
                    "{omega},{level},{n_x},{},{},{},{},{},{},{},{},{},{}",
                    fmt_f64(precision_of(n_x, omega)),
                    best["iteration"],
                    fmt_f64(best["loss_test"].as_f64().unwrap_or(f64::NAN)),
                    best["metric"].as_f64().map(fmt_f64).unwrap_or_default(),
                    fmt_f64(lam["learning_rate"].as_f64().unwrap_or(f64::NAN)),
                    lam["depth"],
                    lam["width"],
                    lam["activation"].as_str().unwrap_or(""),
                    lam["boundary_weight"].as_f64().map(fmt_f64).unwrap_or_default(),
                    best["param_count"],
                )
            };
            writeln!(w, "{row}")?;
        }
    }
    Ok(dir)
}

impl From<serde_json::Error> for RunnerError {
    fn from(e: serde_json::Error) -> Self {
        RunnerError::Config(ConfigError::Parse(e))
    }
}
