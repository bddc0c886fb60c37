//! Bayesian hyper-parameter optimization of the training configuration.
//!
//! One campaign runs M trials. Trial 0 evaluates the configured initial point;
//! trials up to `n_random` draw uniformly from the encoded search space; later
//! trials fit a GP surrogate to all (encoded λ, loss) pairs seen so far and
//! evaluate the candidate maximizing expected improvement over a dense random
//! candidate set. The per-trial objective is the test loss of the best logged
//! training epoch.
//!
//! Encoding: `[α, depth, width, one-hot σ over (sin, sigmoid, tanh), w_Γ]`,
//! each scalar min-max scaled to `[0,1]` (α and w_Γ in log10), integers treated
//! as continuous and rounded half-away-from-zero on decode, categorical decode
//! by largest one-hot component with first-index tie-break.
//!
//! Targets fed to the GP are log10-transformed by default (losses span many
//! decades); diverged trials contribute a finite penalty of 10x the worst
//! finite loss seen so far (1e10 before any finite loss exists) so the
//! surrogate learns to avoid those regions.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::gp::{self, GpConfig, GpError, GpHyper, GpModel};
use crate::net::{Activation, Architecture};
use crate::optimizer::{self, TrainError, TrainOptions};
use crate::problem::ProblemSpec;
use crate::sampling::CollocationSet;
use crate::seeds;

#[derive(Debug, Error)]
pub enum HpoError {
    #[error("hyper-parameters outside the search space: {0}")]
    OutOfRange(String),
    #[error("encoded vector has dimension {got}, space expects {expected}")]
    BadDimension { expected: usize, got: usize },
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("invalid campaign configuration: {0}")]
    BadConfig(String),
}

/// One point λ of the search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub learning_rate: f64,
    /// Number of hidden layers.
    pub depth: usize,
    /// Neurons per hidden layer.
    pub width: usize,
    pub activation: Activation,
    /// Boundary loss weight w_Γ; absent when the boundary term is not tuned
    /// (Dirichlet problems with hard constraints).
    pub boundary_weight: Option<f64>,
}

impl HyperParams {
    pub fn param_count(&self, input_dim: usize) -> usize {
        Architecture::constant_width(input_dim, self.depth, self.width, self.activation)
            .map(|a| a.param_count())
            .unwrap_or(0)
    }
}

impl std::fmt::Display for HyperParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.boundary_weight {
            Some(w) => write!(
                f,
                "[{:.3e}, {}, {}, {}, {:.3e}]",
                self.learning_rate,
                self.depth,
                self.width,
                self.activation.name(),
                w
            ),
            None => write!(
                f,
                "[{:.3e}, {}, {}, {}]",
                self.learning_rate,
                self.depth,
                self.width,
                self.activation.name()
            ),
        }
    }
}

/// Bounds of the tuned hyper-parameters. Activations are always the fixed
/// ordered triple (sin, sigmoid, tanh).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Learning-rate bounds, log10-scaled in the encoding.
    pub learning_rate: (f64, f64),
    pub depth: (usize, usize),
    pub width: (usize, usize),
    /// Boundary-weight bounds (log10-scaled); `None` removes the dimension.
    pub boundary_weight: Option<(f64, f64)>,
}

impl SearchSpace {
    /// Dirichlet defaults: α ∈ [1e-4, 5e-2], N ∈ [5, 500], L-1 ∈ [1, 10], no w_Γ.
    pub fn dirichlet_default() -> Self {
        Self {
            learning_rate: (1e-4, 5e-2),
            depth: (1, 10),
            width: (5, 500),
            boundary_weight: None,
        }
    }

    /// Neumann defaults: α ∈ [1e-5, 5e-2], N ∈ [5, 500], L-1 ∈ [1, 5], w_Γ ∈ [1, 1e7].
    pub fn neumann_default() -> Self {
        Self {
            learning_rate: (1e-5, 5e-2),
            depth: (1, 5),
            width: (5, 500),
            boundary_weight: Some((1.0, 1e7)),
        }
    }

    /// Encoded dimension: 3 scalars + 3 one-hot components (+1 with w_Γ).
    pub fn dim(&self) -> usize {
        6 + usize::from(self.boundary_weight.is_some())
    }

    /// Column names of the encoded dimensions, in encoding order.
    pub fn dim_names(&self) -> Vec<&'static str> {
        let mut names = vec!["alpha", "depth", "width", "act_sin", "act_sigmoid", "act_tanh"];
        if self.boundary_weight.is_some() {
            names.push("w_gamma");
        }
        names
    }

    /// Natural-units value of encoded coordinate `v` along dimension `dim`
    /// (α and w_Γ exponentiated, depth/width de-scaled, one-hot passed through).
    pub fn decode_component(&self, dim: usize, v: f64) -> f64 {
        match dim {
            0 => log_unscale(v, self.learning_rate),
            1 => unscale_int(v, self.depth) as f64,
            2 => unscale_int(v, self.width) as f64,
            6 if self.boundary_weight.is_some() => {
                log_unscale(v, self.boundary_weight.unwrap())
            }
            _ => v,
        }
    }
}

fn log_scale(v: f64, range: (f64, f64)) -> f64 {
    let lo = range.0.log10();
    let hi = range.1.log10();
    if hi > lo {
        (v.log10() - lo) / (hi - lo)
    } else {
        0.0
    }
}

fn log_unscale(t: f64, range: (f64, f64)) -> f64 {
    let lo = range.0.log10();
    let hi = range.1.log10();
    10f64.powf(lo + t.clamp(0.0, 1.0) * (hi - lo))
}

fn scale_int(v: usize, range: (usize, usize)) -> f64 {
    if range.1 > range.0 {
        (v - range.0) as f64 / (range.1 - range.0) as f64
    } else {
        0.0
    }
}

fn unscale_int(t: f64, range: (usize, usize)) -> usize {
    let lo = range.0 as f64;
    let hi = range.1 as f64;
    let raw = (lo + t.clamp(0.0, 1.0) * (hi - lo)).round();
    (raw as usize).clamp(range.0, range.1)
}

/// Fixed one-hot order of the categorical dimension.
pub const ACTIVATION_ORDER: [Activation; 3] =
    [Activation::Sin, Activation::Sigmoid, Activation::Tanh];

/// Encode λ to the normalized vector described in the module docs.
pub fn encode(lambda: &HyperParams, space: &SearchSpace) -> Result<Vec<f64>, HpoError> {
    if lambda.learning_rate < space.learning_rate.0 || lambda.learning_rate > space.learning_rate.1
    {
        return Err(HpoError::OutOfRange(format!(
            "learning rate {} outside [{}, {}]",
            lambda.learning_rate, space.learning_rate.0, space.learning_rate.1
        )));
    }
    if lambda.depth < space.depth.0 || lambda.depth > space.depth.1 {
        return Err(HpoError::OutOfRange(format!(
            "depth {} outside [{}, {}]",
            lambda.depth, space.depth.0, space.depth.1
        )));
    }
    if lambda.width < space.width.0 || lambda.width > space.width.1 {
        return Err(HpoError::OutOfRange(format!(
            "width {} outside [{}, {}]",
            lambda.width, space.width.0, space.width.1
        )));
    }
    let mut enc = vec![
        log_scale(lambda.learning_rate, space.learning_rate),
        scale_int(lambda.depth, space.depth),
        scale_int(lambda.width, space.width),
    ];
    for act in ACTIVATION_ORDER {
        enc.push(if act == lambda.activation { 1.0 } else { 0.0 });
    }
    match (space.boundary_weight, lambda.boundary_weight) {
        (Some(range), Some(w)) => {
            if w < range.0 || w > range.1 {
                return Err(HpoError::OutOfRange(format!(
                    "boundary weight {w} outside [{}, {}]",
                    range.0, range.1
                )));
            }
            enc.push(log_scale(w, range));
        }
        (None, None) => {}
        (Some(_), None) => {
            return Err(HpoError::OutOfRange(
                "space tunes the boundary weight but λ has none".into(),
            ))
        }
        (None, Some(_)) => {
            return Err(HpoError::OutOfRange(
                "λ carries a boundary weight but the space does not tune it".into(),
            ))
        }
    }
    Ok(enc)
}

/// Categorical decode: the option with the largest component wins; ties go to
/// the earliest option in the given order.
pub fn decode_activation(components: &[f64], options: &[Activation]) -> Activation {
    debug_assert_eq!(components.len(), options.len());
    let mut best = 0;
    for i in 1..components.len() {
        if components[i] > components[best] {
            best = i;
        }
    }
    options[best]
}

/// Decode an encoded vector back to λ; out-of-range coordinates are clamped,
/// so any vector of the right dimension decodes to a valid point.
pub fn decode(vector: &[f64], space: &SearchSpace) -> Result<HyperParams, HpoError> {
    if vector.len() != space.dim() {
        return Err(HpoError::BadDimension { expected: space.dim(), got: vector.len() });
    }
    let activation = decode_activation(&vector[3..6], &ACTIVATION_ORDER);
    Ok(HyperParams {
        learning_rate: log_unscale(vector[0], space.learning_rate),
        depth: unscale_int(vector[1], space.depth),
        width: unscale_int(vector[2], space.width),
        activation,
        boundary_weight: space.boundary_weight.map(|range| log_unscale(vector[6], range)),
    })
}

/// A uniform draw from the encoded space, decoded to a valid λ.
pub fn random_lambda<R: Rng>(space: &SearchSpace, rng: &mut R) -> HyperParams {
    let v: Vec<f64> = (0..space.dim()).map(|_| rng.gen::<f64>()).collect();
    decode(&v, space).expect("dimension is correct by construction")
}

/// Expected improvement for minimization at a point with posterior `(mean, std)`
/// given the incumbent `best` and exploration offset `xi`:
/// `EI = (best - mean - xi)·Φ(z) + std·φ(z)`, `z = (best - mean - xi)/std`;
/// the `std = 0` limit is `max(best - mean - xi, 0)`.
pub fn expected_improvement(mean: f64, std: f64, best: f64, xi: f64) -> f64 {
    let imp = best - mean - xi;
    if std <= 0.0 {
        return imp.max(0.0);
    }
    let z = imp / std;
    let cdf = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (imp * cdf + std * pdf).max(0.0)
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}

/// Pick the next λ by maximizing EI over `n_candidates` uniform encoded
/// vectors (equivalently, minimizing the negative-EI acquisition).
/// Ties keep the earliest candidate; deterministic for a fixed rng.
pub fn propose_next<R: Rng>(
    model: &GpModel,
    best_observed: f64,
    space: &SearchSpace,
    xi: f64,
    n_candidates: usize,
    rng: &mut R,
) -> Result<HyperParams, HpoError> {
    if model.input_dim() != space.dim() {
        return Err(HpoError::BadDimension { expected: space.dim(), got: model.input_dim() });
    }
    let n = n_candidates.max(1);
    let candidates: Vec<Vec<f64>> =
        (0..n).map(|_| (0..space.dim()).map(|_| rng.gen::<f64>()).collect()).collect();
    let scores: Vec<f64> = candidates
        .iter()
        .map(|c| {
            let (mu, sigma) = model.predict(c);
            expected_improvement(mu, sigma, best_observed, xi)
        })
        .collect();
    decode(&candidates[argmax_first(&scores)], space)
}

/// Surrogate loss profile along one encoded dimension: for each grid value,
/// the GP posterior mean averaged over `n_avg` uniform draws of the remaining
/// dimensions (one fixed draw set shared by the whole grid).
pub fn partial_dependence<R: Rng>(
    model: &GpModel,
    dim: usize,
    grid_size: usize,
    n_avg: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let d = model.input_dim();
    assert!(dim < d, "dimension index out of range");
    let samples: Vec<Vec<f64>> =
        (0..n_avg.max(1)).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    let grid_size = grid_size.max(2);
    (0..grid_size)
        .map(|j| {
            let g = j as f64 / (grid_size - 1) as f64;
            let mut acc = 0.0;
            let mut q = vec![0.0; d];
            for s in &samples {
                q.copy_from_slice(s);
                q[dim] = g;
                acc += model.predict(&q).0;
            }
            (g, acc / samples.len() as f64)
        })
        .collect()
}

/// One evaluated trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub iteration: usize,
    pub lambda: HyperParams,
    pub encoded: Vec<f64>,
    /// Training loss of the best logged epoch.
    pub loss_train: f64,
    /// Test loss of the best logged epoch; the HPO objective.
    pub loss_test: f64,
    pub metric: Option<f64>,
    pub param_count: usize,
    pub best_epoch: u64,
    pub diverged: bool,
    pub wall_secs: f64,
}

/// GP fit snapshot for the run log.
#[derive(Debug, Clone, Serialize)]
pub struct GpFitLog {
    pub iteration: usize,
    pub num_points: usize,
    pub log10_targets: bool,
    #[serde(flatten)]
    pub hyper: GpHyper,
}

/// Full campaign outcome.
#[derive(Debug, Clone)]
pub struct HpoResult {
    pub trials: Vec<TrialRecord>,
    /// Iteration index of λ_M⁺, the non-diverged trial with minimal test loss.
    pub best_iteration: Option<usize>,
    pub best_lambda: Option<HyperParams>,
    /// Trained parameters of the best trial.
    pub best_params: Option<crate::net::MlpParams>,
    /// Best finite test loss after each iteration (∞ until one exists).
    pub best_so_far: Vec<f64>,
    pub all_diverged: bool,
    pub gp_log: Vec<GpFitLog>,
}

#[derive(Debug, Clone)]
pub struct HpoConfig {
    pub space: SearchSpace,
    /// λ₀, evaluated at iteration 0.
    pub initial: HyperParams,
    /// Total number of iterations M.
    pub iterations: usize,
    /// Iterations before the surrogate takes over (including λ₀).
    pub n_random: usize,
    pub epochs: u64,
    pub log_every: u64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub xi: f64,
    pub n_candidates: usize,
    pub log10_targets: bool,
    pub gp: GpConfig,
}

impl HpoConfig {
    pub fn new(space: SearchSpace, initial: HyperParams) -> Self {
        Self {
            space,
            initial,
            iterations: 15,
            n_random: 10,
            epochs: 2000,
            log_every: 100,
            adam_epsilon: 1e-7,
            seed: 11,
            xi: 0.01,
            n_candidates: 10_000,
            log10_targets: true,
            gp: GpConfig::default(),
        }
    }
}

/// GP targets from trial history: finite test losses pass through (optionally
/// log10-compressed), diverged trials get 10x the worst finite loss so far.
fn gp_targets(trials: &[TrialRecord], log10_targets: bool) -> Vec<f64> {
    let worst_finite = trials
        .iter()
        .filter(|t| !t.diverged && t.loss_test.is_finite())
        .map(|t| t.loss_test)
        .fold(f64::NEG_INFINITY, f64::max);
    let penalty = if worst_finite.is_finite() { 10.0 * worst_finite.max(1e-12) } else { 1e10 };
    trials
        .iter()
        .map(|t| {
            let raw = if !t.diverged && t.loss_test.is_finite() { t.loss_test } else { penalty };
            if log10_targets {
                raw.max(1e-12).log10()
            } else {
                raw
            }
        })
        .collect()
}

/// Fit the surrogate to the whole trial history (used at each surrogate
/// iteration and for the final partial-dependence export).
pub fn fit_surrogate<R: Rng>(
    trials: &[TrialRecord],
    config: &HpoConfig,
    rng: &mut R,
) -> Result<GpModel, HpoError> {
    let xs: Vec<Vec<f64>> = trials.iter().map(|t| t.encoded.clone()).collect();
    let ys = gp_targets(trials, config.log10_targets);
    Ok(gp::fit(xs, &ys, &config.gp, rng)?)
}

/// Run one campaign against a fixed problem and fixed collocation sets.
///
/// Sub-seeds for collocation-independent streams are derived from
/// `config.seed` with fixed tags (`hpo-random`, `hpo-gp`, `hpo-candidates`,
/// `trial`), so a campaign is reproducible bit-for-bit.
pub fn run_hpo(
    spec: &ProblemSpec,
    sets: &CollocationSet,
    config: &HpoConfig,
) -> Result<HpoResult, HpoError> {
    if config.iterations == 0 {
        return Err(HpoError::BadConfig("iterations must be >= 1".into()));
    }
    // λ₀ must be inside the space so its encoding enters the GP history.
    encode(&config.initial, &config.space)?;

    let opts = TrainOptions {
        epochs: config.epochs,
        log_every: config.log_every,
        adam_epsilon: config.adam_epsilon,
    };

    let mut trials: Vec<TrialRecord> = Vec::with_capacity(config.iterations);
    let mut gp_log: Vec<GpFitLog> = Vec::new();
    let mut best_so_far: Vec<f64> = Vec::with_capacity(config.iterations);
    let mut best: Option<(usize, f64)> = None;
    let mut best_params: Option<crate::net::MlpParams> = None;

    for m in 0..config.iterations {
        let lambda = if m == 0 {
            config.initial.clone()
        } else if m < config.n_random || trials.len() < 2 {
            let mut rng = seeds::derived_rng(config.seed, "hpo-random", m as u64);
            random_lambda(&config.space, &mut rng)
        } else {
            let mut gp_rng = seeds::derived_rng(config.seed, "hpo-gp", m as u64);
            match fit_surrogate(&trials, config, &mut gp_rng) {
                Ok(model) => {
                    gp_log.push(GpFitLog {
                        iteration: m,
                        num_points: trials.len(),
                        log10_targets: config.log10_targets,
                        hyper: model.hyper(),
                    });
                    let targets = gp_targets(&trials, config.log10_targets);
                    let incumbent = targets.iter().copied().fold(f64::INFINITY, f64::min);
                    let mut cand_rng =
                        seeds::derived_rng(config.seed, "hpo-candidates", m as u64);
                    propose_next(
                        &model,
                        incumbent,
                        &config.space,
                        config.xi,
                        config.n_candidates,
                        &mut cand_rng,
                    )?
                }
                Err(e) => {
                    log::warn!("surrogate fit failed at iteration {m} ({e}); sampling randomly");
                    let mut rng = seeds::derived_rng(config.seed, "hpo-random", m as u64);
                    random_lambda(&config.space, &mut rng)
                }
            }
        };

        let encoded = encode(&lambda, &config.space)?;
        let mut trial_rng = seeds::derived_rng(config.seed, "trial", m as u64);
        let outcome = optimizer::train(&lambda, spec, sets, &opts, &mut trial_rng)?;
        let record_src = outcome.best_record().clone();
        let diverged = outcome.diverged || !record_src.loss_test.is_finite();
        log::info!(
            "iteration {m}: λ = {lambda}, loss_test = {:.6e}{}",
            record_src.loss_test,
            if diverged { " (diverged)" } else { "" }
        );
        let record = TrialRecord {
            iteration: m,
            lambda: lambda.clone(),
            encoded,
            loss_train: record_src.loss_train,
            loss_test: record_src.loss_test,
            metric: record_src.metric,
            param_count: lambda.param_count(spec.dim),
            best_epoch: outcome.best_epoch,
            diverged,
            wall_secs: outcome.wall_secs,
        };
        if !diverged && best.is_none_or(|(_, b)| record.loss_test < b) {
            best = Some((m, record.loss_test));
            best_params = Some(outcome.best_params);
        }
        trials.push(record);
        best_so_far.push(best.map_or(f64::INFINITY, |(_, b)| b));
    }

    let all_diverged = best.is_none();
    if all_diverged {
        log::warn!("every trial diverged; no best configuration is defined");
    }
    Ok(HpoResult {
        best_iteration: best.map(|(m, _)| m),
        best_lambda: best.map(|(m, _)| trials[m].lambda.clone()),
        best_params,
        best_so_far,
        all_diverged,
        trials,
        gp_log,
    })
}
