//! ADAM and the full-batch training loop.
//!
//! One epoch is one gradient of the composite loss over all training
//! collocation points (the sets are fixed, so there is no minibatching).
//! Losses are logged every `log_every` epochs plus epochs 0 and K, and the
//! returned parameters are those of the best *logged* training loss; tracking
//! only logged epochs approximates the argmin over all epochs without storing
//! a parameter snapshot per epoch.

use std::time::Instant;

use rand::Rng;
use thiserror::Error;

use crate::hpo::HyperParams;
use crate::loss::{self, LossBreakdown, LossError, LossWeights, SetView};
use crate::net::{Architecture, MlpParams, NetError};
use crate::problem::ProblemSpec;
use crate::sampling::CollocationSet;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("gradient and parameter shapes differ: {params} vs {grad}")]
    ShapeMismatch { params: usize, grad: usize },
    #[error("non-finite gradient")]
    NonFiniteGradient,
}

/// ADAM accumulator state: step counter, first and second moment vectors.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    /// Defaults β₁ = 0.9, β₂ = 0.999, ε = 1e-7.
    pub fn new(n_params: usize, alpha: f64) -> Self {
        Self::with_epsilon(n_params, alpha, 1e-7)
    }

    /// ε = 1e-8 matches the other common framework default.
    pub fn with_epsilon(n_params: usize, alpha: f64, epsilon: f64) -> Self {
        Self {
            alpha,
            beta1: 0.9,
            beta2: 0.999,
            epsilon,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    /// One update: moment updates with elementwise `g²`, bias corrections
    /// `m̂ = m/(1-β₁^k)`, `v̂ = v/(1-β₂^k)`, then `θ ← θ - α·m̂/(√v̂ + ε)`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<(), TrainError> {
        if params.len() != grad.len() || params.len() != self.m.len() {
            return Err(TrainError::ShapeMismatch { params: params.len(), grad: grad.len() });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(TrainError::NonFiniteGradient);
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.alpha * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Loss curves sampled at one logged epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: u64,
    pub loss_train: f64,
    pub loss_test: f64,
    pub pde_term: f64,
    pub bc_term: f64,
    pub data_term: f64,
    pub metric: Option<f64>,
    pub elapsed_secs: f64,
}

/// Outcome of one training run.
#[derive(Debug, Clone)]
pub struct TrainResult {
    /// Parameters at the logged epoch with the smallest training loss.
    pub best_params: MlpParams,
    pub best_epoch: u64,
    pub history: Vec<EpochRecord>,
    pub diverged: bool,
    pub wall_secs: f64,
}

impl TrainResult {
    pub fn best_record(&self) -> &EpochRecord {
        self.history.iter().find(|r| r.epoch == self.best_epoch).expect("best epoch is logged")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub epochs: u64,
    pub log_every: u64,
    pub adam_epsilon: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { epochs: 2000, log_every: 100, adam_epsilon: 1e-7 }
    }
}

/// Trains a freshly Glorot-initialized network for `opts.epochs` full-batch
/// ADAM epochs. Deterministic for a fixed `rng` seed. A non-finite loss or
/// gradient marks the run diverged; the best logged iterate so far is still
/// returned.
pub fn train<R: Rng>(
    lambda: &HyperParams,
    spec: &ProblemSpec,
    sets: &CollocationSet,
    opts: &TrainOptions,
    rng: &mut R,
) -> Result<TrainResult, TrainError> {
    let arch = Architecture::constant_width(spec.dim, lambda.depth, lambda.width, lambda.activation)
        .map_err(TrainError::Net)?;
    let params = MlpParams::glorot_init(arch, rng);
    train_from(params, lambda, spec, sets, opts)
}

/// Training loop for already-initialized parameters.
pub fn train_from(
    mut params: MlpParams,
    lambda: &HyperParams,
    spec: &ProblemSpec,
    sets: &CollocationSet,
    opts: &TrainOptions,
) -> Result<TrainResult, TrainError> {
    assert!(opts.epochs >= 1, "training needs at least one epoch");
    let weights = LossWeights::with_boundary(lambda.boundary_weight.unwrap_or(1.0));
    let train_view = SetView::train(sets);
    let test_view = SetView::test(sets);
    let mut adam =
        AdamState::with_epsilon(params.values().len(), lambda.learning_rate, opts.adam_epsilon);

    let started = Instant::now();
    let mut history: Vec<EpochRecord> = Vec::new();
    let mut best_epoch = 0u64;
    let mut best_loss = f64::INFINITY;
    let mut best_params = params.clone();
    let mut diverged = false;

    let log_epoch = |epoch: u64,
                         params: &MlpParams,
                         history: &mut Vec<EpochRecord>,
                         best_epoch: &mut u64,
                         best_loss: &mut f64,
                         best_params: &mut MlpParams|
     -> Result<bool, TrainError> {
        let tr = loss::composite_loss(params, train_view, &weights, spec)?;
        let te = loss::composite_loss(params, test_view, &weights, spec)?;
        let metric = match &spec.exact {
            Some(_) => Some(loss::relative_l2_metric(params, test_view.domain, spec)?),
            None => None,
        };
        history.push(EpochRecord {
            epoch,
            loss_train: tr.total,
            loss_test: te.total,
            pde_term: tr.pde_term,
            bc_term: tr.bc_term,
            data_term: tr.data_term,
            metric,
            elapsed_secs: started.elapsed().as_secs_f64(),
        });
        if tr.total.is_finite() && tr.total < *best_loss {
            *best_loss = tr.total;
            *best_epoch = epoch;
            *best_params = params.clone();
        }
        Ok(tr.is_finite() && te.total.is_finite())
    };

    if !log_epoch(0, &params, &mut history, &mut best_epoch, &mut best_loss, &mut best_params)? {
        return Ok(TrainResult {
            best_params,
            best_epoch,
            history,
            diverged: true,
            wall_secs: started.elapsed().as_secs_f64(),
        });
    }

    for epoch in 1..=opts.epochs {
        let step = loss::composite_loss_gradient(&params, train_view, &weights, spec)
            .and_then(|(breakdown, grad)| {
                if !breakdown.is_finite() {
                    return Err(LossError::Net(NetError::NonFinite("epoch loss")));
                }
                adam.step(params.values_mut(), &grad).map_err(|_| {
                    LossError::Net(NetError::NonFinite("adam update"))
                })?;
                Ok(breakdown)
            });
        match step {
            Ok(_) => {}
            Err(LossError::Net(NetError::NonFinite(_))) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
        if epoch == opts.epochs || (opts.log_every > 0 && epoch % opts.log_every == 0) {
            let ok = log_epoch(
                epoch,
                &params,
                &mut history,
                &mut best_epoch,
                &mut best_loss,
                &mut best_params,
            )?;
            if !ok {
                diverged = true;
                break;
            }
        }
    }

    Ok(TrainResult {
        best_params,
        best_epoch,
        history,
        diverged,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

/// Composite losses and metric of given parameters, used to report the
/// best-iterate values after training.
pub fn evaluate(
    params: &MlpParams,
    lambda: &HyperParams,
    spec: &ProblemSpec,
    sets: &CollocationSet,
) -> Result<(LossBreakdown, LossBreakdown, Option<f64>), TrainError> {
    let weights = LossWeights::with_boundary(lambda.boundary_weight.unwrap_or(1.0));
    let tr = loss::composite_loss(params, SetView::train(sets), &weights, spec)?;
    let te = loss::composite_loss(params, SetView::test(sets), &weights, spec)?;
    let metric = match &spec.exact {
        Some(_) => Some(loss::relative_l2_metric(params, &sets.domain_test, spec)?),
        None => None,
    };
    Ok((tr, te, metric))
}
