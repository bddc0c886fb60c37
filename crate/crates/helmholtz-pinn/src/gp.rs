//! Gaussian-process regression surrogate: constant (zero) mean on
//! standardized targets, anisotropic Matérn-5/2 kernel by default, exact
//! posterior via Cholesky factorization.
//!
//! Kernel hyper-parameters are fitted by maximizing the log marginal
//! likelihood with a multi-start Nelder-Mead search in log space; the
//! surrogate never sees more than a few hundred points, so a gradient-free
//! search is robust and plenty fast. A fitted [`GpModel`] is immutable and
//! safe to share across threads for prediction.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("gp regression needs at least 2 points, got {0}")]
    InsufficientData(usize),
    #[error("inputs have inconsistent dimensions")]
    Dimension,
    #[error("non-finite training data")]
    NonFinite,
    #[error("covariance factorization failed even with jitter up to {max_jitter:e}")]
    Factorization { max_jitter: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Matern52,
    SquaredExponential,
}

/// How observation noise enters the covariance diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Noise variance fitted by MLE alongside the kernel parameters.
    Learned,
    /// Fixed noise variance (use a tiny value for noise-free interpolation).
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct GpConfig {
    pub kernel: KernelKind,
    pub noise: NoiseModel,
    /// Number of Nelder-Mead starts (first one from fixed defaults).
    pub restarts: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self { kernel: KernelKind::Matern52, noise: NoiseModel::Learned, restarts: 5 }
    }
}

/// Fitted kernel hyper-parameters, serialized into HPO run logs.
#[derive(Debug, Clone, Serialize)]
pub struct GpHyper {
    pub kernel: KernelKind,
    pub signal_var: f64,
    pub length_scales: Vec<f64>,
    pub noise_var: f64,
    /// Diagonal jitter that was required for factorization.
    pub jitter: f64,
    /// Log marginal likelihood of the standardized targets at these values.
    pub log_marginal_likelihood: f64,
}

/// Matérn-5/2 covariance with per-dimension length scales:
/// `σ²(1 + √5ρ + 5ρ²/3)·exp(-√5ρ)` with `ρ² = Σ((a_i-b_i)/ℓ_i)²`.
pub fn matern52(a: &[f64], b: &[f64], length_scales: &[f64], signal_var: f64) -> f64 {
    let rho = scaled_distance(a, b, length_scales);
    let s5 = 5.0f64.sqrt() * rho;
    signal_var * (1.0 + s5 + 5.0 * rho * rho / 3.0) * (-s5).exp()
}

/// Squared-exponential covariance `σ²·exp(-ρ²/2)`.
pub fn squared_exponential(a: &[f64], b: &[f64], length_scales: &[f64], signal_var: f64) -> f64 {
    let rho = scaled_distance(a, b, length_scales);
    signal_var * (-0.5 * rho * rho).exp()
}

fn scaled_distance(a: &[f64], b: &[f64], length_scales: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), length_scales.len());
    a.iter()
        .zip(b)
        .zip(length_scales)
        .map(|((x, y), l)| {
            let d = (x - y) / l;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn kernel_value(kind: KernelKind, a: &[f64], b: &[f64], ls: &[f64], signal: f64) -> f64 {
    match kind {
        KernelKind::Matern52 => matern52(a, b, ls, signal),
        KernelKind::SquaredExponential => squared_exponential(a, b, ls, signal),
    }
}

/// Exact GP posterior over standardized targets.
#[derive(Debug, Clone)]
pub struct GpModel {
    x: Vec<Vec<f64>>,
    kernel: KernelKind,
    signal_var: f64,
    length_scales: Vec<f64>,
    noise_var: f64,
    jitter: f64,
    y_mean: f64,
    y_scale: f64,
    chol: Cholesky<f64, Dyn>,
    /// `K⁻¹ y` on standardized targets.
    weights: DVector<f64>,
    lml: f64,
}

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

/// Cholesky of `K + (noise + jitter)·I`, escalating jitter by 100x up to the cap.
fn factorize_with_jitter(
    x: &[Vec<f64>],
    kind: KernelKind,
    ls: &[f64],
    signal: f64,
    noise: f64,
) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let m = x.len();
    let base = DMatrix::from_fn(m, m, |i, j| kernel_value(kind, &x[i], &x[j], ls, signal));
    let mut jitter = JITTER_START;
    loop {
        let mut k = base.clone();
        for i in 0..m {
            k[(i, i)] += noise + jitter;
        }
        if let Some(c) = Cholesky::new(k) {
            return Some((c, jitter));
        }
        if jitter >= JITTER_MAX {
            return None;
        }
        jitter *= 100.0;
    }
}

fn log_marginal_likelihood(chol: &Cholesky<f64, Dyn>, ys: &DVector<f64>) -> f64 {
    let alpha = chol.solve(ys);
    let m = ys.len() as f64;
    let log_det_half: f64 = (0..ys.len()).map(|i| chol.l_dirty()[(i, i)].ln()).sum();
    -0.5 * ys.dot(&alpha) - log_det_half - 0.5 * m * (2.0 * std::f64::consts::PI).ln()
}

/// Fit a GP to `(x, y)` by standardizing the targets and maximizing the log
/// marginal likelihood over log length scales, log signal variance and (when
/// learned) log noise variance.
pub fn fit<R: Rng>(
    x: Vec<Vec<f64>>,
    y: &[f64],
    config: &GpConfig,
    rng: &mut R,
) -> Result<GpModel, GpError> {
    let m = x.len();
    if m < 2 {
        return Err(GpError::InsufficientData(m));
    }
    if y.len() != m {
        return Err(GpError::Dimension);
    }
    let dim = x[0].len();
    if x.iter().any(|row| row.len() != dim) {
        return Err(GpError::Dimension);
    }
    if x.iter().flatten().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(GpError::NonFinite);
    }

    let y_mean = y.iter().sum::<f64>() / m as f64;
    let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / m as f64;
    let y_scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let ys = DVector::from_iterator(m, y.iter().map(|v| (v - y_mean) / y_scale));

    // Search vector in log10 space: [ls_1..ls_dim, signal, noise?].
    let learned_noise = matches!(config.noise, NoiseModel::Learned);
    let n_params = dim + 1 + usize::from(learned_noise);
    let lower = {
        let mut b = vec![-2.0; dim];
        b.push(-3.0);
        if learned_noise {
            b.push(-9.0);
        }
        b
    };
    let upper = {
        let mut b = vec![2.0; dim];
        b.push(3.0);
        if learned_noise {
            b.push(0.0);
        }
        b
    };

    let fixed_noise = match config.noise {
        NoiseModel::Fixed(n) => n,
        NoiseModel::Learned => 0.0,
    };
    let objective = |p: &[f64]| -> f64 {
        if p.iter().zip(&lower).any(|(v, lo)| v < lo) || p.iter().zip(&upper).any(|(v, hi)| v > hi)
        {
            return f64::INFINITY;
        }
        let ls: Vec<f64> = p[..dim].iter().map(|v| 10f64.powf(*v)).collect();
        let signal = 10f64.powf(p[dim]);
        let noise = if learned_noise { 10f64.powf(p[dim + 1]) } else { fixed_noise };
        match factorize_with_jitter(&x, config.kernel, &ls, signal, noise) {
            Some((chol, _)) => -log_marginal_likelihood(&chol, &ys),
            None => f64::INFINITY,
        }
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start_idx in 0..config.restarts.max(1) {
        let start: Vec<f64> = if start_idx == 0 {
            let mut s = vec![0.0; dim];
            s.push(0.0);
            if learned_noise {
                s.push(-6.0);
            }
            s
        } else {
            let mut s: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.0)).collect();
            s.push(rng.gen_range(-1.0..1.0));
            if learned_noise {
                s.push(rng.gen_range(-8.0..-2.0));
            }
            s
        };
        debug_assert_eq!(start.len(), n_params);
        let (p, f) = nelder_mead(&objective, &start, 0.5, 250, 1e-9);
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((p, f));
        }
    }
    let (p, neg_lml) = best.expect("at least one start");
    if !neg_lml.is_finite() {
        return Err(GpError::Factorization { max_jitter: JITTER_MAX });
    }

    let length_scales: Vec<f64> = p[..dim].iter().map(|v| 10f64.powf(*v)).collect();
    let signal_var = 10f64.powf(p[dim]);
    let noise_var = if learned_noise { 10f64.powf(p[dim + 1]) } else { fixed_noise };
    GpModel::build(
        x,
        ys,
        y_mean,
        y_scale,
        config.kernel,
        length_scales,
        signal_var,
        noise_var,
    )
}

impl GpModel {
    /// Build a model with explicit kernel hyper-parameters (no MLE). Targets
    /// are still standardized internally.
    pub fn with_hyperparams(
        x: Vec<Vec<f64>>,
        y: &[f64],
        kernel: KernelKind,
        length_scales: Vec<f64>,
        signal_var: f64,
        noise_var: f64,
    ) -> Result<Self, GpError> {
        let m = x.len();
        if m < 2 {
            return Err(GpError::InsufficientData(m));
        }
        if y.len() != m {
            return Err(GpError::Dimension);
        }
        let y_mean = y.iter().sum::<f64>() / m as f64;
        let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / m as f64;
        let y_scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let ys = DVector::from_iterator(m, y.iter().map(|v| (v - y_mean) / y_scale));
        Self::build(x, ys, y_mean, y_scale, kernel, length_scales, signal_var, noise_var)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        x: Vec<Vec<f64>>,
        ys: DVector<f64>,
        y_mean: f64,
        y_scale: f64,
        kernel: KernelKind,
        length_scales: Vec<f64>,
        signal_var: f64,
        noise_var: f64,
    ) -> Result<Self, GpError> {
        let (chol, jitter) =
            factorize_with_jitter(&x, kernel, &length_scales, signal_var, noise_var)
                .ok_or(GpError::Factorization { max_jitter: JITTER_MAX })?;
        let weights = chol.solve(&ys);
        let lml = log_marginal_likelihood(&chol, &ys);
        Ok(Self {
            x,
            kernel,
            signal_var,
            length_scales,
            noise_var,
            jitter,
            y_mean,
            y_scale,
            chol,
            weights,
            lml,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn num_points(&self) -> usize {
        self.x.len()
    }

    pub fn hyper(&self) -> GpHyper {
        GpHyper {
            kernel: self.kernel,
            signal_var: self.signal_var,
            length_scales: self.length_scales.clone(),
            noise_var: self.noise_var,
            jitter: self.jitter,
            log_marginal_likelihood: self.lml,
        }
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    /// Prior standard deviation in target units (far-field predictive std).
    pub fn prior_std(&self) -> f64 {
        self.y_scale * self.signal_var.sqrt()
    }

    /// Destandardized training mean.
    pub fn target_mean(&self) -> f64 {
        self.y_mean
    }

    /// Exact posterior mean and standard deviation of the latent function at
    /// `q`, in target units. The std is clipped at 0 from below.
    pub fn predict(&self, q: &[f64]) -> (f64, f64) {
        assert_eq!(q.len(), self.input_dim(), "query dimension mismatch");
        let m = self.x.len();
        let kstar = DVector::from_fn(m, |i, _| {
            kernel_value(self.kernel, &self.x[i], q, &self.length_scales, self.signal_var)
        });
        let mean_s = kstar.dot(&self.weights);
        let w = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&kstar)
            .expect("triangular solve of a valid factorization");
        let k_ss = self.signal_var;
        let var_s = (k_ss - w.norm_squared()).max(0.0);
        (self.y_mean + self.y_scale * mean_s, self.y_scale * var_s.sqrt())
    }
}

/// Gradient-free simplex minimization of `f` from `x0`.
///
/// Standard reflection/expansion/contraction/shrink with an absolute spread
/// tolerance; infinite objective values (out-of-bounds points) are handled by
/// ordinary ranking.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    init_step: f64,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += init_step;
        let fp = f(&p);
        simplex.push((p, fp));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread.abs() < tol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(p, _)| p[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflected: Vec<f64> =
            (0..n).map(|d| centroid[d] + (centroid[d] - worst.0[d])).collect();
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded: Vec<f64> =
                (0..n).map(|d| centroid[d] + 2.0 * (centroid[d] - worst.0[d])).collect();
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted: Vec<f64> =
                (0..n).map(|d| centroid[d] + 0.5 * (worst.0[d] - centroid[d])).collect();
            let fc = f(&contracted);
            if fc < worst.1 {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    for (p, b) in item.0.iter_mut().zip(&best) {
                        *p = b + 0.5 * (*p - b);
                    }
                    item.1 = f(&item.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex.swap_remove(0)
}
