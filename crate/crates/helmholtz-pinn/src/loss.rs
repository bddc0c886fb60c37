//! Weighted composite residual loss and the relative l² evaluation metric.
//!
//! The loss is `L = w_D·L_D + w_Γ·L_Γ + w_u·L_u`: mean squared PDE residual
//! over domain points, mean squared boundary residual over boundary points,
//! mean squared data misfit over observations. When a Dirichlet hard
//! constraint is active the boundary term is omitted entirely. Empty point
//! sets contribute zero (with a logged warning from the composite) so the
//! hard-constraint and unlabelled-data paths work uniformly.
//!
//! Per-point contributions are accumulated in set order, domain then boundary
//! then observations; this fixed reduction order is the reproducibility
//! contract for parallel callers.

use thiserror::Error;

use crate::net::{self, InputJet, JetSeed, JetWorkspace, MlpParams, NetError};
use crate::problem::{
    dirichlet_residual, helmholtz_residual, neumann_residual, BcKind, BoundaryPoint, ProblemSpec,
};
use crate::sampling::CollocationSet;

#[derive(Debug, Error)]
pub enum LossError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("relative l2 metric undefined: exact solution has zero norm on the test set")]
    ZeroNorm,
    #[error("relative l2 metric requires an exact solution")]
    NoExactSolution,
}

/// Term weights; `w_D` and `w_u` are fixed to 1 by default and only the
/// boundary weight is tuned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub pde: f64,
    pub boundary: f64,
    pub data: f64,
}

impl LossWeights {
    pub fn with_boundary(boundary: f64) -> Self {
        Self { pde: 1.0, boundary, data: 1.0 }
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { pde: 1.0, boundary: 1.0, data: 1.0 }
    }
}

/// Unweighted term values and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub pde_term: f64,
    pub bc_term: f64,
    pub data_term: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// A borrowed view of one side (train or test) of a [`CollocationSet`].
#[derive(Debug, Clone, Copy)]
pub struct SetView<'a> {
    pub domain: &'a [Vec<f64>],
    pub boundary: &'a [BoundaryPoint],
    pub observations: &'a [(Vec<f64>, f64)],
}

impl<'a> SetView<'a> {
    pub fn train(set: &'a CollocationSet) -> Self {
        Self {
            domain: &set.domain_train,
            boundary: &set.boundary_train,
            observations: &set.observations,
        }
    }

    pub fn test(set: &'a CollocationSet) -> Self {
        Self { domain: &set.domain_test, boundary: &set.boundary_test, observations: &[] }
    }
}

/// Whether the boundary term is assembled at all for this problem.
fn boundary_term_active(spec: &ProblemSpec) -> bool {
    !(spec.bc == BcKind::Dirichlet && spec.hard_constraint.is_some())
}

/// Jet of the actual approximation at `x`: the raw network jet, hard-transformed
/// when the problem enforces Dirichlet conditions structurally.
fn approx_jet(spec: &ProblemSpec, x: &[f64], raw: InputJet) -> InputJet {
    match spec.hard_constraint {
        Some(h) => h.apply_jet(x, &raw),
        None => raw,
    }
}

fn approx_value(spec: &ProblemSpec, params: &MlpParams, x: &[f64]) -> Result<f64, NetError> {
    let raw = params.forward(x)?;
    Ok(match spec.hard_constraint {
        Some(h) => h.apply_value(x, raw),
        None => raw,
    })
}

/// Mean squared Helmholtz residual over `points`; 0 for an empty set.
pub fn pde_loss(
    params: &MlpParams,
    points: &[Vec<f64>],
    spec: &ProblemSpec,
) -> Result<f64, LossError> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let mut ws = JetWorkspace::new(params.arch());
    let inv_n = 1.0 / points.len() as f64;
    let mut acc = 0.0;
    for x in points {
        let jet = approx_jet(spec, x, params.forward_jet_with(x, &mut ws)?);
        let rho = helmholtz_residual(&jet, spec.wavenumber, (spec.source)(x));
        acc += rho * rho * inv_n;
    }
    Ok(acc)
}

/// Mean squared boundary residual over `points`; 0 for an empty set.
pub fn bc_loss(
    params: &MlpParams,
    points: &[BoundaryPoint],
    spec: &ProblemSpec,
) -> Result<f64, LossError> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let mut ws = JetWorkspace::new(params.arch());
    let inv_n = 1.0 / points.len() as f64;
    let mut acc = 0.0;
    for bp in points {
        let rho = match spec.bc {
            BcKind::Dirichlet => {
                let u = approx_value(spec, params, &bp.coords)?;
                dirichlet_residual(u, spec.boundary_value(&bp.coords))
            }
            BcKind::Neumann => {
                let jet = approx_jet(spec, &bp.coords, params.forward_jet_with(&bp.coords, &mut ws)?);
                neumann_residual(&jet, &bp.normal, spec.boundary_value(&bp.coords))
            }
        };
        acc += rho * rho * inv_n;
    }
    Ok(acc)
}

/// Mean squared misfit against labeled observations; 0 when there are none.
pub fn data_loss(
    params: &MlpParams,
    observations: &[(Vec<f64>, f64)],
    spec: &ProblemSpec,
) -> Result<f64, LossError> {
    if observations.is_empty() {
        return Ok(0.0);
    }
    let inv_n = 1.0 / observations.len() as f64;
    let mut acc = 0.0;
    for (x, y) in observations {
        let rho = approx_value(spec, params, x)? - y;
        acc += rho * rho * inv_n;
    }
    Ok(acc)
}

/// Assembles the weighted composite loss over one set view.
pub fn composite_loss(
    params: &MlpParams,
    view: SetView<'_>,
    weights: &LossWeights,
    spec: &ProblemSpec,
) -> Result<LossBreakdown, LossError> {
    if view.domain.is_empty() {
        log::warn!("composite loss evaluated with an empty domain set; PDE term is 0");
    }
    let pde_term = pde_loss(params, view.domain, spec)?;
    let (bc_term, bc_weighted) = if boundary_term_active(spec) {
        if view.boundary.is_empty() {
            log::warn!("boundary term active but the boundary set is empty; term is 0");
        }
        let t = bc_loss(params, view.boundary, spec)?;
        (t, weights.boundary * t)
    } else {
        (0.0, 0.0)
    };
    let data_term = data_loss(params, view.observations, spec)?;
    let total = weights.pde * pde_term + bc_weighted + weights.data * data_term;
    Ok(LossBreakdown { pde_term, bc_term, data_term, total })
}

/// Composite loss and its gradient with respect to all network parameters,
/// reverse-mode through the jet graph. Gradient entries follow the flat
/// parameter layout of [`MlpParams::values`].
pub fn composite_loss_gradient(
    params: &MlpParams,
    view: SetView<'_>,
    weights: &LossWeights,
    spec: &ProblemSpec,
) -> Result<(LossBreakdown, Vec<f64>), LossError> {
    let d = spec.dim;
    let k2 = spec.wavenumber * spec.wavenumber;
    let mut ws = JetWorkspace::new(params.arch());
    let mut grad = vec![0.0; params.values().len()];

    let pde_term = if view.domain.is_empty() {
        0.0
    } else {
        let inv_n = 1.0 / view.domain.len() as f64;
        net::param_gradient_into(
            params,
            view.domain,
            |k, raw| {
                let x = &view.domain[k];
                let jet = approx_jet(spec, x, raw.clone());
                let rho = helmholtz_residual(&jet, spec.wavenumber, (spec.source)(x));
                // d(w·ρ²/N)/djet, with dρ/du = -κ², dρ/du_ii = -1.
                let scale = weights.pde * 2.0 * rho * inv_n;
                let seed = JetSeed {
                    value: -k2 * scale,
                    dx: vec![0.0; d],
                    dxx: vec![-scale; d],
                };
                let seed = match spec.hard_constraint {
                    Some(h) => h.pullback_seed(x, &seed),
                    None => seed,
                };
                (rho * rho * inv_n, seed)
            },
            &mut ws,
            &mut grad,
        )?
    };

    let bc_points: Vec<Vec<f64>>;
    let bc_term = if !boundary_term_active(spec) || view.boundary.is_empty() {
        0.0
    } else {
        bc_points = view.boundary.iter().map(|bp| bp.coords.clone()).collect();
        let inv_n = 1.0 / bc_points.len() as f64;
        net::param_gradient_into(
            params,
            &bc_points,
            |k, raw| {
                let bp = &view.boundary[k];
                let jet = approx_jet(spec, &bp.coords, raw.clone());
                let (rho, seed) = match spec.bc {
                    BcKind::Dirichlet => {
                        let rho =
                            dirichlet_residual(jet.value, spec.boundary_value(&bp.coords));
                        let scale = weights.boundary * 2.0 * rho * inv_n;
                        (rho, JetSeed::value_only(d, scale))
                    }
                    BcKind::Neumann => {
                        let rho =
                            neumann_residual(&jet, &bp.normal, spec.boundary_value(&bp.coords));
                        let scale = weights.boundary * 2.0 * rho * inv_n;
                        let seed = JetSeed {
                            value: 0.0,
                            dx: bp.normal.iter().map(|n| n * scale).collect(),
                            dxx: vec![0.0; d],
                        };
                        (rho, seed)
                    }
                };
                let seed = match spec.hard_constraint {
                    Some(h) => h.pullback_seed(&bp.coords, &seed),
                    None => seed,
                };
                (rho * rho * inv_n, seed)
            },
            &mut ws,
            &mut grad,
        )?
    };

    let obs_points: Vec<Vec<f64>>;
    let data_term = if view.observations.is_empty() {
        0.0
    } else {
        obs_points = view.observations.iter().map(|(x, _)| x.clone()).collect();
        let inv_n = 1.0 / obs_points.len() as f64;
        net::param_gradient_into(
            params,
            &obs_points,
            |k, raw| {
                let (x, y) = &view.observations[k];
                let jet = approx_jet(spec, x, raw.clone());
                let rho = jet.value - y;
                let scale = weights.data * 2.0 * rho * inv_n;
                let seed = JetSeed::value_only(d, scale);
                let seed = match spec.hard_constraint {
                    Some(h) => h.pullback_seed(x, &seed),
                    None => seed,
                };
                (rho * rho * inv_n, seed)
            },
            &mut ws,
            &mut grad,
        )?
    };

    let bc_weighted = if boundary_term_active(spec) { weights.boundary * bc_term } else { 0.0 };
    let total = weights.pde * pde_term + bc_weighted + weights.data * data_term;
    if !total.is_finite() {
        return Err(LossError::Net(NetError::NonFinite("composite loss")));
    }
    Ok((LossBreakdown { pde_term, bc_term, data_term, total }, grad))
}

/// Relative l² error `‖u_θ - u‖₂ / ‖u‖₂` over the given test points.
pub fn relative_l2_metric(
    params: &MlpParams,
    points: &[Vec<f64>],
    spec: &ProblemSpec,
) -> Result<f64, LossError> {
    let exact = spec.exact.as_ref().ok_or(LossError::NoExactSolution)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for x in points {
        let u = exact(x);
        let diff = approx_value(spec, params, x)? - u;
        num += diff * diff;
        den += u * u;
    }
    if den == 0.0 {
        return Err(LossError::ZeroNorm);
    }
    Ok((num / den).sqrt())
}
