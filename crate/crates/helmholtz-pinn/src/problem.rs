//! Helmholtz boundary-value problems on the unit square/cube.
//!
//! A [`ProblemSpec`] bundles the operator data: dimension, pulsation ω with
//! wavenumber κ = 2πω, boundary-condition kind, source term, optional exact
//! solution, and an optional hard-constraint output transform for Dirichlet
//! problems. The two manufactured cases mirror the usual benchmark pair:
//! a 2-D Dirichlet problem with `u = sin(κx)sin(κy)` and a 3-D Neumann problem
//! with `u = cos(κx)cos(κy)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{InputJet, JetSeed};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("hard-constraint transforms are only defined for the 2-D Dirichlet case")]
    HardConstraintUnsupported,
}

/// Scalar field on the unit domain.
pub type Field = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// The two manufactured benchmark cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Dirichlet2d,
    Neumann3d,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::Dirichlet2d => write!(f, "dirichlet2d"),
            Case::Neumann3d => write!(f, "neumann3d"),
        }
    }
}

/// Multiplier `ℓ(x)` applied to the raw network output so that
/// `û = ℓ·u` satisfies homogeneous Dirichlet conditions structurally.
///
/// `VanishingProduct` is `ℓ(x,y) = x(1-x)y(1-y)`, zero on the whole boundary.
/// `QuadraticUpperFaces` is `ℓ(x,y) = (1-x²)(1-y²)`, which on the unit square
/// vanishes only on the faces `x = 1` and `y = 1`; it is kept selectable for
/// literal reproduction of setups that use it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardConstraint {
    VanishingProduct,
    QuadraticUpperFaces,
}

impl HardConstraint {
    /// `ℓ`, `∂ℓ/∂x_i`, `∂²ℓ/∂x_i²` at a 2-D point.
    fn jet(self, x: &[f64]) -> (f64, [f64; 2], [f64; 2]) {
        let (a, b) = (x[0], x[1]);
        match self {
            HardConstraint::VanishingProduct => {
                let fx = a * (1.0 - a);
                let fy = b * (1.0 - b);
                (fx * fy, [(1.0 - 2.0 * a) * fy, fx * (1.0 - 2.0 * b)], [-2.0 * fy, -2.0 * fx])
            }
            HardConstraint::QuadraticUpperFaces => {
                let fx = 1.0 - a * a;
                let fy = 1.0 - b * b;
                (fx * fy, [-2.0 * a * fy, -2.0 * b * fx], [-2.0 * fy, -2.0 * fx])
            }
        }
    }

    pub fn value(self, x: &[f64]) -> f64 {
        self.jet(x).0
    }

    /// Transforms a raw output value into `û = ℓ(x)·u`.
    pub fn apply_value(self, x: &[f64], u_raw: f64) -> f64 {
        self.value(x) * u_raw
    }

    /// Transforms a raw output jet into the jet of `û = ℓ·u` by the product
    /// rule, exactly: `û_i = ℓ_i u + ℓ u_i`, `û_ii = ℓ_ii u + 2ℓ_i u_i + ℓ u_ii`.
    pub fn apply_jet(self, x: &[f64], raw: &InputJet) -> InputJet {
        let (l, lx, lxx) = self.jet(x);
        let dx = (0..2).map(|i| lx[i] * raw.value + l * raw.dx[i]).collect();
        let dxx = (0..2)
            .map(|i| lxx[i] * raw.value + 2.0 * lx[i] * raw.dx[i] + l * raw.dxx[i])
            .collect();
        InputJet { value: l * raw.value, dx, dxx }
    }

    /// Pulls an adjoint seed on `û` back to a seed on the raw jet
    /// (transpose of the linear map in [`HardConstraint::apply_jet`]).
    pub fn pullback_seed(self, x: &[f64], seed: &JetSeed) -> JetSeed {
        let (l, lx, lxx) = self.jet(x);
        let mut value = l * seed.value;
        let mut dx = vec![0.0; 2];
        let mut dxx = vec![0.0; 2];
        for i in 0..2 {
            value += lx[i] * seed.dx[i] + lxx[i] * seed.dxx[i];
            dx[i] = l * seed.dx[i] + 2.0 * lx[i] * seed.dxx[i];
            dxx[i] = l * seed.dxx[i];
        }
        JetSeed { value, dx, dxx }
    }
}

/// A point on `∂[0,1]^d` with its outward unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub coords: Vec<f64>,
    pub normal: Vec<f64>,
}

/// One Helmholtz boundary-value problem instance.
#[derive(Clone)]
pub struct ProblemSpec {
    pub dim: usize,
    pub pulsation: u32,
    /// κ = 2πω.
    pub wavenumber: f64,
    pub bc: BcKind,
    pub source: Field,
    pub exact: Option<Field>,
    pub hard_constraint: Option<HardConstraint>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dim", &self.dim)
            .field("pulsation", &self.pulsation)
            .field("wavenumber", &self.wavenumber)
            .field("bc", &self.bc)
            .field("has_exact", &self.exact.is_some())
            .field("hard_constraint", &self.hard_constraint)
            .finish()
    }
}

impl ProblemSpec {
    /// Builds one of the manufactured cases.
    ///
    /// `Dirichlet2d`: `u = sin(κx)sin(κy)`, `f = κ²sin(κx)sin(κy)`, `g = 0`,
    /// hard constraint selectable.
    ///
    /// `Neumann3d`: `u = cos(κx)cos(κy)`, `g = 0`. The default source is the
    /// operator-consistent `f = κ²cos(κx)cos(κy)` (`-Δu - κ²u` applied to the
    /// exact solution); `doubled_neumann_source` selects the `2κ²` variant for
    /// literal reproduction.
    pub fn manufactured(
        case: Case,
        pulsation: u32,
        hard_constraint: Option<HardConstraint>,
        doubled_neumann_source: bool,
    ) -> Result<Self, ProblemError> {
        let k = 2.0 * PI * f64::from(pulsation);
        match case {
            Case::Dirichlet2d => Ok(Self {
                dim: 2,
                pulsation,
                wavenumber: k,
                bc: BcKind::Dirichlet,
                source: Arc::new(move |x| k * k * (k * x[0]).sin() * (k * x[1]).sin()),
                exact: Some(Arc::new(move |x| (k * x[0]).sin() * (k * x[1]).sin())),
                hard_constraint,
            }),
            Case::Neumann3d => {
                if hard_constraint.is_some() {
                    return Err(ProblemError::HardConstraintUnsupported);
                }
                let amp = if doubled_neumann_source { 2.0 } else { 1.0 };
                Ok(Self {
                    dim: 3,
                    pulsation,
                    wavenumber: k,
                    bc: BcKind::Neumann,
                    source: Arc::new(move |x| {
                        amp * k * k * (k * x[0]).cos() * (k * x[1]).cos()
                    }),
                    exact: Some(Arc::new(move |x| (k * x[0]).cos() * (k * x[1]).cos())),
                    hard_constraint: None,
                })
            }
        }
    }

    /// Boundary data `g`; identically zero for both manufactured cases.
    pub fn boundary_value(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

/// PDE residual `N[u] - f = -Δu - κ²u - f` from a jet of `u` at a point.
pub fn helmholtz_residual(jet: &InputJet, wavenumber: f64, f_at_x: f64) -> f64 {
    -jet.laplacian() - wavenumber * wavenumber * jet.value - f_at_x
}

/// Dirichlet residual `u - g`.
pub fn dirichlet_residual(u_value: f64, g_at_x: f64) -> f64 {
    u_value - g_at_x
}

/// Neumann residual `∇u·n - g`. The normal must be a unit vector.
pub fn neumann_residual(jet: &InputJet, normal: &[f64], g_at_x: f64) -> f64 {
    let norm_sq: f64 = normal.iter().map(|n| n * n).sum();
    assert!(
        (norm_sq - 1.0).abs() < 1e-9,
        "boundary normal must be unit length, got |n|² = {norm_sq}"
    );
    let dn: f64 = normal.iter().zip(jet.dx.iter()).map(|(n, d)| n * d).sum();
    dn - g_at_x
}
