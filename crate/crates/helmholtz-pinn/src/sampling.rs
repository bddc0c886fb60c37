//! Collocation-point generation.
//!
//! Density follows the points-per-wavelength rule: on the unit domain the
//! wavelength is `1/ω`, so a precision of `r` points per wavelength per
//! dimension means `n_x = round(r·ω)` points per dimension and `n_x²` domain
//! points. Domain points are i.i.d. uniform in the open cube; boundary points
//! are uniform by area over the faces with axis-aligned outward normals.
//! Everything is deterministic under a seeded generator.

use std::io::Write;

use rand::Rng;
use thiserror::Error;

use crate::problem::{BcKind, BoundaryPoint, ProblemSpec};

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("unsupported level {0}; supported levels are 1, 3, 5")]
    UnsupportedLevel(u32),
    #[error("boundary count mode `sixteen` is defined for d = 3 only, got d = {0}")]
    SixteenRequiresThreeDims(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// How many boundary points to draw for the Neumann protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCountMode {
    /// `2^(d-1) · d · n_x^(d-1)`.
    Formula,
    /// `16 · n_x²`, an alternative fixed 3-D count.
    Sixteen,
}

/// Train/test collocation sets plus optional labeled observations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollocationSet {
    pub domain_train: Vec<Vec<f64>>,
    pub domain_test: Vec<Vec<f64>>,
    pub boundary_train: Vec<BoundaryPoint>,
    pub boundary_test: Vec<BoundaryPoint>,
    pub observations: Vec<(Vec<f64>, f64)>,
}

/// Points per dimension for precision `r` at pulsation `ω`: `round(r·ω)`,
/// half away from zero. All benchmark settings give exact integers.
pub fn points_per_dim(r: f64, pulsation: u32) -> usize {
    (r * f64::from(pulsation)).round() as usize
}

/// Precision `r = n_x/ω`, reported to one decimal.
pub fn precision_of(n_x: usize, pulsation: u32) -> f64 {
    (10.0 * n_x as f64 / f64::from(pulsation)).round() / 10.0
}

/// Level sizes `n_l = 10·2^(l-1)` and `|T_l| = n_l²` for levels 1, 3, 5.
pub fn level_size(level: u32) -> Result<(usize, usize), SamplingError> {
    match level {
        1 | 3 | 5 => {
            let n = 10 * 2usize.pow(level - 1);
            Ok((n, n * n))
        }
        other => Err(SamplingError::UnsupportedLevel(other)),
    }
}

/// Boundary-point count for the Neumann protocol.
pub fn neumann_boundary_count(
    d: usize,
    n_x: usize,
    mode: BoundaryCountMode,
) -> Result<usize, SamplingError> {
    match mode {
        BoundaryCountMode::Formula => Ok(2usize.pow(d as u32 - 1) * d * n_x.pow(d as u32 - 1)),
        BoundaryCountMode::Sixteen if d == 3 => Ok(16 * n_x * n_x),
        BoundaryCountMode::Sixteen => Err(SamplingError::SixteenRequiresThreeDims(d)),
    }
}

/// Draw from the open interval (0, 1); `gen::<f64>()` covers [0, 1) so only
/// exact zeros are rejected.
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let v = rng.gen::<f64>();
        if v != 0.0 {
            return v;
        }
    }
}

/// `count` i.i.d. uniform points strictly inside `(0,1)^d`.
pub fn sample_domain<R: Rng>(count: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..d).map(|_| open_unit(rng)).collect()).collect()
}

/// `count` points uniform by area over `∂[0,1]^d`: a face is chosen uniformly
/// among the `2d` (equal-area) faces, the free coordinates are uniform in the
/// open interval, and the normal is the face's axis-aligned outward normal.
pub fn sample_boundary<R: Rng>(count: usize, d: usize, rng: &mut R) -> Vec<BoundaryPoint> {
    (0..count)
        .map(|_| {
            let face = rng.gen_range(0..2 * d);
            let axis = face / 2;
            let upper = face % 2 == 1;
            let mut coords: Vec<f64> = (0..d).map(|_| open_unit(rng)).collect();
            coords[axis] = if upper { 1.0 } else { 0.0 };
            let mut normal = vec![0.0; d];
            normal[axis] = if upper { 1.0 } else { -1.0 };
            BoundaryPoint { coords, normal }
        })
        .collect()
}

/// Sampling request resolved from a run configuration.
#[derive(Debug, Clone, Copy)]
pub struct SamplingPlan {
    pub r_train: f64,
    pub r_test: f64,
    /// When set, replaces the training density with the level's `n_l`.
    pub level: Option<u32>,
    pub boundary_mode: BoundaryCountMode,
}

impl SamplingPlan {
    /// Training points per dimension after applying an optional level.
    pub fn train_points_per_dim(&self, pulsation: u32) -> Result<usize, SamplingError> {
        match self.level {
            Some(l) => Ok(level_size(l)?.0),
            None => Ok(points_per_dim(self.r_train, pulsation)),
        }
    }
}

/// Assembles the collocation sets for a problem.
///
/// Dirichlet: independent train/test domain sets of `n_x²` points; boundary
/// sets only when no hard constraint is active. Neumann: `n_x²` domain points
/// plus `neumann_boundary_count` boundary points, with the test sets equal to
/// the training sets.
pub fn assemble<R: Rng>(
    spec: &ProblemSpec,
    plan: &SamplingPlan,
    rng: &mut R,
) -> Result<CollocationSet, SamplingError> {
    let d = spec.dim;
    let n_train = plan.train_points_per_dim(spec.pulsation)?;
    let n_test = points_per_dim(plan.r_test, spec.pulsation);
    let mut set = CollocationSet::default();
    match spec.bc {
        BcKind::Dirichlet => {
            set.domain_train = sample_domain(n_train * n_train, d, rng);
            set.domain_test = sample_domain(n_test * n_test, d, rng);
            if spec.hard_constraint.is_none() {
                let nb_train = neumann_boundary_count(d, n_train, BoundaryCountMode::Formula)?;
                let nb_test = neumann_boundary_count(d, n_test, BoundaryCountMode::Formula)?;
                set.boundary_train = sample_boundary(nb_train, d, rng);
                set.boundary_test = sample_boundary(nb_test, d, rng);
            }
        }
        BcKind::Neumann => {
            set.domain_train = sample_domain(n_train * n_train, d, rng);
            let nb = neumann_boundary_count(d, n_train, plan.boundary_mode)?;
            set.boundary_train = sample_boundary(nb, d, rng);
            set.domain_test = set.domain_train.clone();
            set.boundary_test = set.boundary_train.clone();
        }
    }
    Ok(set)
}

/// Writes points as CSV: one row per point, coordinates then (for boundary
/// points) the normal components.
pub fn write_points_csv<W: Write>(
    w: &mut W,
    d: usize,
    domain: &[Vec<f64>],
    boundary: &[BoundaryPoint],
) -> Result<(), SamplingError> {
    let axes = ["x", "y", "z"];
    let coord_cols: Vec<&str> = axes[..d].to_vec();
    let normal_cols: Vec<String> = axes[..d].iter().map(|a| format!("n{a}")).collect();
    writeln!(w, "{},{}", coord_cols.join(","), normal_cols.join(","))?;
    for p in domain {
        let coords: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{},{}", coords.join(","), vec![""; d].join(","))?;
    }
    for bp in boundary {
        let coords: Vec<String> = bp.coords.iter().map(|v| format!("{v:.16e}")).collect();
        let normals: Vec<String> = bp.normal.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{},{}", coords.join(","), normals.join(","))?;
    }
    Ok(())
}
