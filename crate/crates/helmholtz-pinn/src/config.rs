//! Run configuration: a canonical JSON document describing one training run,
//! one HPO campaign, or one (ω, level) sweep.
//!
//! Unknown keys are rejected. A configuration resolves all unset fields to
//! their defaults; the resolved form is what run directories record, and
//! resolution is idempotent, so re-running from a recorded config reproduces
//! all non-timing outputs byte for byte.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hpo::{HpoConfig, HyperParams, SearchSpace};
use crate::net::Activation;
use crate::problem::{Case, HardConstraint, ProblemSpec};
use crate::sampling::{BoundaryCountMode, SamplingPlan};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error reading config: {0}")]
    Io(#[from] std::io::Error),
}

/// Hard-constraint choice for Dirichlet problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HardConstraintChoice {
    /// `x(1-x)y(1-y)`: vanishes on the whole boundary.
    #[default]
    Vanishing,
    /// `(1-x²)(1-y²)`: vanishes on the upper faces only.
    Quadratic,
    /// Soft boundary conditions via the loss term.
    None,
}

impl HardConstraintChoice {
    pub fn to_transform(self) -> Option<HardConstraint> {
        match self {
            HardConstraintChoice::Vanishing => Some(HardConstraint::VanishingProduct),
            HardConstraintChoice::Quadratic => Some(HardConstraint::QuadraticUpperFaces),
            HardConstraintChoice::None => None,
        }
    }
}

/// Source-term variant for the Neumann case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NeumannSourceChoice {
    /// `κ²cos(κx)cos(κy)`, consistent with the exact solution.
    #[default]
    Consistent,
    /// `2κ²cos(κx)cos(κy)`.
    Doubled,
}

fn default_omega() -> u32 {
    2
}
fn default_r_train() -> f64 {
    10.0
}
fn default_r_test() -> f64 {
    30.0
}
fn default_epochs() -> u64 {
    2000
}
fn default_iterations() -> usize {
    15
}
fn default_n_random() -> usize {
    10
}
fn default_seed() -> u64 {
    11
}
fn default_log_every() -> u64 {
    100
}
fn default_true() -> bool {
    true
}
fn default_xi() -> f64 {
    0.01
}
fn default_candidates() -> usize {
    10_000
}
fn default_adam_epsilon() -> f64 {
    1e-7
}
fn default_boundary_count() -> BoundaryCountMode {
    BoundaryCountMode::Formula
}

/// One run's full configuration. Serializes to/from canonical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Case,
    pub out_dir: PathBuf,
    #[serde(default = "default_omega")]
    pub omega: u32,
    #[serde(default = "default_r_train")]
    pub r_train: f64,
    #[serde(default = "default_r_test")]
    pub r_test: f64,
    /// Training-set level (1, 3 or 5); replaces `r_train` when set.
    #[serde(default)]
    pub level: Option<u32>,
    /// Inner ADAM epochs K.
    #[serde(default = "default_epochs")]
    pub epochs: u64,
    /// Outer HPO iterations M.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Initial random iterations of a campaign, including the initial point.
    #[serde(default = "default_n_random")]
    pub n_random: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_log_every")]
    pub log_every: u64,
    /// λ for `train` runs and λ₀ for campaigns; per-case default when unset.
    #[serde(default)]
    pub lambda: Option<HyperParams>,
    /// Search-space override; per-case default when unset.
    #[serde(default)]
    pub space: Option<SearchSpace>,
    /// Per-case default when unset: `vanishing` for Dirichlet, `none` for Neumann.
    #[serde(default)]
    pub hard_constraint: Option<HardConstraintChoice>,
    #[serde(default)]
    pub neumann_source: NeumannSourceChoice,
    #[serde(default = "default_boundary_count")]
    pub boundary_count: BoundaryCountMode,
    /// Feed log10 of the loss to the GP surrogate.
    #[serde(default = "default_true")]
    pub log10_targets: bool,
    /// Expected-improvement exploration offset ξ.
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Acquisition candidates per proposal.
    #[serde(default = "default_candidates")]
    pub n_candidates: usize,
    #[serde(default = "default_adam_epsilon")]
    pub adam_epsilon: f64,
    /// Evaluation-grid resolution per dimension (train runs); 101 in 2-D and
    /// 21 in 3-D when unset.
    #[serde(default)]
    pub grid_n: Option<usize>,
    /// Sweep pulsations (sweep runs only).
    #[serde(default)]
    pub sweep_omegas: Vec<u32>,
    /// Sweep levels (sweep runs only).
    #[serde(default)]
    pub sweep_levels: Vec<u32>,
}

impl RunConfig {
    pub fn new(case: Case, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            case,
            out_dir: out_dir.into(),
            omega: default_omega(),
            r_train: default_r_train(),
            r_test: default_r_test(),
            level: None,
            epochs: default_epochs(),
            iterations: default_iterations(),
            n_random: default_n_random(),
            seed: default_seed(),
            log_every: default_log_every(),
            lambda: None,
            space: None,
            hard_constraint: None,
            neumann_source: NeumannSourceChoice::default(),
            boundary_count: default_boundary_count(),
            log10_targets: default_true(),
            xi: default_xi(),
            n_candidates: default_candidates(),
            adam_epsilon: default_adam_epsilon(),
            grid_n: None,
            sweep_omegas: Vec::new(),
            sweep_levels: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Per-case default λ₀ in the display order `[α, depth, width, σ(, w_Γ)]`:
    /// Dirichlet `[1e-3, 4, 50, sin]`, Neumann `[1e-3, 3, 275, sin, 400]`.
    pub fn default_lambda(case: Case) -> HyperParams {
        match case {
            Case::Dirichlet2d => HyperParams {
                learning_rate: 1e-3,
                depth: 4,
                width: 50,
                activation: Activation::Sin,
                boundary_weight: None,
            },
            Case::Neumann3d => HyperParams {
                learning_rate: 1e-3,
                depth: 3,
                width: 275,
                activation: Activation::Sin,
                boundary_weight: Some(400.0),
            },
        }
    }

    pub fn default_space(case: Case) -> SearchSpace {
        match case {
            Case::Dirichlet2d => SearchSpace::dirichlet_default(),
            Case::Neumann3d => SearchSpace::neumann_default(),
        }
    }

    fn default_grid_n(case: Case) -> usize {
        match case {
            Case::Dirichlet2d => 101,
            Case::Neumann3d => 21,
        }
    }

    /// Validate and materialize every optional field. Idempotent.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = self.clone();
        if cfg.omega < 1 {
            return Err(ConfigError::Invalid("omega must be >= 1".into()));
        }
        if cfg.epochs < 1 {
            return Err(ConfigError::Invalid("epochs must be >= 1".into()));
        }
        if cfg.iterations < 1 {
            return Err(ConfigError::Invalid("iterations must be >= 1".into()));
        }
        if cfg.r_train <= 0.0 || cfg.r_test <= 0.0 {
            return Err(ConfigError::Invalid("precisions must be positive".into()));
        }
        if let Some(l) = cfg.level {
            if !matches!(l, 1 | 3 | 5) {
                return Err(ConfigError::Invalid(format!("unsupported level {l}")));
            }
        }
        cfg.hard_constraint = Some(cfg.hard_constraint.unwrap_or(match cfg.case {
            Case::Dirichlet2d => HardConstraintChoice::Vanishing,
            Case::Neumann3d => HardConstraintChoice::None,
        }));
        if cfg.case == Case::Neumann3d && cfg.hard_constraint != Some(HardConstraintChoice::None)
        {
            return Err(ConfigError::Invalid(
                "hard constraints are only available for the Dirichlet case".into(),
            ));
        }
        if cfg.case == Case::Dirichlet2d && cfg.boundary_count == BoundaryCountMode::Sixteen {
            return Err(ConfigError::Invalid(
                "boundary count mode `sixteen` applies to the 3-D Neumann case only".into(),
            ));
        }
        cfg.lambda =
            Some(self.lambda.clone().unwrap_or_else(|| Self::default_lambda(cfg.case)));
        cfg.space = Some(match &self.space {
            Some(s) => s.clone(),
            None => Self::default_space(cfg.case),
        });
        cfg.grid_n = Some(cfg.grid_n.unwrap_or_else(|| Self::default_grid_n(cfg.case)));
        Ok(cfg)
    }

    /// Build the problem this configuration describes.
    pub fn problem(&self) -> Result<ProblemSpec, ConfigError> {
        let hard = match self.case {
            Case::Dirichlet2d => self
                .hard_constraint
                .unwrap_or(HardConstraintChoice::Vanishing)
                .to_transform(),
            Case::Neumann3d => None,
        };
        ProblemSpec::manufactured(
            self.case,
            self.omega,
            hard,
            self.neumann_source == NeumannSourceChoice::Doubled,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            r_train: self.r_train,
            r_test: self.r_test,
            level: self.level,
            boundary_mode: self.boundary_count,
        }
    }

    /// Campaign configuration of a resolved config.
    pub fn hpo_config(&self) -> HpoConfig {
        let space = self.space.clone().expect("resolved config");
        let initial = self.lambda.clone().expect("resolved config");
        let mut cfg = HpoConfig::new(space, initial);
        cfg.iterations = self.iterations;
        cfg.n_random = self.n_random;
        cfg.epochs = self.epochs;
        cfg.log_every = self.log_every;
        cfg.adam_epsilon = self.adam_epsilon;
        cfg.seed = self.seed;
        cfg.xi = self.xi;
        cfg.n_candidates = self.n_candidates;
        cfg.log10_targets = self.log10_targets;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = RunConfig::from_json(r#"{"case": "dirichlet2d", "out_dir": "/tmp/x"}"#)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(cfg.omega, 2);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.epochs, 2000);
        let lambda = cfg.lambda.unwrap();
        assert_eq!(lambda.depth, 4);
        assert_eq!(lambda.width, 50);
        assert_eq!(lambda.boundary_weight, None);
        assert_eq!(cfg.grid_n, Some(101));
    }

    #[test]
    fn missing_case_is_an_error() {
        assert!(RunConfig::from_json(r#"{"out_dir": "/tmp/x"}"#).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(
            r#"{"case": "dirichlet2d", "out_dir": "/tmp/x", "typo_field": 3}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn resolution_is_idempotent() {
        let cfg = RunConfig::from_json(r#"{"case": "neumann3d", "out_dir": "/tmp/x"}"#)
            .unwrap()
            .resolve()
            .unwrap();
        let again = cfg.resolve().unwrap();
        assert_eq!(cfg, again);
        let json = cfg.to_json_pretty();
        let reparsed = RunConfig::from_json(&json).unwrap().resolve().unwrap();
        assert_eq!(reparsed.to_json_pretty(), json);
    }

    #[test]
    fn neumann_rejects_hard_constraints() {
        let mut cfg = RunConfig::new(Case::Neumann3d, "/tmp/x");
        cfg.hard_constraint = Some(HardConstraintChoice::Vanishing);
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn neumann_defaults_carry_the_boundary_weight() {
        let cfg = RunConfig::new(Case::Neumann3d, "/tmp/x").resolve().unwrap();
        let lambda = cfg.lambda.unwrap();
        assert_eq!(lambda.depth, 3);
        assert_eq!(lambda.width, 275);
        assert_eq!(lambda.boundary_weight, Some(400.0));
        assert_eq!(cfg.space.unwrap().boundary_weight, Some((1.0, 1e7)));
    }

    #[test]
    fn level_validation() {
        let mut cfg = RunConfig::new(Case::Dirichlet2d, "/tmp/x");
        cfg.level = Some(2);
        assert!(cfg.resolve().is_err());
        cfg.level = Some(3);
        assert!(cfg.resolve().is_ok());
    }
}
