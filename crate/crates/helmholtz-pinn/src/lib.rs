//! Physics-informed neural networks for Helmholtz boundary-value problems on the
//! unit square/cube, with Gaussian-process Bayesian optimization of the training
//! hyper-parameters.
//!
//! The crate is organized around a bi-level pipeline:
//!
//! - the *inner* problem trains a dense network so that its output satisfies
//!   `-Δu - κ²u = f` plus boundary conditions, by minimizing a weighted
//!   mean-squared residual loss with ADAM ([`net`], [`problem`], [`sampling`],
//!   [`loss`], [`optimizer`]);
//! - the *outer* problem searches over learning rate, depth, width, activation
//!   and boundary weight with a Gaussian-process surrogate and expected
//!   improvement ([`gp`], [`hpo`]).
//!
//! [`runner`] ties both levels to JSON run configurations and CSV outputs, and
//! backs the `helmholtz-pinn` binary (`train`, `hpo`, `sweep` subcommands).
//! The `examples/` directory has one runnable example per capability.
//!
//! All numerics are f64. Everything that draws randomness takes a seeded
//! [`rand_chacha::ChaCha8Rng`], so runs are reproducible bit-for-bit on any
//! platform for a fixed seed.

pub mod config;
pub mod gp;
pub mod hpo;
pub mod loss;
pub mod net;
pub mod optimizer;
pub mod problem;
pub mod runner;
pub mod sampling;
pub mod seeds;

pub use config::RunConfig;
pub use hpo::{HpoConfig, HpoResult, HyperParams, SearchSpace, TrialRecord};
pub use net::{Activation, Architecture, InputJet, MlpParams};
pub use optimizer::{AdamState, TrainOptions, TrainResult};
pub use problem::{BcKind, BoundaryPoint, Case, HardConstraint, ProblemSpec};
pub use sampling::CollocationSet;
