//! Desk-scale run of the 3-D Neumann protocol: n_x² domain points, the
//! boundary-count rule with axis-aligned normals, a weighted boundary term,
//! and shared train/test sets.
//!
//! Pure Neumann data make this benchmark much harder than the Dirichlet one
//! (the operator admits cosine modes that satisfy the homogeneous conditions),
//! so the point here is the protocol, not a resolved solution.
//!
//!     cargo run --release --example train_neumann

use helmholtz_pinn::net::Activation;
use helmholtz_pinn::optimizer::{self, TrainOptions};
use helmholtz_pinn::problem::{Case, ProblemSpec};
use helmholtz_pinn::sampling::{self, BoundaryCountMode, SamplingPlan};
use helmholtz_pinn::{seeds, HyperParams};

fn main() {
    let spec = ProblemSpec::manufactured(Case::Neumann3d, 1, None, false).unwrap();
    let plan = SamplingPlan {
        r_train: 10.0,
        r_test: 30.0,
        level: None,
        boundary_mode: BoundaryCountMode::Formula,
    };
    let mut sample_rng = seeds::derived_rng(11, "sample", 0);
    let sets = sampling::assemble(&spec, &plan, &mut sample_rng).unwrap();
    println!(
        "domain points: {} (n_x² with n_x = 10), boundary points: {} (2^(d-1)·d·n_x^(d-1))",
        sets.domain_train.len(),
        sets.boundary_train.len()
    );
    assert_eq!(sets.domain_train, sets.domain_test, "Neumann protocol shares the sets");

    let lambda = HyperParams {
        learning_rate: 1e-3,
        depth: 2,
        width: 16,
        activation: Activation::Sin,
        boundary_weight: Some(400.0),
    };
    let opts = TrainOptions { epochs: 1500, log_every: 100, adam_epsilon: 1e-7 };
    let mut rng = seeds::derived_rng(11, "train", 0);
    let result = optimizer::train(&lambda, &spec, &sets, &opts, &mut rng).unwrap();

    println!("\nepoch   total loss     pde term       bc term");
    for r in result.history.iter().step_by(3) {
        println!("{:5}   {:.6e}   {:.6e}   {:.6e}", r.epoch, r.loss_train, r.pde_term, r.bc_term);
    }
    let best = result.best_record();
    println!(
        "\nbest epoch {}: loss {:.3e}, relative l2 error {:.3e}",
        result.best_epoch,
        best.loss_train,
        best.metric.unwrap_or(f64::NAN)
    );
}
