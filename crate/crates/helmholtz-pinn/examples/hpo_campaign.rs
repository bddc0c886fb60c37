//! A desk-scale Bayesian HPO campaign on the 2-D Dirichlet benchmark:
//! a handful of random trials, then GP + expected-improvement proposals.
//! Takes well under a minute.
//!
//!     cargo run --release --example hpo_campaign

use helmholtz_pinn::hpo::{self, HpoConfig, HyperParams, SearchSpace};
use helmholtz_pinn::net::Activation;
use helmholtz_pinn::problem::{Case, HardConstraint, ProblemSpec};
use helmholtz_pinn::sampling::{self, BoundaryCountMode, SamplingPlan};
use helmholtz_pinn::seeds;

fn main() {
    let spec = ProblemSpec::manufactured(
        Case::Dirichlet2d,
        1,
        Some(HardConstraint::VanishingProduct),
        false,
    )
    .unwrap();
    let plan = SamplingPlan {
        r_train: 10.0,
        r_test: 30.0,
        level: None,
        boundary_mode: BoundaryCountMode::Formula,
    };
    let mut sample_rng = seeds::derived_rng(11, "sample", 0);
    let sets = sampling::assemble(&spec, &plan, &mut sample_rng).unwrap();

    // A reduced space keeps each inner training cheap.
    let space = SearchSpace {
        learning_rate: (1e-4, 5e-2),
        depth: (1, 2),
        width: (4, 32),
        boundary_weight: None,
    };
    let initial = HyperParams {
        learning_rate: 1e-3,
        depth: 1,
        width: 8,
        activation: Activation::Sin,
        boundary_weight: None,
    };
    let mut cfg = HpoConfig::new(space, initial);
    cfg.iterations = 12;
    cfg.n_random = 5;
    cfg.epochs = 1500;
    cfg.seed = 11;

    let result = hpo::run_hpo(&spec, &sets, &cfg).unwrap();

    println!("iter   phase      λ = [alpha, depth, width, act]         loss_test     best so far");
    for (t, best) in result.trials.iter().zip(&result.best_so_far) {
        let phase = if t.iteration < cfg.n_random { "random " } else { "guided " };
        println!(
            "{:4}   {phase}   {:40}  {:.4e}    {:.4e}",
            t.iteration,
            t.lambda.to_string(),
            t.loss_test,
            best
        );
    }
    let m = result.best_iteration.unwrap();
    println!(
        "\nbest configuration found at iteration {m}: {} with loss {:.4e} ({} parameters)",
        result.best_lambda.unwrap(),
        result.trials[m].loss_test,
        result.trials[m].param_count
    );
}
