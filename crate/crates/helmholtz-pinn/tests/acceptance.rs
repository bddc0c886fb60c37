//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them). Criteria AC-1
//! through AC-8 pin the structural reproductions, derivative and surrogate
//! correctness, and the desk-scale training/HPO behavior of the crate.

use helmholtz_pinn::gp::{self, GpConfig, NoiseModel};
use helmholtz_pinn::hpo::{
    self, decode, decode_activation, encode, expected_improvement, random_lambda, HpoConfig,
    ACTIVATION_ORDER,
};
use helmholtz_pinn::loss::{self, LossWeights, SetView};
use helmholtz_pinn::net::{Activation, Architecture, InputJet, MlpParams};
use helmholtz_pinn::optimizer::{self, TrainOptions};
use helmholtz_pinn::problem::{
    helmholtz_residual, neumann_residual, Case, HardConstraint, ProblemSpec,
};
use helmholtz_pinn::sampling::{
    self, level_size, points_per_dim, precision_of, BoundaryCountMode, SamplingPlan,
};
use helmholtz_pinn::seeds;
use helmholtz_pinn::{CollocationSet, HyperParams, SearchSpace};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[test]
fn ac1_parameter_count_reproduction() {
    let cases = [
        (2usize, 2usize, 275usize, 77_001usize),
        (3, 10, 207, 388_540),
        (3, 3, 292, 172_573),
    ];
    for (d, depth, width, expected) in cases {
        let arch = Architecture::constant_width(d, depth, width, Activation::Sin).unwrap();
        assert_eq!(arch.param_count(), expected, "d={d} {depth}x{width}");
    }
    // The larger two round to 3.9e5 and 1.7e5.
    assert_eq!((388_540.0f64 / 1e5).round() as u64, 4);
    assert!((388_540.0 / 1e5 - 3.9f64).abs() < 0.05);
    assert!((172_573.0 / 1e5 - 1.7f64).abs() < 0.05);
    println!("AC-1 parameter-count reproduction: PASS (77001, 388540, 172573)");
}

#[test]
fn ac2_sampling_arithmetic() {
    assert_eq!(points_per_dim(10.0, 2).pow(2), 400);
    assert_eq!(points_per_dim(30.0, 2).pow(2), 3600);
    let table = [(2u32, [5.0, 20.0, 80.0]), (4, [2.5, 10.0, 40.0]), (6, [1.7, 6.7, 26.7])];
    for (omega, row) in table {
        for (i, level) in [1u32, 3, 5].into_iter().enumerate() {
            let (n_x, _) = level_size(level).unwrap();
            let r = precision_of(n_x, omega);
            assert!(
                (r - row[i]).abs() < 1e-12,
                "omega {omega} level {level}: {r} vs {}",
                row[i]
            );
        }
    }
    println!("AC-2 sampling arithmetic: PASS (|T|=400/3600, all 9 precision cells)");
}

#[test]
fn ac3_derivative_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_jet = 0.0f64;
    let mut worst_grad = 0.0f64;
    for draw in 0..100 {
        let d = if draw % 2 == 0 { 2 } else { 3 };
        let depth = 1 + draw % 3;
        let width = 4 + (draw * 7) % 29; // ≤ 32
        let act = Activation::ALL[draw % 3];
        let arch = Architecture::constant_width(d, depth, width, act).unwrap();
        let mut init_rng = ChaCha8Rng::seed_from_u64(1000 + draw as u64);
        let mut params = MlpParams::glorot_init(arch, &mut init_rng);

        // Jet check at one random point per draw.
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let jet = params.forward_jet(&x).unwrap();
        let h = 1e-4;
        for i in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fp = params.forward(&xp).unwrap();
            let fm = params.forward(&xm).unwrap();
            let f0 = params.forward(&x).unwrap();
            let e1 = rel_err(jet.dx[i], (fp - fm) / (2.0 * h));
            let e2 = rel_err(jet.dxx[i], (fp - 2.0 * f0 + fm) / (h * h));
            worst_jet = worst_jet.max(e1).max(e2);
            assert!(e1 <= 1e-6 && e2 <= 1e-6, "draw {draw} dir {i}: jet errors {e1} {e2}");
        }

        // Composite-loss gradient check on sampled coordinates.
        let spec = if d == 2 {
            ProblemSpec::manufactured(Case::Dirichlet2d, 1, None, false).unwrap()
        } else {
            ProblemSpec::manufactured(Case::Neumann3d, 1, None, false).unwrap()
        };
        let sets = CollocationSet {
            domain_train: sampling::sample_domain(5, d, &mut rng),
            boundary_train: sampling::sample_boundary(4, d, &mut rng),
            ..Default::default()
        };
        let weights = LossWeights::with_boundary(3.0);
        let (_, grad) =
            loss::composite_loss_gradient(&params, SetView::train(&sets), &weights, &spec)
                .unwrap();
        let n = params.values().len();
        let stride = (n / 40).max(1);
        let hg = 1e-5;
        for idx in (0..n).step_by(stride) {
            let orig = params.values()[idx];
            params.values_mut()[idx] = orig + hg;
            let lp = loss::composite_loss(&params, SetView::train(&sets), &weights, &spec)
                .unwrap()
                .total;
            params.values_mut()[idx] = orig - hg;
            let lm = loss::composite_loss(&params, SetView::train(&sets), &weights, &spec)
                .unwrap()
                .total;
            params.values_mut()[idx] = orig;
            let fd = (lp - lm) / (2.0 * hg);
            let e = rel_err(grad[idx], fd);
            worst_grad = worst_grad.max(e);
            assert!(e <= 1e-5, "draw {draw} param {idx}: grad {} vs fd {fd}", grad[idx]);
        }
    }
    println!(
        "AC-3 derivative correctness: PASS (worst jet rel err {worst_jet:.2e}, worst grad rel err {worst_grad:.2e})"
    );
}

/// Analytic jet of sin(κx)sin(κy).
fn dirichlet_exact_jet(k: f64, x: &[f64]) -> InputJet {
    let (sx, cx) = (k * x[0]).sin_cos();
    let (sy, cy) = (k * x[1]).sin_cos();
    InputJet {
        value: sx * sy,
        dx: vec![k * cx * sy, k * sx * cy],
        dxx: vec![-k * k * sx * sy, -k * k * sx * sy],
    }
}

/// Analytic jet of cos(κx)cos(κy) in three dimensions.
fn neumann_exact_jet(k: f64, x: &[f64]) -> InputJet {
    let (sx, cx) = (k * x[0]).sin_cos();
    let (sy, cy) = (k * x[1]).sin_cos();
    InputJet {
        value: cx * cy,
        dx: vec![-k * sx * cy, -k * cx * sy, 0.0],
        dxx: vec![-k * k * cx * cy, -k * k * cx * cy, 0.0],
    }
}

#[test]
fn ac4_manufactured_solution_consistency() {
    let spec = ProblemSpec::manufactured(Case::Dirichlet2d, 2, None, false).unwrap();
    let k = spec.wavenumber;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = vec![rng.gen::<f64>(), rng.gen::<f64>()];
        let rho = helmholtz_residual(&dirichlet_exact_jet(k, &x), k, (spec.source)(&x));
        worst = worst.max(rho.abs());
        assert!(rho.abs() <= 1e-9, "pde residual {rho} at {x:?}");
    }

    let nspec = ProblemSpec::manufactured(Case::Neumann3d, 2, None, false).unwrap();
    let nk = nspec.wavenumber;
    let mut worst_n = 0.0f64;
    for axis in 0..3 {
        for face in 0..2 {
            for _ in 0..1000 {
                let mut x = vec![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
                x[axis] = f64::from(face);
                let mut normal = vec![0.0; 3];
                normal[axis] = if face == 0 { -1.0 } else { 1.0 };
                let rho = neumann_residual(&neumann_exact_jet(nk, &x), &normal, 0.0);
                worst_n = worst_n.max(rho.abs());
                assert!(rho.abs() <= 1e-9, "bc residual {rho} on axis {axis} face {face}");
            }
        }
    }
    println!(
        "AC-4 manufactured-solution consistency: PASS (max |pde residual| {worst:.2e}, max |bc residual| {worst_n:.2e})"
    );
}

// KNOWN RED: the metric clause passes (9.6e-2 <= 1e-1) but the pinned
// learning-rate/epoch pairing cannot reach the 3-decade loss-reduction
// clause: seeds 1-4 and 11 all land at 1.96-2.23 decades, sparser sampling
// trades the two clauses against each other, and the quadratic multiplier
// converges to a wrong solution. The same configuration passes both clauses
// at 10,000 epochs (3.5 decades, metric 2.2e-2). The assertions are kept as
// stated rather than loosened.
#[test]
fn ac5_desk_scale_training() {
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
    let lambda = HyperParams {
        learning_rate: 1e-4,
        depth: 2,
        width: 64,
        activation: Activation::Sin,
        boundary_weight: None,
    };
    let opts = TrainOptions { epochs: 5000, log_every: 100, adam_epsilon: 1e-7 };
    let mut rng = seeds::derived_rng(11, "train", 0);
    let result = optimizer::train(&lambda, &spec, &sets, &opts, &mut rng).unwrap();
    assert!(!result.diverged);
    let best = result.best_record();
    let metric = best.metric.unwrap();
    let decades = (result.history[0].loss_train / best.loss_train).log10();
    println!(
        "AC-5 desk-scale training: metric = {metric:.4e} (need <= 1e-1), \
         training-loss reduction = {decades:.2} decades (need >= 3)"
    );
    assert!(metric <= 1e-1, "relative l2 metric {metric} exceeds 1e-1");
    assert!(
        decades >= 3.0,
        "training loss fell {decades:.2} orders of magnitude, need >= 3"
    );
    println!("AC-5 desk-scale training: PASS");
}

#[test]
fn ac6_gp_and_ei_correctness() {
    // Noise-free interpolation through five separated random points.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pts: Vec<f64> = Vec::new();
    while pts.len() < 5 {
        let c = rng.gen::<f64>();
        if pts.iter().all(|p| (p - c).abs() > 0.08) {
            pts.push(c);
        }
    }
    let x: Vec<Vec<f64>> = pts.iter().map(|&p| vec![p]).collect();
    let y: Vec<f64> = pts.iter().map(|&p| (4.0 * p).sin() - p).collect();
    let cfg = GpConfig { noise: NoiseModel::Fixed(1e-12), ..GpConfig::default() };
    let model = gp::fit(x.clone(), &y, &cfg, &mut rng).unwrap();
    let mut worst_mu = 0.0f64;
    let mut worst_sigma = 0.0f64;
    for (p, target) in x.iter().zip(&y) {
        let (mu, sigma) = model.predict(p);
        worst_mu = worst_mu.max((mu - target).abs());
        worst_sigma = worst_sigma.max(sigma);
        assert!((mu - target).abs() <= 1e-6, "interpolation error {}", (mu - target).abs());
        assert!(sigma <= 1e-4, "interpolation sigma {sigma}");
    }

    // Closed-form EI spot values.
    assert_eq!(expected_improvement(1.0, 0.0, 1.0, 0.0), 0.0);
    assert_eq!(expected_improvement(5.0, 0.0, 1.0, 0.0), 0.0);
    let phi0 = expected_improvement(0.0, 1.0, 0.0, 0.0);
    assert!((phi0 - 0.39894).abs() <= 1e-5, "EI at incumbent {phi0}");
    println!(
        "AC-6 GP/EI correctness: PASS (max interp err {worst_mu:.2e}, max sigma {worst_sigma:.2e}, EI(0,1)={phi0:.5})"
    );
}

fn campaign_problem() -> (ProblemSpec, CollocationSet) {
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
    (spec, sets)
}

/// Reduced width/depth ranges keep a 15-trial campaign at K=2000 inside the
/// runtime budget on one core; the learning-rate range stays full.
fn campaign_config(seed: u64, pure_random: bool) -> HpoConfig {
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
    cfg.iterations = 15;
    cfg.n_random = if pure_random { cfg.iterations } else { 5 };
    cfg.epochs = 2000;
    cfg.log_every = 100;
    cfg.seed = seed;
    cfg
}

#[test]
fn ac7_hpo_behavior() {
    let (spec, sets) = campaign_problem();

    let guided = hpo::run_hpo(&spec, &sets, &campaign_config(11, false)).unwrap();
    for w in guided.best_so_far.windows(2) {
        assert!(w[1] <= w[0], "best-so-far increased: {w:?}");
    }

    // Bit-identical rerun under the same seed.
    let rerun = hpo::run_hpo(&spec, &sets, &campaign_config(11, false)).unwrap();
    assert_eq!(guided.trials.len(), rerun.trials.len());
    for (a, b) in guided.trials.iter().zip(&rerun.trials) {
        assert_eq!(a.loss_test.to_bits(), b.loss_test.to_bits());
        assert_eq!(a.loss_train.to_bits(), b.loss_train.to_bits());
        assert_eq!(a.encoded, b.encoded);
        assert_eq!(a.lambda, b.lambda);
    }
    assert_eq!(
        guided.best_params.as_ref().map(|p| p.values().to_vec()),
        rerun.best_params.as_ref().map(|p| p.values().to_vec())
    );

    // Matched-budget pure-random baselines.
    let mut random_bests: Vec<f64> = [1u64, 2, 3]
        .iter()
        .map(|&s| *hpo::run_hpo(&spec, &sets, &campaign_config(s, true)).unwrap().best_so_far.last().unwrap())
        .collect();
    random_bests.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = random_bests[1];
    let final_best = *guided.best_so_far.last().unwrap();
    println!(
        "AC-7 HPO behavior: guided best = {final_best:.4e}, random bests = {random_bests:?}, median = {median:.4e}"
    );
    assert!(
        final_best <= median,
        "guided campaign ({final_best}) did not beat the random median ({median})"
    );
    println!("AC-7 HPO behavior: PASS (non-increasing, bit-identical rerun, beats random median)");
}

#[test]
fn ac8_encode_decode_and_categoricals() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for space in [SearchSpace::dirichlet_default(), SearchSpace::neumann_default()] {
        for _ in 0..50 {
            let lambda = random_lambda(&space, &mut rng);
            let back = decode(&encode(&lambda, &space).unwrap(), &space).unwrap();
            assert_eq!(back.depth, lambda.depth);
            assert_eq!(back.width, lambda.width);
            assert_eq!(back.activation, lambda.activation);
            assert!(rel_err(back.learning_rate, lambda.learning_rate) <= 1e-12);
            match (back.boundary_weight, lambda.boundary_weight) {
                (Some(a), Some(b)) => assert!(rel_err(a, b) <= 1e-12),
                (None, None) => {}
                other => panic!("boundary weight mismatch: {other:?}"),
            }
        }
    }
    // Worked categorical example: [0.4, 0] over (tanh, sin) decodes to tanh.
    let act = decode_activation(&[0.4, 0.0], &[Activation::Tanh, Activation::Sin]);
    assert_eq!(act, Activation::Tanh);
    assert_eq!(ACTIVATION_ORDER, [Activation::Sin, Activation::Sigmoid, Activation::Tanh]);
    println!("AC-8 encode/decode and categorical handling: PASS (100 round-trips, worked example)");
}
