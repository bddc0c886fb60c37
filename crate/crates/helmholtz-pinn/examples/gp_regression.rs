//! Gaussian-process regression on a 1-D toy function: MLE kernel fit,
//! posterior interpolation, and the expected-improvement scores that drive
//! the hyper-parameter search.
//!
//!     cargo run --release --example gp_regression

use helmholtz_pinn::gp::{self, GpConfig};
use helmholtz_pinn::hpo::expected_improvement;
use helmholtz_pinn::seeds;

fn main() {
    let xs: Vec<Vec<f64>> = [0.02, 0.1, 0.2, 0.33, 0.45, 0.55, 0.68, 0.8, 0.9, 0.98]
        .iter()
        .map(|&v| vec![v])
        .collect();
    let f = |t: f64| (6.0 * t).sin() + 0.8 * t;
    let ys: Vec<f64> = xs.iter().map(|p| f(p[0])).collect();

    let mut rng = seeds::derived_rng(11, "example-gp", 0);
    let model = gp::fit(xs.clone(), &ys, &GpConfig::default(), &mut rng).unwrap();
    let h = model.hyper();
    println!(
        "fitted kernel: signal {:.4e}, length scale {:.4e}, noise {:.4e}, lml {:.4}",
        h.signal_var, h.length_scales[0], h.noise_var, h.log_marginal_likelihood
    );

    let best = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("\n   t       truth      mean        std         EI(min)");
    for j in 0..=20 {
        let t = j as f64 / 20.0;
        let (mu, sigma) = model.predict(&[t]);
        let ei = expected_improvement(mu, sigma, best, 0.01);
        println!("{t:6.3}   {:+.4}   {:+.4}   {:.4e}   {:.4e}", f(t), mu, sigma, ei);
    }
    println!("\nincumbent best observation: {best:+.4}");
}
