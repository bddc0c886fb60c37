//! Collocation levels and densities: the precision table r = n_x/ω for the
//! (ω, level) grid, then a miniature sweep through the run directory writer.
//! The sweep output lands in `runs/level_sweep_example/`.
//!
//!     cargo run --release --example level_sweep

use helmholtz_pinn::config::RunConfig;
use helmholtz_pinn::problem::Case;
use helmholtz_pinn::runner;
use helmholtz_pinn::sampling::{level_size, precision_of};

fn main() {
    println!("precision r (points per wavelength per dimension), by pulsation and level:");
    println!("  ω \\ level      1        3        5");
    for omega in [2u32, 4, 6] {
        let row: Vec<String> = [1u32, 3, 5]
            .iter()
            .map(|&l| {
                let (n, _) = level_size(l).unwrap();
                format!("{:7.1}", precision_of(n, omega))
            })
            .collect();
        println!("  {omega}         {}", row.join("  "));
    }
    for l in [1u32, 3, 5] {
        let (n, total) = level_size(l).unwrap();
        println!("level {l}: n_l = {n}, |T_l| = {total}");
    }

    // A deliberately tiny 1x1 sweep demonstrating the directory layout.
    let mut cfg = RunConfig::new(Case::Dirichlet2d, "runs/level_sweep_example");
    cfg.sweep_omegas = vec![2];
    cfg.sweep_levels = vec![1];
    cfg.iterations = 3;
    cfg.n_random = 2;
    cfg.epochs = 200;
    cfg.log_every = 50;
    let dir = runner::cmd_sweep(&cfg).unwrap();
    println!("\nsweep written to {}", dir.display());
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    println!("summary.csv:\n{summary}");
}
