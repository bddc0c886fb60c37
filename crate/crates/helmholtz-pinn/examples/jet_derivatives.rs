//! Exact first and second input derivatives through the network, compared
//! against central finite differences, and the Helmholtz residual they feed.
//!
//!     cargo run --release --example jet_derivatives

use helmholtz_pinn::net::{Activation, Architecture, MlpParams};
use helmholtz_pinn::problem::{helmholtz_residual, Case, ProblemSpec};
use helmholtz_pinn::seeds;

fn main() {
    let arch = Architecture::new(2, vec![16, 16], Activation::Tanh).unwrap();
    let mut rng = seeds::derived_rng(11, "example-jet", 0);
    let params = MlpParams::glorot_init(arch, &mut rng);

    let x = [0.37, 0.81];
    let jet = params.forward_jet(&x).unwrap();
    println!("u(x) = {:+.12e}", jet.value);

    let h = 1e-4;
    for i in 0..2 {
        let mut xp = x;
        let mut xm = x;
        xp[i] += h;
        xm[i] -= h;
        let fp = params.forward(&xp).unwrap();
        let fm = params.forward(&xm).unwrap();
        let f0 = params.forward(&x).unwrap();
        let fd1 = (fp - fm) / (2.0 * h);
        let fd2 = (fp - 2.0 * f0 + fm) / (h * h);
        println!(
            "d/dx{i}:   jet {:+.12e}   fd {:+.12e}   |diff| {:.2e}",
            jet.dx[i],
            fd1,
            (jet.dx[i] - fd1).abs()
        );
        println!(
            "d2/dx{i}2: jet {:+.12e}   fd {:+.12e}   |diff| {:.2e}",
            jet.dxx[i],
            fd2,
            (jet.dxx[i] - fd2).abs()
        );
    }

    // The jet is what the PDE residual consumes: -Δu - κ²u - f.
    let spec = ProblemSpec::manufactured(Case::Dirichlet2d, 1, None, false).unwrap();
    let rho = helmholtz_residual(&jet, spec.wavenumber, (spec.source)(&x));
    println!("\nHelmholtz residual of this (untrained) network at x: {rho:+.6e}");
    println!("laplacian from the jet: {:+.6e}", jet.laplacian());
}
