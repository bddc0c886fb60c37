//! Network parameter serialization: a JSON architecture header followed by
//! the flat f64 little-endian parameter values (layer by layer, weights
//! row-major then bias). Writes, reloads, and verifies bit equality.
//!
//!     cargo run --release --example params_io

use helmholtz_pinn::net::{Activation, Architecture, MlpParams};
use helmholtz_pinn::seeds;

fn main() {
    let arch = Architecture::new(2, vec![8, 8], Activation::Sin).unwrap();
    let mut rng = seeds::derived_rng(11, "example-params", 0);
    let params = MlpParams::glorot_init(arch, &mut rng);

    let mut blob = Vec::new();
    params.save_to(&mut blob).unwrap();
    let header_len = u32::from_le_bytes(blob[..4].try_into().unwrap()) as usize;
    println!("blob size: {} bytes", blob.len());
    println!("header ({header_len} bytes): {}", std::str::from_utf8(&blob[4..4 + header_len]).unwrap());
    println!("payload: {} f64 values", (blob.len() - 4 - header_len) / 8);

    let reloaded = MlpParams::load_from(&mut blob.as_slice()).unwrap();
    assert_eq!(params.values(), reloaded.values());
    assert_eq!(params.arch(), reloaded.arch());

    let x = [0.3, 0.7];
    println!(
        "forward before/after round-trip: {:+.12e} / {:+.12e}",
        params.forward(&x).unwrap(),
        reloaded.forward(&x).unwrap()
    );
    println!("bit-identical: true");
}
