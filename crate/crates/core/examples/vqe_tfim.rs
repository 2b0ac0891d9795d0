//! Variational ground state of the transverse-field Ising chain.
//!
//! `cargo run --release --example vqe_tfim -- 6` picks the chain length.

use qtensor::autodiff::{grad_expval, minimize_restarts, Engine, MinimizeConfig, Optimizer};
use qtensor::circuit::Brickwork;
use qtensor::hamiltonian::{exact_spectrum_min, tfim, Boundary};
use qtensor::Result;

fn main() -> Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let h = tfim(n, 1.0, 1.0, Boundary::Open)?;
    let exact = exact_spectrum_min(&h)?;
    let ansatz = Brickwork::new(n, 4).rotations(&["ry", "rz"]).build()?;
    let cfg = MinimizeConfig {
        max_iters: 2000,
        rate: 0.05,
        ..MinimizeConfig::default()
    };
    let run = minimize_restarts(
        |theta: &[f64]| grad_expval(&ansatz, &h, theta, &Engine::Dense),
        ansatz.num_params(),
        &Optimizer::Adam,
        &cfg,
        3,
        42,
    )?;
    let best = run.final_value().expect("at least one step");
    println!("n = {n}, {} parameters, {} iterations", ansatz.num_params(), run.steps.len());
    println!("variational {best:.8}, exact {exact:.8}, relative error {:.2e}", (best - exact).abs() / exact.abs());
    Ok(())
}
