//! Reduced density operators, purity, entropies and mutual information.

use qtensor::circuit::{simulate_dense, Circuit};
use qtensor::density::{
    density_from_state, mutual_information, partial_trace, partial_trace_pure, purity, von_neumann_entropy,
};
use qtensor::rng::{random_state, seeded};
use qtensor::Result;

fn main() -> Result<()> {
    let bell = simulate_dense(&Circuit::from_json(include_str!("../data/bell.json"))?)?;
    let marginal = partial_trace_pure(&bell, &[0])?;
    println!("Bell marginal diag {:?}", [marginal.get(0, 0).re, marginal.get(1, 1).re]);
    println!("S(A) = {:.6} nats = {:.6} bits", von_neumann_entropy(&marginal, false)?, von_neumann_entropy(&marginal, true)?);
    println!("I(A:B) = {:.6} (2 ln 2 = {:.6})", mutual_information(&bell, &[0], &[1])?, 2.0 * 2f64.ln());

    let psi = random_state(8, &mut seeded(3));
    let a = partial_trace_pure(&psi, &[0, 1, 2])?;
    let b = partial_trace_pure(&psi, &[3, 4, 5, 6, 7])?;
    println!(
        "random 8 qubits: purity {:.6}, S(A) {:.10}, S(B) {:.10}",
        purity(&a),
        von_neumann_entropy(&a, false)?,
        von_neumann_entropy(&b, false)?
    );

    // the same marginal through the full density matrix
    let rho = density_from_state(&psi)?;
    let explicit = partial_trace(&rho, &[0, 1, 2])?;
    println!("compact vs explicit trace: {:.2e}", a.matrix().max_abs_diff(explicit.matrix()));
    Ok(())
}
