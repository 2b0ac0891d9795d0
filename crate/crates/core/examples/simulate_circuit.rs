//! Dense and tensor-train simulation of the same circuit.
//!
//! `cargo run --example simulate_circuit -- 12 80 8` runs 80 random gates on
//! 12 qubits and caps the bond dimension at 8.

use qtensor::circuit::{random_circuit, simulate_dense};
use qtensor::rng::seeded;
use qtensor::tt::{simulate_tt, tt_to_dense, Truncation};
use qtensor::Result;

fn main() -> Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(10);
    let gates = args.get(1).copied().unwrap_or(60);
    let chi = args.get(2).copied().unwrap_or(4);

    let circuit = random_circuit(n, gates, &mut seeded(1))?;
    let dense = simulate_dense(&circuit)?;

    let exact = simulate_tt(&circuit, &Truncation::exact())?;
    println!("exact TT bonds {:?}", exact.bond_dims());
    println!("fidelity vs dense {:.12}", tt_to_dense(&exact)?.fidelity(&dense)?);

    let capped = simulate_tt(&circuit, &Truncation::new(1e-12, Some(chi)))?;
    println!("chi <= {chi}: bonds {:?}", capped.bond_dims());
    println!(
        "discarded weight {:.3e}, fidelity vs dense {:.6}",
        capped.discarded_weight(),
        tt_to_dense(&capped)?.normalized().fidelity(&dense)?
    );

    println!("{}", qtensor::circuit::Circuit::from_json(include_str!("../data/bell.json"))?.to_json()?);
    Ok(())
}
