//! Expectation values of Pauli sums on dense and tensor-train states.

use qtensor::circuit::{simulate_dense, Brickwork};
use qtensor::hamiltonian::{exact_spectrum_min, expval, tfim, Boundary, PauliHamiltonian};
use qtensor::tt::{simulate_tt, Truncation};
use qtensor::Result;

fn main() -> Result<()> {
    let h = PauliHamiltonian::from_json(include_str!("../data/tfim4.json"))?;
    println!("{} terms on {} qubits", h.terms().len(), h.n_qubits());
    println!("ground energy {:.10}", exact_spectrum_min(&h)?);

    let n = 8;
    let ansatz = Brickwork::new(n, 2).build()?;
    let theta: Vec<f64> = (0..ansatz.num_params()).map(|i| 0.1 * i as f64).collect();
    let circuit = ansatz.with_parameters(&theta)?;
    let chain = tfim(n, 1.0, 0.7, Boundary::Open)?;
    let ring = tfim(n, 1.0, 0.7, Boundary::Periodic)?;

    let psi = simulate_dense(&circuit)?;
    let tt = simulate_tt(&circuit, &Truncation::exact())?;
    println!("open chain: dense {:.12} tt {:.12}", expval(&psi, &chain)?, expval(&tt, &chain)?);
    println!("ring:       dense {:.12} tt {:.12}", expval(&psi, &ring)?, expval(&tt, &ring)?);
    println!("ring ground energy {:.10}", exact_spectrum_min(&ring)?);
    Ok(())
}
