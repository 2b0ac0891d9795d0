//! Reverse-mode gradients checked against parameter shifts and finite
//! differences, on both engines.

use qtensor::autodiff::{finite_diff_grad, grad_expval, parameter_shift_grad, Engine, DEFAULT_FD_STEP};
use qtensor::circuit::Circuit;
use qtensor::hamiltonian::PauliHamiltonian;
use qtensor::tt::Truncation;
use qtensor::Result;

fn main() -> Result<()> {
    let circuit = Circuit::from_json(include_str!("../data/ansatz4.json"))?;
    let h = PauliHamiltonian::from_json(include_str!("../data/tfim4.json"))?;
    let theta = circuit.parameters();

    let (value, ad) = grad_expval(&circuit, &h, &theta, &Engine::Dense)?;
    let (_, tt) = grad_expval(&circuit, &h, &theta, &Engine::Tt(Truncation::exact()))?;
    let shift = parameter_shift_grad(&circuit, &h, &theta, &Engine::Dense)?;
    let fd = finite_diff_grad(&circuit, &h, &theta, DEFAULT_FD_STEP, &Engine::Dense)?;

    println!("<H> = {value:.12}");
    println!("{:>4} {:>16} {:>16} {:>16} {:>16}", "k", "ad dense", "ad tt", "shift", "fd");
    for k in 0..theta.len() {
        println!("{k:>4} {:>16.12} {:>16.12} {:>16.12} {:>16.12}", ad[k], tt[k], shift[k], fd[k]);
    }
    Ok(())
}
