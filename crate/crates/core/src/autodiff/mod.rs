//! Gradients of `⟨ψ(θ)|H|ψ(θ)⟩` with respect to trainable gate angles.
//!
//! [`grad_expval`] records the simulation on a [`GradTape`] and sweeps it in
//! reverse. [`parameter_shift_grad`] and [`finite_diff_grad`] are independent
//! oracles built only from forward simulations.
//!
//! The TT engine is differentiated exactly when truncation is off
//! (`eps = 0`, no `chi_max`). Any truncation makes the kept singular vectors
//! and orthogonalization factors constants of the backward sweep, so gradients
//! are then approximate.

mod optim;
mod record;
mod tape;

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::str::FromStr;

use rayon::prelude::*;

pub use optim::{minimize, minimize_restarts, MinimizeConfig, Optimizer, Step, Trajectory};
pub use record::Recording;
pub use tape::{GradTape, NodeId, ParamBinding};

use crate::circuit::{simulate_dense, Circuit};
use crate::error::{Error, Result};
use crate::hamiltonian::{expval, PauliHamiltonian};
use crate::tt::{simulate_tt, Truncation};

/// Simulation backend used to evaluate a circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Engine {
    Dense,
    Tt(Truncation),
}

impl Engine {
    /// Tensor train without truncation.
    pub fn tt_exact() -> Self {
        Engine::Tt(Truncation::exact())
    }
}

impl FromStr for Engine {
    type Err = Error;

    /// `dense` or `tt`; the TT form starts with the default truncation.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Engine::Dense),
            "tt" => Ok(Engine::Tt(Truncation::default())),
            other => Err(Error::InvalidArgument(format!("unknown engine `{other}`"))),
        }
    }
}

/// Forward evaluation of `⟨H⟩` at `theta` without a tape.
pub fn expval_at(circuit: &Circuit, h: &PauliHamiltonian, theta: &[f64], engine: &Engine) -> Result<f64> {
    let c = circuit.with_parameters(theta)?;
    match engine {
        Engine::Dense => expval(&simulate_dense(&c)?, h),
        Engine::Tt(trunc) => expval(&simulate_tt(&c, trunc)?, h),
    }
}

/// `⟨H⟩` and `∂⟨H⟩/∂θ` by one reverse sweep.
pub fn grad_expval(
    circuit: &Circuit,
    h: &PauliHamiltonian,
    theta: &[f64],
    engine: &Engine,
) -> Result<(f64, Vec<f64>)> {
    Recording::record(circuit, theta, engine)?.expval_and_grad(h)
}

/// Shift-rule gradient. Single-qubit rotations use the two-term rule at
/// `±π/2`. `crz` has generator eigenvalues `{0, ±1/2}` and needs the four-term
/// rule at `±π/2` and `±3π/2`.
pub fn parameter_shift_grad(
    circuit: &Circuit,
    h: &PauliHamiltonian,
    theta: &[f64],
    engine: &Engine,
) -> Result<Vec<f64>> {
    if theta.len() != circuit.num_params() {
        return Err(Error::ParamCountMismatch {
            expected: circuit.num_params(),
            got: theta.len(),
        });
    }
    let names: Vec<&str> = circuit.trainable().iter().map(|&g| circuit.gates()[g].name()).collect();
    for name in &names {
        if !matches!(*name, "rx" | "ry" | "rz" | "crz") {
            return Err(Error::UnsupportedGateForShift(name.to_string()));
        }
    }
    let shifted = |k: usize, s: f64| -> Result<f64> {
        let mut t = theta.to_vec();
        t[k] += s;
        expval_at(circuit, h, &t, engine)
    };
    let diff = |k: usize, s: f64| -> Result<f64> { Ok(shifted(k, s)? - shifted(k, -s)?) };
    names
        .par_iter()
        .enumerate()
        .map(|(k, name)| {
            if *name == "crz" {
                let c1 = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
                let c2 = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
                Ok(c1 * diff(k, FRAC_PI_2)? - c2 * diff(k, 3.0 * FRAC_PI_2)?)
            } else {
                Ok(diff(k, FRAC_PI_2)? / 2.0)
            }
        })
        .collect()
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central differences with the given step on each coordinate.
pub fn finite_diff_grad(
    circuit: &Circuit,
    h: &PauliHamiltonian,
    theta: &[f64],
    step: f64,
    engine: &Engine,
) -> Result<Vec<f64>> {
    if theta.len() != circuit.num_params() {
        return Err(Error::ParamCountMismatch {
            expected: circuit.num_params(),
            got: theta.len(),
        });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    (0..theta.len())
        .into_par_iter()
        .map(|k| {
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[k] += step;
            tm[k] -= step;
            Ok((expval_at(circuit, h, &tp, engine)? - expval_at(circuit, h, &tm, engine)?) / (2.0 * step))
        })
        .collect()
}
