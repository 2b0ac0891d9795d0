//! Tensor-network simulation of quantum circuits.
//!
//! States, gates and observables are kept in factorized form wherever
//! possible and contracted pairwise along optimized paths:
//!
//! - [`tensor`]: dense complex tensors and the pairwise contraction primitive.
//! - [`network`]: labeled networks, contraction path search and simplification.
//! - [`circuit`]: gates, circuits and the dense statevector reference engine.
//! - [`tt`]: tensor-train (matrix-product) states with SVD truncation.
//! - [`hamiltonian`]: Pauli-sum observables and expectation values.
//! - [`density`]: density operators, partial traces and entropies.
//! - [`autodiff`]: reverse-mode gradients of expectation values, with
//!   parameter-shift and finite-difference cross-checks, plus optimizers.
//! - [`maxcut`]: multi-basis-encoded MaxCut on top of the gradient stack.
//! - [`cli`]: the command line front end and benchmark harness.
//!
//! Qubit 0 is the most significant bit of a basis-state index everywhere, and
//! rotations follow `R_a(θ) = exp(−iθσ_a/2)`.

pub mod alloc;
pub mod autodiff;
pub mod circuit;
pub mod cli;
pub mod density;
pub mod error;
pub mod hamiltonian;
mod linalg;
pub mod maxcut;
pub mod network;
pub mod rng;
pub mod tensor;
pub mod tt;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use tensor::{adjoint, contract_pair, frobenius_norm, DenseTensor};
