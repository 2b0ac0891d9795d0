//! Seeded randomness. Every stochastic routine in the crate draws from
//! [`seeded`], so a fixed seed reproduces a run bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::circuit::StateVector;
use crate::C64;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> StateVector {
    let amps: Vec<C64> = (0..1usize << n_qubits)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::from_vec_unchecked(n_qubits, amps).normalized()
}
