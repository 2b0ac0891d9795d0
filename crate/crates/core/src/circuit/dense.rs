use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::tensor::{frobenius_norm, DenseTensor};
use crate::C64;

/// 2^26 amplitudes is 1 GiB; beyond that the dense engine refuses to run.
pub const DENSE_QUBIT_LIMIT: usize = 26;

/// Dense `n`-qubit pure state. Qubit 0 is the most significant bit of the
/// amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: DenseTensor,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        let slot = amps
            .get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("basis index {index} out of range")))?;
        *slot = C64::new(1.0, 0.0);
        Ok(Self::from_vec_unchecked(n_qubits, amps))
    }

    /// Wraps `2^n` amplitudes; no normalization is applied.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::SizeMismatch(format!(
                "{len} amplitudes is not a power of two ≥ 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_size(n)?;
        let t = DenseTensor::new(vec![2; n], amps)?;
        Ok(Self { n_qubits: n, amps: t })
    }

    pub(crate) fn from_vec_unchecked(n_qubits: usize, amps: Vec<C64>) -> Self {
        Self {
            n_qubits,
            amps: DenseTensor::from_parts(vec![2; n_qubits], amps),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.data()
    }

    /// Amplitudes as a rank-`n` tensor with every axis of extent 2.
    pub fn tensor(&self) -> &DenseTensor {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        frobenius_norm(&self.amps)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            n_qubits: self.n_qubits,
            amps: self.amps.scale(C64::new(1.0 / n, 0.0)),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        let n = self.n_qubits;
        for &w in gate.wires() {
            if w >= n {
                return Err(Error::WireOutOfRange { wire: w, n });
            }
        }
        apply_matrix(self.amps.data_mut(), n, gate.wires(), gate.matrix().data());
        Ok(())
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("a state needs at least one qubit".into()));
    }
    Ok(())
}

/// Applies a `2^k × 2^k` row-major matrix to `wires` of an `n`-qubit vector.
pub(crate) fn apply_matrix(amps: &mut [C64], n: usize, wires: &[usize], m: &[C64]) {
    let k = wires.len();
    let dim = 1usize << k;
    // offset of each local basis state; wire j is bit (k-1-j) of the local index
    let offsets: Vec<usize> = (0..dim)
        .map(|l| {
            (0..k)
                .filter(|&j| (l >> (k - 1 - j)) & 1 == 1)
                .map(|j| 1usize << (n - 1 - wires[j]))
                .sum()
        })
        .collect();
    let mut positions: Vec<usize> = wires.iter().map(|&w| n - 1 - w).collect();
    positions.sort_unstable();

    let mut local = vec![C64::new(0.0, 0.0); dim];
    for r in 0..(1usize << (n - k)) {
        // spread the bits of r around the wire positions
        let mut base = r;
        for &p in &positions {
            let low = base & ((1usize << p) - 1);
            base = ((base >> p) << (p + 1)) | low;
        }
        for (l, slot) in local.iter_mut().enumerate() {
            *slot = amps[base + offsets[l]];
        }
        for (row, &off) in offsets.iter().enumerate() {
            let mrow = &m[row * dim..(row + 1) * dim];
            amps[base + off] = mrow.iter().zip(&local).map(|(a, b)| a * b).sum();
        }
    }
}

/// Returns `(U ⊗ I)·state` as a new state.
pub fn apply_dense(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Runs `circuit` on `|0…0⟩`.
pub fn simulate_dense(circuit: &Circuit) -> Result<StateVector> {
    let mut s = StateVector::zero(circuit.n_qubits())?;
    for g in circuit.gates() {
        s.apply(g)?;
    }
    Ok(s)
}

pub const UNITARY_QUBIT_LIMIT: usize = 10;

/// Full `2^n × 2^n` matrix of the circuit, gates composed in application order.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DenseTensor> {
    let n = circuit.n_qubits();
    if n > UNITARY_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n,
            limit: UNITARY_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << n;
    let mut u = vec![C64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let mut s = StateVector::basis(n, col)?;
        for g in circuit.gates() {
            s.apply(g)?;
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[row * dim + col] = *a;
        }
    }
    Ok(DenseTensor::from_parts(vec![dim, dim], u))
}
