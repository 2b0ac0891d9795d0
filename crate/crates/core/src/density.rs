//! Density operators, partial traces and entropies.
//!
//! After a partial trace the kept qubits appear in ascending order, whatever
//! their original positions, so qubit `keep[0]` becomes the most significant
//! bit of the reduced matrix index.

use crate::circuit::{StateVector, DENSE_QUBIT_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{gram, hermitian_eigenvalues};
use crate::tensor::DenseTensor;
use crate::C64;

/// Largest register for which `|ψ⟩⟨ψ|` is formed explicitly.
pub const DENSITY_QUBIT_LIMIT: usize = 13;
/// Largest kept subsystem for a pure-state partial trace.
pub const KEEP_LIMIT: usize = 14;
/// Validation tolerance for Hermiticity, trace and eigenvalues.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
const PSD_CHECK_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    m_qubits: usize,
    matrix: DenseTensor,
}

impl DensityOperator {
    /// Validates a `2^m × 2^m` matrix: Hermitian and unit trace within
    /// [`DENSITY_TOLERANCE`], and no eigenvalue below `−DENSITY_TOLERANCE`
    /// (eigenvalues are only checked up to 10 qubits).
    pub fn new(matrix: DenseTensor) -> Result<Self> {
        let shape = matrix.shape();
        if shape.len() != 2 || shape[0] != shape[1] || !shape[0].is_power_of_two() {
            return Err(Error::InvalidDensity(format!("shape {shape:?} is not 2^m × 2^m")));
        }
        let rho = Self {
            m_qubits: shape[0].trailing_zeros() as usize,
            matrix,
        };
        let herm = rho.hermiticity_error();
        if herm > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        if rho.m_qubits <= PSD_CHECK_LIMIT {
            let lo = rho.eigenvalues()[0];
            if lo < -DENSITY_TOLERANCE {
                return Err(Error::NotPsd(lo));
            }
        }
        Ok(rho)
    }

    fn from_parts(m_qubits: usize, data: Vec<C64>) -> Self {
        let d = 1usize << m_qubits;
        Self {
            m_qubits,
            matrix: DenseTensor::from_parts(vec![d, d], data),
        }
    }

    pub fn m_qubits(&self) -> usize {
        self.m_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.m_qubits
    }

    pub fn matrix(&self) -> &DenseTensor {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix.data()[i * self.dim() + j]
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.matrix.data(), self.dim())
    }
}

pub fn density_from_state(psi: &StateVector) -> Result<DensityOperator> {
    let n = psi.n_qubits();
    if n > DENSITY_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n,
            limit: DENSITY_QUBIT_LIMIT,
        });
    }
    let a = psi.amplitudes();
    let data = a.iter().flat_map(|x| a.iter().map(move |y| x * y.conj())).collect();
    Ok(DensityOperator::from_parts(n, data))
}

/// Sorted, duplicate-free copy of `keep`, checked against `n` qubits.
fn normalize_keep(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let mut k = keep.to_vec();
    k.sort_unstable();
    for w in k.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument(format!("qubit {} listed twice", w[0])));
        }
    }
    if let Some(&q) = k.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { qubit: q, n });
    }
    Ok(k)
}

/// Full-register index offsets for every assignment of the given qubits,
/// with `qubits[0]` as the most significant bit of the local index.
fn offsets(qubits: &[usize], n: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|a| {
            qubits
                .iter()
                .enumerate()
                .filter(|(j, _)| (a >> (k - 1 - j)) & 1 == 1)
                .map(|(_, &q)| 1usize << (n - 1 - q))
                .sum()
        })
        .collect()
}

fn complement(keep: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|q| !keep.contains(q)).collect()
}

/// Traces out every qubit not in `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let m = rho.m_qubits;
    let keep = normalize_keep(keep, m)?;
    let ko = offsets(&keep, m);
    let to = offsets(&complement(&keep, m), m);
    let d = ko.len();
    let full = rho.dim();
    let src = rho.matrix.data();
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for (a, &ra) in ko.iter().enumerate() {
        for (b, &rb) in ko.iter().enumerate() {
            out[a * d + b] = to.iter().map(|&t| src[(ra | t) * full + (rb | t)]).sum();
        }
    }
    Ok(DensityOperator::from_parts(keep.len(), out))
}

/// Reduced density operator of a pure state without forming `|ψ⟩⟨ψ|`.
///
/// The amplitudes are regrouped into `M[kept, traced]` and the result is
/// `M·M†`, so storage is one copy of `ψ` plus the `4^|keep|` output.
pub fn partial_trace_pure(psi: &StateVector, keep: &[usize]) -> Result<DensityOperator> {
    let n = psi.n_qubits();
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    if keep.len() > KEEP_LIMIT {
        return Err(Error::KeepTooLarge {
            size: keep.len(),
            limit: KEEP_LIMIT,
        });
    }
    let keep = normalize_keep(keep, n)?;
    let ko = offsets(&keep, n);
    let to = offsets(&complement(&keep, n), n);
    let amps = psi.amplitudes();
    let mut m = Vec::with_capacity(amps.len());
    for &a in &ko {
        m.extend(to.iter().map(|&t| amps[a | t]));
    }
    let data = gram(&m, ko.len(), to.len());
    drop(m);
    Ok(DensityOperator::from_parts(keep.len(), data))
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityOperator) -> f64 {
    rho.matrix.data().iter().map(|v| v.norm_sqr()).sum()
}

const EIGEN_CLAMP: f64 = 1e-12;
const PSD_FAILURE: f64 = -1e-8;

/// `−Σ λ ln λ` in nats, or bits when `bits` is set. Eigenvalues below
/// `1e-12` contribute nothing.
pub fn von_neumann_entropy(rho: &DensityOperator, bits: bool) -> Result<f64> {
    let ev = rho.eigenvalues();
    if let Some(&lo) = ev.first() {
        if lo < PSD_FAILURE {
            return Err(Error::NotPsd(lo));
        }
    }
    let s: f64 = ev.iter().filter(|&&l| l >= EIGEN_CLAMP).map(|&l| -l * l.ln()).sum();
    let s = s.max(0.0);
    Ok(if bits { s / std::f64::consts::LN_2 } else { s })
}

/// `S(A) + S(B) − S(A∪B)` in nats, from pure-state marginals.
pub fn mutual_information(psi: &StateVector, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    if a.iter().any(|q| b.contains(q)) {
        return Err(Error::OverlappingSets);
    }
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let s = |set: &[usize]| -> Result<f64> { von_neumann_entropy(&partial_trace_pure(psi, set)?, false) };
    Ok(s(a)? + s(b)? - s(&ab)?)
}
