//! Pauli-string Hamiltonians and their expectation values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::StateVector;
use crate::error::{Error, Result};
use crate::tt::{transfer_left, transfer_right, TTState};
use crate::C64;

/// Imaginary parts of `⟨H⟩` above this are reported as an error.
pub const IMAG_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Row-major 2×2 matrix; `Y = [[0, −i], [i, 0]]`.
    pub fn matrix(self) -> [C64; 4] {
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        match self {
            Pauli::X => [z, o, o, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [o, z, z, -o],
        }
    }
}

impl FromStr for Pauli {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(Error::InvalidArgument(format!("unknown Pauli operator {other:?}"))),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(c)
    }
}

/// `coeff · ⊗_q ops[q]`, identity on every qubit not listed.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub coeff: f64,
    pub ops: BTreeMap<usize, Pauli>,
}

impl PauliString {
    pub fn new(coeff: f64, ops: &[(usize, Pauli)]) -> Self {
        Self {
            coeff,
            ops: ops.iter().copied().collect(),
        }
    }

    pub fn support(&self) -> Option<(usize, usize)> {
        Some((*self.ops.keys().next()?, *self.ops.keys().next_back()?))
    }

    /// Bit masks over the amplitude index: flipped bits, and bits that
    /// contribute a sign. Also returns the number of Y factors.
    fn masks(&self, n: usize) -> (usize, usize, u32) {
        let (mut flip, mut sign, mut ny) = (0usize, 0usize, 0u32);
        for (&q, &p) in &self.ops {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    ny += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        (flip, sign, ny)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    coeff: f64,
    ops: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct HamiltonianFile {
    n_qubits: usize,
    terms: Vec<TermFile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidArgument(format!("unknown boundary {other:?}"))),
        }
    }
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("a Hamiltonian needs at least one qubit".into()));
        }
        for t in &terms {
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient {}", t.coeff)));
            }
            if let Some(&q) = t.ops.keys().find(|&&q| q >= n_qubits) {
                return Err(Error::QubitOutOfRange { qubit: q, n: n_qubits });
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Concatenates the terms of two Hamiltonians on the same qubits.
    pub fn add(&self, other: &PauliHamiltonian) -> Result<PauliHamiltonian> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch(format!(
                "{} vs {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            n_qubits: self.n_qubits,
            terms,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: HamiltonianFile = serde_json::from_str(text)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let mut ops = BTreeMap::new();
            for (k, v) in t.ops {
                let q: usize = k
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("qubit key {k:?} is not an index")))?;
                ops.insert(q, v.parse()?);
            }
            terms.push(PauliString { coeff: t.coeff, ops });
        }
        Self::new(raw.n_qubits, terms)
    }

    pub fn to_json(&self) -> String {
        let file = HamiltonianFile {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| TermFile {
                    coeff: t.coeff,
                    ops: t.ops.iter().map(|(q, p)| (q.to_string(), p.to_string())).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("hamiltonian serializes")
    }

    /// `H|v⟩` without forming the matrix.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n_qubits;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for t in &self.terms {
            let (flip, sign, ny) = t.masks(n);
            let base = C64::new(t.coeff, 0.0) * C64::new(0.0, 1.0).powu(ny);
            for (i, &a) in v.iter().enumerate() {
                let s = if (i & sign).count_ones() % 2 == 1 { -base } else { base };
                out[i ^ flip] += s * a;
            }
        }
        out
    }

    /// Dense row-major `2^n × 2^n` matrix (n ≤ 10).
    pub fn matrix(&self) -> Result<Vec<C64>> {
        let n = self.n_qubits;
        if n > 10 {
            return Err(Error::TooManyQubits { n, limit: 10 });
        }
        let dim = 1usize << n;
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[col] = C64::new(1.0, 0.0);
            for (row, v) in self.apply(&e).into_iter().enumerate() {
                m[row * dim + col] = v;
            }
        }
        Ok(m)
    }
}

/// `H = −J Σ Z_k Z_{k+1} − h Σ X_k`. ZZ terms come first, in bond order.
pub fn tfim(n: usize, j: f64, h: f64, boundary: Boundary) -> Result<PauliHamiltonian> {
    let mut terms = Vec::with_capacity(2 * n);
    for k in 0..n.saturating_sub(1) {
        terms.push(PauliString::new(-j, &[(k, Pauli::Z), (k + 1, Pauli::Z)]));
    }
    // for n = 2 the wrap-around bond repeats the open one; n = 1 has none
    if boundary == Boundary::Periodic && n >= 2 {
        terms.push(PauliString::new(-j, &[(n - 1, Pauli::Z), (0, Pauli::Z)]));
    }
    for k in 0..n {
        terms.push(PauliString::new(-h, &[(k, Pauli::X)]));
    }
    PauliHamiltonian::new(n, terms)
}

/// States that support `⟨ψ|P|ψ⟩` for Pauli strings.
pub trait Expectation {
    fn qubits(&self) -> usize;

    /// `⟨ψ|P_t|ψ⟩` for every term, without coefficients, in term order.
    fn pauli_values(&self, terms: &[PauliString]) -> Vec<C64>;
}

const CHUNK: usize = 1 << 14;

impl Expectation for StateVector {
    fn qubits(&self) -> usize {
        self.n_qubits()
    }

    fn pauli_values(&self, terms: &[PauliString]) -> Vec<C64> {
        let n = self.n_qubits();
        let amps = self.amplitudes();
        terms
            .iter()
            .map(|t| {
                let (flip, sign, ny) = t.masks(n);
                let phase = C64::new(0.0, 1.0).powu(ny);
                // fixed chunking keeps the summation order independent of thread count
                let partial: Vec<C64> = amps
                    .par_chunks(CHUNK)
                    .enumerate()
                    .map(|(c, chunk)| {
                        let off = c * CHUNK;
                        let mut acc = C64::new(0.0, 0.0);
                        for (k, &a) in chunk.iter().enumerate() {
                            let i = off + k;
                            let v = amps[i ^ flip].conj() * a;
                            if (i & sign).count_ones() % 2 == 1 {
                                acc -= v;
                            } else {
                                acc += v;
                            }
                        }
                        acc
                    })
                    .collect();
                phase * partial.into_iter().sum::<C64>()
            })
            .collect()
    }
}

impl Expectation for TTState {
    fn qubits(&self) -> usize {
        self.n_qubits()
    }

    /// Cached identity environments from both ends, then one short transfer
    /// sweep over each term's support.
    fn pauli_values(&self, terms: &[PauliString]) -> Vec<C64> {
        let cores = self.cores();
        let n = cores.len();
        let mut left = Vec::with_capacity(n + 1);
        left.push(vec![C64::new(1.0, 0.0)]);
        for k in 0..n {
            let next = transfer_left(&left[k], &cores[k], &cores[k], None);
            left.push(next);
        }
        let mut right = vec![Vec::new(); n + 1];
        right[n] = vec![C64::new(1.0, 0.0)];
        for k in (0..n).rev() {
            right[k] = transfer_right(&right[k + 1], &cores[k], &cores[k], None);
        }
        terms
            .par_iter()
            .map(|t| {
                let Some((a, b)) = t.support() else {
                    return left[n][0];
                };
                let mut env = left[a].clone();
                for k in a..=b {
                    let op = t.ops.get(&k).map(|p| p.matrix());
                    env = transfer_left(&env, &cores[k], &cores[k], op.as_ref().map(|m| &m[..]));
                }
                env.iter().zip(&right[b + 1]).map(|(x, y)| x * y).sum()
            })
            .collect()
    }
}

/// `Σ coeff·⟨ψ|P|ψ⟩`, summed in term order.
pub fn expval<S: Expectation + ?Sized>(state: &S, h: &PauliHamiltonian) -> Result<f64> {
    if state.qubits() != h.n_qubits() {
        return Err(Error::SizeMismatch(format!(
            "state has {} qubits, Hamiltonian {}",
            state.qubits(),
            h.n_qubits()
        )));
    }
    let vals = state.pauli_values(h.terms());
    let total: C64 = h
        .terms()
        .iter()
        .zip(vals)
        .map(|(t, v)| v * t.coeff)
        .sum();
    if total.im.abs() > IMAG_TOLERANCE {
        return Err(Error::NonHermitianResidue(total.im));
    }
    Ok(total.re)
}

pub const SPECTRUM_QUBIT_LIMIT: usize = 12;
const DENSE_SPECTRUM_LIMIT: usize = 8;

/// Smallest eigenvalue of `H`. Dense diagonalization up to 8 qubits, Lanczos
/// with full reorthogonalization above.
pub fn exact_spectrum_min(h: &PauliHamiltonian) -> Result<f64> {
    let n = h.n_qubits();
    if n > SPECTRUM_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n,
            limit: SPECTRUM_QUBIT_LIMIT,
        });
    }
    if n <= DENSE_SPECTRUM_LIMIT {
        let m = h.matrix()?;
        return Ok(crate::linalg::hermitian_eigenvalues(&m, 1 << n)[0]);
    }
    Ok(lanczos_min(h))
}

fn lanczos_min(h: &PauliHamiltonian) -> f64 {
    use rand::Rng;
    let dim = 1usize << h.n_qubits();
    let mut rng = crate::rng::seeded(0x5eed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<C64>> = vec![v];
    let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
    let mut last = f64::INFINITY;
    let max_iter = dim.min(300);
    loop {
        let k = basis.len() - 1;
        let mut w = h.apply(&basis[k]);
        let a = dot(&basis[k], &w).re;
        alpha.push(a);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let ritz = crate::linalg::tridiagonal_min(&alpha, &beta);
        let bnorm = norm(&w);
        if basis.len() >= max_iter || bnorm < 1e-12 || (k >= 4 && (last - ritz).abs() < 1e-13) {
            return ritz;
        }
        last = ritz;
        beta.push(bnorm);
        for x in &mut w {
            *x /= bnorm;
        }
        basis.push(w);
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [C64]) {
    let n = norm(a);
    for x in a {
        *x /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{apply_dense, random_circuit, simulate_dense, standard_gate};
    use crate::rng::{random_state, seeded};
    use crate::tt::{simulate_tt, tt_from_dense, Truncation};
    use proptest::prelude::*;

    fn single(p: Pauli, coeff: f64) -> PauliHamiltonian {
        PauliHamiltonian::new(1, vec![PauliString::new(coeff, &[(0, p)])]).unwrap()
    }

    #[test]
    fn tfim_shapes() {
        let h1 = tfim(1, 1.0, 0.7, Boundary::Open).unwrap();
        assert_eq!(h1.terms(), &[PauliString::new(-0.7, &[(0, Pauli::X)])]);
        let h3 = tfim(3, 1.0, 1.0, Boundary::Open).unwrap();
        let zz = h3.terms().iter().filter(|t| t.ops.len() == 2).count();
        assert_eq!((zz, h3.terms().len() - zz), (2, 3));
        for n in 1..12 {
            assert_eq!(tfim(n, 1.0, 1.0, Boundary::Open).unwrap().terms().len(), 2 * n - 1);
            if n >= 2 {
                assert_eq!(tfim(n, 1.0, 1.0, Boundary::Periodic).unwrap().terms().len(), 2 * n);
            }
        }
    }

    #[test]
    fn simple_expectations() {
        let z = single(Pauli::Z, 1.0);
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(expval(&zero, &z).unwrap(), 1.0);
        let plus = apply_dense(&zero, &standard_gate("h", &[0], None).unwrap()).unwrap();
        assert!((expval(&plus, &single(Pauli::X, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        for theta in [0.3, 1.1, 2.0] {
            let s = apply_dense(&zero, &standard_gate("rx", &[0], Some(theta)).unwrap()).unwrap();
            assert!((expval(&s, &z).unwrap() - theta.cos()).abs() < 1e-14);
            let tt = tt_from_dense(&s, None).unwrap();
            assert!((expval(&tt, &z).unwrap() - theta.cos()).abs() < 1e-14);
        }
        // ⟨+i|Y|+i⟩ = 1 with S·H|0⟩ = |+i⟩
        let mut c = crate::circuit::Circuit::new(1).unwrap();
        c.add("h", &[0], None).unwrap();
        c.add("s", &[0], None).unwrap();
        assert!((expval(&simulate_dense(&c).unwrap(), &single(Pauli::Y, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            expval(&StateVector::zero(2).unwrap(), &z),
            Err(Error::SizeMismatch(_))
        ));
    }

    #[test]
    fn spectrum_examples() {
        assert!((exact_spectrum_min(&single(Pauli::Z, 1.0)).unwrap() + 1.0).abs() < 1e-12);
        assert!((exact_spectrum_min(&single(Pauli::X, -1.0)).unwrap() + 1.0).abs() < 1e-12);
        let e = exact_spectrum_min(&tfim(2, 1.0, 1.0, Boundary::Open).unwrap()).unwrap();
        assert!((e + 5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            exact_spectrum_min(&tfim(13, 1.0, 1.0, Boundary::Open).unwrap()),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        // open-chain TFIM ground energies from the free-fermion solution
        for n in [6usize, 8, 10, 12] {
            let want = free_fermion_tfim_ground(n, 1.0, 0.7);
            let h = tfim(n, 1.0, 0.7, Boundary::Open).unwrap();
            let got = if n <= 8 { exact_spectrum_min(&h).unwrap() } else { lanczos_min(&h) };
            assert!((got - want).abs() < 1e-9, "n={n} got {got} want {want}");
            if n <= 8 {
                assert!((lanczos_min(&h) - want).abs() < 1e-9);
            }
        }
    }

    /// `E_0 = −Σ_k ε_k / 2` where `ε_k²` are the eigenvalues of the
    /// `(A−B)(A+B)` matrix of the Jordan–Wigner free-fermion chain.
    fn free_fermion_tfim_ground(n: usize, j: f64, h: f64) -> f64 {
        // single-particle energies are the singular values of the bidiagonal
        // matrix with h on the diagonal and J on the superdiagonal, times 2
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            m[k * n + k] = C64::new(h, 0.0);
            if k + 1 < n {
                m[k * n + k + 1] = C64::new(j, 0.0);
            }
        }
        let s = crate::linalg::svd(&m, n, n).s;
        -s.iter().sum::<f64>()
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let text = r#"{"n_qubits":3,"terms":[{"coeff":-1.0,"ops":{"0":"Z","1":"Z"}},{"coeff":-1.0,"ops":{"0":"X"}}]}"#;
        let h = PauliHamiltonian::from_json(text).unwrap();
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.terms()[0].ops[&1], Pauli::Z);
        assert_eq!(PauliHamiltonian::from_json(&h.to_json()).unwrap(), h);
        assert_eq!(h.to_json(), text);
        let bad = r#"{"n_qubits":1,"terms":[{"coeff":1.0,"ops":{"3":"Z"}}]}"#;
        assert!(matches!(PauliHamiltonian::from_json(bad), Err(Error::QubitOutOfRange { .. })));
        let bad = r#"{"n_qubits":1,"terms":[{"coeff":1.0,"ops":{"0":"Q"}}]}"#;
        assert!(matches!(PauliHamiltonian::from_json(bad), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn apply_matches_matrix_oracle() {
        // dense Kronecker products built independently of the bit-mask path
        let mut rng = seeded(3);
        let n = 3;
        let h = PauliHamiltonian::new(
            n,
            vec![
                PauliString::new(0.4, &[(0, Pauli::Y), (2, Pauli::X)]),
                PauliString::new(-1.3, &[(1, Pauli::Z), (2, Pauli::Y)]),
                PauliString::new(0.25, &[]),
            ],
        )
        .unwrap();
        let eye = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let mut want = vec![C64::new(0.0, 0.0); 64];
        for t in h.terms() {
            let mut k = vec![C64::new(t.coeff, 0.0)];
            let mut dim = 1;
            for q in 0..n {
                let m = t.ops.get(&q).map(|p| p.matrix()).unwrap_or(eye);
                let mut next = vec![C64::new(0.0, 0.0); dim * dim * 4];
                for (i, j) in (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))) {
                    for (a, b) in (0..2).flat_map(|a| (0..2).map(move |b| (a, b))) {
                        next[(i * 2 + a) * dim * 2 + j * 2 + b] = k[i * dim + j] * m[a * 2 + b];
                    }
                }
                k = next;
                dim *= 2;
            }
            for (w, v) in want.iter_mut().zip(k) {
                *w += v;
            }
        }
        let got = h.matrix().unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-14);
        }
        let psi = random_state(n, &mut rng);
        let hv = h.apply(psi.amplitudes());
        let direct = psi.amplitudes().iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<C64>().re;
        assert!((expval(&psi, &h).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn tt_and_dense_agree_on_tfim() {
        let mut rng = seeded(17);
        let psi = random_state(8, &mut rng);
        let tt = tt_from_dense(&psi, None).unwrap();
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let h = tfim(8, 0.9, 1.2, boundary).unwrap();
            assert!((expval(&psi, &h).unwrap() - expval(&tt, &h).unwrap()).abs() < 1e-9);
        }
        // non-canonical TT from a circuit, with Y terms
        let c = random_circuit(7, 60, &mut rng).unwrap();
        let tt = simulate_tt(&c, &Truncation::exact()).unwrap();
        let dense = simulate_dense(&c).unwrap();
        let h = PauliHamiltonian::new(
            7,
            vec![
                PauliString::new(0.3, &[(1, Pauli::Y), (5, Pauli::X)]),
                PauliString::new(-0.8, &[(0, Pauli::Z), (6, Pauli::Y)]),
                PauliString::new(1.1, &[(3, Pauli::Y)]),
            ],
        )
        .unwrap();
        assert!((expval(&dense, &h).unwrap() - expval(&tt, &h).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn large_product_state_tt_expval() {
        let h = tfim(500, 1.0, 1.0, Boundary::Open).unwrap();
        let zero = TTState::zero(500).unwrap();
        assert!((expval(&zero, &h).unwrap() + 499.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linear_and_above_ground(seed in any::<u64>(), n in 1usize..=6, j in -2.0f64..2.0, hx in -2.0f64..2.0) {
            let mut rng = seeded(seed);
            let psi = random_state(n, &mut rng);
            let h1 = tfim(n, j, 0.0, Boundary::Open).unwrap();
            let h2 = tfim(n, 0.0, hx, Boundary::Open).unwrap();
            let sum = h1.add(&h2).unwrap();
            let lhs = expval(&psi, &sum).unwrap();
            prop_assert!((lhs - expval(&psi, &h1).unwrap() - expval(&psi, &h2).unwrap()).abs() < 1e-10);
            prop_assert!(lhs >= exact_spectrum_min(&sum).unwrap() - 1e-9);
            let tt = tt_from_dense(&psi, None).unwrap();
            prop_assert!((expval(&tt, &sum).unwrap() - lhs).abs() < 1e-9);
        }
    }
}
