//! Tensor-train (matrix product) pure states.
//!
//! Core `k` has shape `[χ_k, 2, χ_{k+1}]` with `χ_0 = χ_n = 1`. Qubit 0 is the
//! leftmost core, matching the dense amplitude ordering.

use crate::circuit::{validate_unitary, Circuit, Gate, StateVector, DENSE_QUBIT_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{dagger, dagger_matmul, isometry_error, qr, svd};
use crate::tensor::{matmul, DenseTensor};
use crate::C64;

/// SVD truncation rule: keep `σ_i / σ_max > eps`, at most `chi_max` values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub eps: f64,
    pub chi_max: Option<usize>,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            eps: 1e-12,
            chi_max: None,
        }
    }
}

impl Truncation {
    pub fn new(eps: f64, chi_max: Option<usize>) -> Self {
        Self { eps, chi_max }
    }

    /// Keeps every nonzero singular value.
    pub fn exact() -> Self {
        Self::new(0.0, None)
    }

    /// Number of leading singular values to keep (at least one).
    pub fn keep(&self, s: &[f64]) -> usize {
        let smax = s.first().copied().unwrap_or(0.0);
        if smax <= 0.0 {
            return 1.min(s.len());
        }
        let mut k = s.iter().take_while(|&&v| v / smax > self.eps).count();
        if let Some(cap) = self.chi_max {
            k = k.min(cap);
        }
        k.max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TTState {
    n_qubits: usize,
    cores: Vec<DenseTensor>,
    ortho_center: Option<usize>,
    discarded: f64,
}

impl TTState {
    /// `|0…0⟩` with every bond of dimension 1. Works for any `n`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("a state needs at least one qubit".into()));
        }
        let core = DenseTensor::from_parts(vec![1, 2, 1], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        Ok(Self {
            n_qubits,
            cores: vec![core; n_qubits],
            ortho_center: Some(0),
            discarded: 0.0,
        })
    }

    /// Builds a state from explicit cores; no gauge is assumed.
    pub fn from_cores(cores: Vec<DenseTensor>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::InvalidArgument("a state needs at least one core".into()));
        }
        let mut left = 1;
        for (k, c) in cores.iter().enumerate() {
            let s = c.shape();
            if s.len() != 3 || s[1] != 2 || s[0] != left {
                return Err(Error::SizeMismatch(format!("core {k} has shape {s:?}, left bond {left}")));
            }
            left = s[2];
        }
        if left != 1 {
            return Err(Error::SizeMismatch("right boundary bond must be 1".into()));
        }
        Ok(Self {
            n_qubits: cores.len(),
            cores,
            ortho_center: None,
            discarded: 0.0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    /// `[χ_0 = 1, χ_1, …, χ_n = 1]`.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.cores.iter().map(|c| c.shape()[0]).collect();
        dims.push(1);
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn ortho_center(&self) -> Option<usize> {
        self.ortho_center
    }

    /// Accumulated discarded weight of every truncation applied so far,
    /// combined as `1 − Π(1 − w_i)`.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded
    }

    pub fn norm(&self) -> f64 {
        match self.ortho_center {
            Some(c) => crate::tensor::frobenius_norm(&self.cores[c]),
            None => tt_inner(self, self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0),
        }
    }

    /// Copy in mixed canonical form around `center`.
    pub fn canonicalize(&self, center: usize) -> Result<Self> {
        if center >= self.n_qubits {
            return Err(Error::WireOutOfRange {
                wire: center,
                n: self.n_qubits,
            });
        }
        let mut out = self.clone();
        out.move_center(center);
        Ok(out)
    }

    /// Checks the isometry conditions implied by `ortho_center`.
    /// Returns false when no center is recorded.
    pub fn is_canonical(&self, tol: f64) -> bool {
        let Some(c) = self.ortho_center else {
            return false;
        };
        self.cores.iter().enumerate().all(|(k, core)| {
            let (l, r) = (core.shape()[0], core.shape()[2]);
            if k < c {
                isometry_error(core.data(), 2 * l, r) <= tol
            } else if k > c {
                isometry_error(&dagger(core.data(), l, 2 * r), 2 * r, l) <= tol
            } else {
                true
            }
        })
    }

    fn record_discard(&mut self, w: f64) {
        self.discarded = 1.0 - (1.0 - self.discarded) * (1.0 - w);
    }

    /// QR on core `k`, pushing R into core `k+1`.
    fn shift_right(&mut self, k: usize) {
        let (l, r) = (self.cores[k].shape()[0], self.cores[k].shape()[2]);
        let (q, rm) = qr(self.cores[k].data(), 2 * l, r);
        let p = (2 * l).min(r);
        self.cores[k] = DenseTensor::from_parts(vec![l, 2, p], q);
        let next = &self.cores[k + 1];
        let r2 = next.shape()[2];
        let merged = matmul(&rm, next.data(), p, r, 2 * r2);
        self.cores[k + 1] = DenseTensor::from_parts(vec![p, 2, r2], merged);
    }

    /// LQ on core `k`, pushing L into core `k-1`.
    fn shift_left(&mut self, k: usize) {
        let (l, r) = (self.cores[k].shape()[0], self.cores[k].shape()[2]);
        let (q, rm) = qr(&dagger(self.cores[k].data(), l, 2 * r), 2 * r, l);
        let p = l.min(2 * r);
        self.cores[k] = DenseTensor::from_parts(vec![p, 2, r], dagger(&q, 2 * r, p));
        let lmat = dagger(&rm, p, l);
        let prev = &self.cores[k - 1];
        let l0 = prev.shape()[0];
        let merged = matmul(prev.data(), &lmat, 2 * l0, l, p);
        self.cores[k - 1] = DenseTensor::from_parts(vec![l0, 2, p], merged);
    }

    fn move_center(&mut self, target: usize) {
        match self.ortho_center {
            Some(mut c) => {
                while c < target {
                    self.shift_right(c);
                    c += 1;
                }
                while c > target {
                    self.shift_left(c);
                    c -= 1;
                }
            }
            None => {
                for k in 0..target {
                    self.shift_right(k);
                }
                for k in (target + 1..self.n_qubits).rev() {
                    self.shift_left(k);
                }
            }
        }
        self.ortho_center = Some(target);
    }

    fn apply_single(&mut self, k: usize, m: &[C64], unitary: bool) {
        let core = &self.cores[k];
        let (l, r) = (core.shape()[0], core.shape()[2]);
        let d = core.data();
        let mut out = vec![C64::new(0.0, 0.0); d.len()];
        for a in 0..l {
            for t in 0..2 {
                for s in 0..2 {
                    let g = m[t * 2 + s];
                    if g.re == 0.0 && g.im == 0.0 {
                        continue;
                    }
                    let src = &d[(a * 2 + s) * r..(a * 2 + s + 1) * r];
                    for (o, v) in out[(a * 2 + t) * r..(a * 2 + t + 1) * r].iter_mut().zip(src) {
                        *o += g * v;
                    }
                }
            }
        }
        self.cores[k] = DenseTensor::from_parts(vec![l, 2, r], out);
        if !unitary && self.ortho_center != Some(k) {
            self.ortho_center = None;
        }
    }

    /// Applies a 4×4 matrix to sites `(k, k+1)`, local index `(s_k, s_{k+1})`.
    fn apply_adjacent(&mut self, k: usize, m: &[C64], trunc: &Truncation) {
        self.move_center(k);
        let (l, r) = (self.cores[k].shape()[0], self.cores[k].shape()[2]);
        let r2 = self.cores[k + 1].shape()[2];
        let theta = matmul(self.cores[k].data(), self.cores[k + 1].data(), 2 * l, r, 2 * r2);
        // theta is [l, s1, s2, r2]
        let mut gated = vec![C64::new(0.0, 0.0); theta.len()];
        for a in 0..l {
            for t in 0..4 {
                let (t1, t2) = (t >> 1, t & 1);
                let dst = ((a * 2 + t1) * 2 + t2) * r2;
                for s in 0..4 {
                    let g = m[t * 4 + s];
                    if g.re == 0.0 && g.im == 0.0 {
                        continue;
                    }
                    let src = ((a * 2 + (s >> 1)) * 2 + (s & 1)) * r2;
                    for j in 0..r2 {
                        gated[dst + j] += g * theta[src + j];
                    }
                }
            }
        }
        let w = self.split_into(k, &gated, l, r2, trunc);
        self.record_discard(w);
    }

    /// SVD-splits a `[l,2,2,r2]` block into cores `k` (left-orthogonal) and
    /// `k+1` (center). Returns the discarded weight.
    fn split_into(&mut self, k: usize, block: &[C64], l: usize, r2: usize, trunc: &Truncation) -> f64 {
        let dec = svd(block, 2 * l, 2 * r2);
        let keep = trunc.keep(&dec.s);
        let total: f64 = dec.s.iter().map(|v| v * v).sum();
        let kept: f64 = dec.s[..keep].iter().map(|v| v * v).sum();
        let w = if total > 0.0 { (total - kept) / total } else { 0.0 };
        let scale = if kept > 0.0 { (total / kept).sqrt() } else { 1.0 };
        let u = dec.u_cols(keep);
        let mut sv = dec.vt_rows(keep);
        for i in 0..keep {
            let f = dec.s[i] * scale;
            for v in &mut sv[i * 2 * r2..(i + 1) * 2 * r2] {
                *v *= f;
            }
        }
        self.cores[k] = DenseTensor::from_parts(vec![l, 2, keep], u);
        self.cores[k + 1] = DenseTensor::from_parts(vec![keep, 2, r2], sv);
        self.ortho_center = Some(k + 1);
        w
    }
}

const SWAP: [f64; 16] = [
    1.0, 0.0, 0.0, 0.0, //
    0.0, 0.0, 1.0, 0.0, //
    0.0, 1.0, 0.0, 0.0, //
    0.0, 0.0, 0.0, 1.0,
];

pub(crate) fn swap_matrix() -> Vec<C64> {
    SWAP.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// Exchanges the roles of the two wires of a 4×4 matrix.
pub(crate) fn reverse_wires(m: &[C64]) -> Vec<C64> {
    let flip = |i: usize| ((i & 1) << 1) | (i >> 1);
    let mut out = vec![C64::new(0.0, 0.0); 16];
    for t in 0..4 {
        for s in 0..4 {
            out[flip(t) * 4 + flip(s)] = m[t * 4 + s];
        }
    }
    out
}

/// Successive-SVD factorization. Without `chi_max` the bonds equal the
/// Schmidt ranks (singular values below `1e-12·σ_max` count as zero).
pub fn tt_from_dense(state: &StateVector, chi_max: Option<usize>) -> Result<TTState> {
    let n = state.n_qubits();
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    let trunc = Truncation::new(Truncation::default().eps, chi_max);
    let mut cores = Vec::with_capacity(n);
    let mut rest = state.amplitudes().to_vec();
    let mut left = 1usize;
    let mut discarded = 0.0;
    for k in 0..n - 1 {
        let rows = 2 * left;
        let cols = rest.len() / rows;
        let dec = svd(&rest, rows, cols);
        let keep = trunc.keep(&dec.s);
        let total: f64 = dec.s.iter().map(|v| v * v).sum();
        let kept: f64 = dec.s[..keep].iter().map(|v| v * v).sum();
        if total > 0.0 {
            discarded = 1.0 - (1.0 - discarded) * (kept / total);
        }
        let scale = if kept > 0.0 { (total / kept).sqrt() } else { 1.0 };
        cores.push(DenseTensor::from_parts(vec![left, 2, keep], dec.u_cols(keep)));
        let mut sv = dec.vt_rows(keep);
        for i in 0..keep {
            let f = dec.s[i] * scale;
            for v in &mut sv[i * cols..(i + 1) * cols] {
                *v *= f;
            }
        }
        rest = sv;
        left = keep;
        let _ = k;
    }
    cores.push(DenseTensor::from_parts(vec![left, 2, 1], rest));
    Ok(TTState {
        n_qubits: n,
        cores,
        ortho_center: Some(n - 1),
        discarded,
    })
}

pub fn tt_to_dense(tt: &TTState) -> Result<StateVector> {
    let n = tt.n_qubits;
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    let mut v = vec![C64::new(1.0, 0.0)];
    let mut rows = 1usize;
    for core in &tt.cores {
        let (l, r) = (core.shape()[0], core.shape()[2]);
        v = matmul(&v, core.data(), rows, l, 2 * r);
        rows *= 2;
    }
    Ok(StateVector::from_vec_unchecked(n, v))
}

/// Applies a one- or two-qubit gate. Non-adjacent pairs are brought together
/// by SWAPs on the second wire and moved back afterwards; every SWAP is
/// truncated with the same rule.
pub fn apply_gate_tt(tt: &TTState, gate: &Gate, trunc: &Truncation) -> Result<TTState> {
    let mut out = tt.clone();
    apply_gate_in_place(&mut out, gate, trunc)?;
    Ok(out)
}

pub(crate) fn apply_gate_in_place(tt: &mut TTState, gate: &Gate, trunc: &Truncation) -> Result<()> {
    let n = tt.n_qubits;
    let wires = gate.wires();
    if wires.len() > 2 || wires.is_empty() {
        return Err(Error::UnsupportedArity(wires.len()));
    }
    for &w in wires {
        if w >= n {
            return Err(Error::WireOutOfRange { wire: w, n });
        }
    }
    let m = gate.matrix().data();
    if wires.len() == 1 {
        let unitary = gate.is_standard() || validate_unitary(gate.matrix(), 1e-12)?;
        tt.apply_single(wires[0], m, unitary);
        return Ok(());
    }
    let (a, b) = (wires[0], wires[1]);
    let swap = swap_matrix();
    if a < b {
        for p in (a + 1..b).rev() {
            tt.apply_adjacent(p, &swap, trunc);
        }
        tt.apply_adjacent(a, m, trunc);
        for p in a + 1..b {
            tt.apply_adjacent(p, &swap, trunc);
        }
    } else {
        for p in b..a - 1 {
            tt.apply_adjacent(p, &swap, trunc);
        }
        tt.apply_adjacent(a - 1, &reverse_wires(m), trunc);
        for p in (b..a - 1).rev() {
            tt.apply_adjacent(p, &swap, trunc);
        }
    }
    Ok(())
}

/// Runs `circuit` on `|0…0⟩` in tensor-train form.
pub fn simulate_tt(circuit: &Circuit, trunc: &Truncation) -> Result<TTState> {
    let mut tt = TTState::zero(circuit.n_qubits())?;
    for g in circuit.gates() {
        apply_gate_in_place(&mut tt, g, trunc)?;
    }
    Ok(tt)
}

/// One step of the left-to-right transfer contraction
/// `E'[ra,rb] = Σ conj(A[la,t,ra]) op[t,s] B[lb,s,rb] E[la,lb]`.
pub(crate) fn transfer_left(env: &[C64], a: &DenseTensor, b: &DenseTensor, op: Option<&[C64]>) -> Vec<C64> {
    let (la, ra) = (a.shape()[0], a.shape()[2]);
    let (lb, rb) = (b.shape()[0], b.shape()[2]);
    let mut t = matmul(env, b.data(), la, lb, 2 * rb);
    if let Some(op) = op {
        t = apply_physical(&t, la, rb, op);
    }
    dagger_matmul(a.data(), &t, 2 * la, ra, rb)
}

/// Right-to-left counterpart:
/// `F'[la,lb] = Σ conj(A[la,t,ra]) op[t,s] B[lb,s,rb] F[ra,rb]`.
pub(crate) fn transfer_right(env: &[C64], a: &DenseTensor, b: &DenseTensor, op: Option<&[C64]>) -> Vec<C64> {
    let (la, ra) = (a.shape()[0], a.shape()[2]);
    let (lb, rb) = (b.shape()[0], b.shape()[2]);
    // G[lb,s,ra] = Σ_rb B[lb,s,rb] F[ra,rb]
    let ft = transpose(env, ra, rb);
    let mut g = matmul(b.data(), &ft, 2 * lb, rb, ra);
    if let Some(op) = op {
        g = apply_physical(&g, lb, ra, op);
    }
    // F'ᵀ[lb,la] = G[lb,(t,ra)] · A†[(t,ra),la]
    let fpt = matmul(&g, &dagger(a.data(), la, 2 * ra), lb, 2 * ra, la);
    transpose(&fpt, lb, la)
}

pub(crate) fn transpose(m: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            out.push(m[i * cols + j]);
        }
    }
    out
}

/// `out[x,t,y] = Σ_s op[t,s] v[x,s,y]`.
pub(crate) fn apply_physical(v: &[C64], x: usize, y: usize, op: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for i in 0..x {
        for t in 0..2 {
            for s in 0..2 {
                let g = op[t * 2 + s];
                if g.re == 0.0 && g.im == 0.0 {
                    continue;
                }
                for j in 0..y {
                    out[(i * 2 + t) * y + j] += g * v[(i * 2 + s) * y + j];
                }
            }
        }
    }
    out
}

/// `⟨a|b⟩` by transfer matrices, `O(n·χ³)`.
pub fn tt_inner(a: &TTState, b: &TTState) -> Result<C64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::SizeMismatch(format!(
            "{} vs {} qubits",
            a.n_qubits, b.n_qubits
        )));
    }
    let mut env = vec![C64::new(1.0, 0.0)];
    for (ca, cb) in a.cores.iter().zip(&b.cores) {
        env = transfer_left(&env, ca, cb, None);
    }
    Ok(env[0])
}

/// Left-canonical sweep followed by a truncating right-to-left SVD sweep.
/// The result has unit norm; its discarded weight includes this call.
pub fn compress(tt: &TTState, eps: f64, chi_max: usize) -> TTState {
    let trunc = Truncation::new(eps, Some(chi_max.max(1)));
    let mut out = tt.clone();
    let n = out.n_qubits;
    out.move_center(n - 1);
    for k in (1..n).rev() {
        let (l, r) = (out.cores[k].shape()[0], out.cores[k].shape()[2]);
        let dec = svd(out.cores[k].data(), l, 2 * r);
        let keep = trunc.keep(&dec.s);
        let total: f64 = dec.s.iter().map(|v| v * v).sum();
        let kept: f64 = dec.s[..keep].iter().map(|v| v * v).sum();
        if total > 0.0 {
            out.record_discard((total - kept) / total);
        }
        out.cores[k] = DenseTensor::from_parts(vec![keep, 2, r], dec.vt_rows(keep));
        let mut us = dec.u_cols(keep);
        for i in 0..l {
            for j in 0..keep {
                us[i * keep + j] *= dec.s[j];
            }
        }
        let prev = &out.cores[k - 1];
        let l0 = prev.shape()[0];
        let merged = matmul(prev.data(), &us, 2 * l0, l, keep);
        out.cores[k - 1] = DenseTensor::from_parts(vec![l0, 2, keep], merged);
    }
    out.ortho_center = Some(0);
    let norm = crate::tensor::frobenius_norm(&out.cores[0]);
    if norm > 0.0 {
        out.cores[0] = out.cores[0].scale(C64::new(1.0 / norm, 0.0));
    }
    out
}
