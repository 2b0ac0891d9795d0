//! Taped forward simulation and the expectation-value seeds.

use rayon::prelude::*;

use super::tape::{GradTape, NodeId};
use super::Engine;
use crate::circuit::{validate_unitary, Circuit, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::{expval, Expectation, PauliHamiltonian, PauliString};
use crate::linalg::{dagger, qr, svd};
use crate::tensor::{matmul, DenseTensor};
use crate::tt::{
    apply_physical, swap_matrix, transfer_left, transfer_right, transpose, TTState, Truncation,
};
use crate::C64;

#[derive(Clone, Debug)]
enum Output {
    Dense(NodeId),
    Tt(Vec<NodeId>),
}

/// A forward pass kept on a tape, ready for any number of backward sweeps.
#[derive(Clone, Debug)]
pub struct Recording {
    tape: GradTape,
    output: Output,
    n_qubits: usize,
    discarded: f64,
}

fn gate_nodes(tape: &mut GradTape, circuit: &Circuit) -> Result<Vec<NodeId>> {
    let mut slot_of = vec![None; circuit.gates().len()];
    for (slot, &g) in circuit.trainable().iter().enumerate() {
        slot_of[g] = Some(slot);
    }
    circuit
        .gates()
        .iter()
        .zip(slot_of)
        .map(|(g, slot)| {
            let k = g.arity();
            let m = g.matrix().reshape(vec![2; 2 * k])?;
            match slot {
                Some(s) => tape.param(s, m, g.derivative()?.reshape(vec![2; 2 * k])?),
                None => Ok(tape.leaf(m)),
            }
        })
        .collect()
}

impl Recording {
    pub fn record(circuit: &Circuit, theta: &[f64], engine: &Engine) -> Result<Self> {
        let circuit = circuit.with_parameters(theta)?;
        match engine {
            Engine::Dense => Self::record_dense(&circuit),
            Engine::Tt(trunc) => Self::record_tt(&circuit, trunc),
        }
    }

    fn record_dense(circuit: &Circuit) -> Result<Self> {
        let n = circuit.n_qubits();
        let state = StateVector::zero(n)?;
        let mut tape = GradTape::new(circuit.num_params());
        let mats = gate_nodes(&mut tape, circuit)?;
        let mut psi = tape.leaf(state.tensor().clone());
        for (g, &m) in circuit.gates().iter().zip(&mats) {
            let wires = g.wires();
            let k = wires.len();
            for &w in wires {
                if w >= n {
                    return Err(Error::WireOutOfRange { wire: w, n });
                }
            }
            let out_axes: Vec<usize> = (k..2 * k).collect();
            let c = tape.contract(m, &out_axes, psi, wires);
            // result axes: gate outputs, then untouched wires in order
            let mut perm = vec![0; n];
            let mut rest = k;
            for (q, p) in perm.iter_mut().enumerate() {
                *p = match wires.iter().position(|&w| w == q) {
                    Some(j) => j,
                    None => {
                        rest += 1;
                        rest - 1
                    }
                };
            }
            psi = tape.permute(c, &perm);
        }
        Ok(Self {
            tape,
            output: Output::Dense(psi),
            n_qubits: n,
            discarded: 0.0,
        })
    }

    fn record_tt(circuit: &Circuit, trunc: &Truncation) -> Result<Self> {
        let n = circuit.n_qubits();
        let mut tape = GradTape::new(circuit.num_params());
        let mats = gate_nodes(&mut tape, circuit)?;
        let zero = TTState::zero(n)?;
        let cores = zero.cores().iter().map(|c| tape.leaf(c.clone())).collect();
        let mut tt = TapedTt {
            tape,
            cores,
            center: zero.ortho_center(),
            trunc: *trunc,
            exact: trunc.eps == 0.0 && trunc.chi_max.is_none(),
            discarded: 0.0,
        };
        let swap = tt.tape.leaf(DenseTensor::from_parts(vec![2; 4], swap_matrix()));
        for (g, &m) in circuit.gates().iter().zip(&mats) {
            let wires = g.wires();
            for &w in wires {
                if w >= n {
                    return Err(Error::WireOutOfRange { wire: w, n });
                }
            }
            match *wires {
                [q] => {
                    let unitary = g.is_standard() || validate_unitary(g.matrix(), 1e-12)?;
                    tt.single(q, m, unitary);
                }
                [a, b] if a < b => {
                    for p in (a + 1..b).rev() {
                        tt.adjacent(p, swap)?;
                    }
                    tt.adjacent(a, m)?;
                    for p in a + 1..b {
                        tt.adjacent(p, swap)?;
                    }
                }
                [a, b] => {
                    for p in b..a - 1 {
                        tt.adjacent(p, swap)?;
                    }
                    let rev = tt.tape.permute(m, &[1, 0, 3, 2]);
                    tt.adjacent(a - 1, rev)?;
                    for p in (b..a - 1).rev() {
                        tt.adjacent(p, swap)?;
                    }
                }
                _ => return Err(Error::UnsupportedArity(wires.len())),
            }
        }
        Ok(Self {
            tape: tt.tape,
            output: Output::Tt(tt.cores),
            n_qubits: n,
            discarded: tt.discarded,
        })
    }

    pub fn tape(&self) -> &GradTape {
        &self.tape
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Discarded weight accumulated by truncating splits (0 for dense).
    pub fn discarded_weight(&self) -> f64 {
        self.discarded
    }

    pub fn dense_state(&self) -> Option<StateVector> {
        match &self.output {
            Output::Dense(id) => Some(StateVector::from_vec_unchecked(
                self.n_qubits,
                self.tape.value(*id).data().to_vec(),
            )),
            Output::Tt(_) => None,
        }
    }

    pub fn tt_state(&self) -> Option<TTState> {
        match &self.output {
            Output::Tt(ids) => TTState::from_cores(ids.iter().map(|&i| self.tape.value(i).clone()).collect()).ok(),
            Output::Dense(_) => None,
        }
    }

    /// `⟨ψ|P|ψ⟩` for each term at the recorded parameters.
    pub fn pauli_values(&self, terms: &[PauliString]) -> Vec<C64> {
        match &self.output {
            Output::Dense(_) => self.dense_state().expect("dense output").pauli_values(terms),
            Output::Tt(_) => self.tt_state().expect("tt output").pauli_values(terms),
        }
    }

    /// `⟨ψ|H|ψ⟩` and its gradient with respect to every trainable angle.
    pub fn expval_and_grad(&self, h: &PauliHamiltonian) -> Result<(f64, Vec<f64>)> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch(format!(
                "circuit has {} qubits, Hamiltonian {}",
                self.n_qubits,
                h.n_qubits()
            )));
        }
        match &self.output {
            Output::Dense(id) => {
                let psi = self.dense_state().expect("dense output");
                let value = expval(&psi, h)?;
                let hpsi = h.apply(psi.amplitudes());
                let seed = DenseTensor::from_parts(
                    vec![2; self.n_qubits],
                    hpsi.into_iter().map(|v| v * 2.0).collect(),
                );
                let grad = self.tape.backward(vec![(*id, seed)])?;
                Ok((value, grad))
            }
            Output::Tt(ids) => {
                let cores: Vec<DenseTensor> = ids.iter().map(|&i| self.tape.value(i).clone()).collect();
                let (value, adj) = tt_expval_adjoints(&cores, h)?;
                let seeds = ids.iter().copied().zip(adj).collect();
                let grad = self.tape.backward(seeds)?;
                Ok((value, grad))
            }
        }
    }
}

struct TapedTt {
    tape: GradTape,
    cores: Vec<NodeId>,
    center: Option<usize>,
    trunc: Truncation,
    exact: bool,
    discarded: f64,
}

impl TapedTt {
    fn shape(&self, k: usize) -> (usize, usize) {
        let s = self.tape.value(self.cores[k]).shape();
        (s[0], s[2])
    }

    fn single(&mut self, k: usize, m: NodeId, unitary: bool) {
        let c = self.tape.contract(m, &[1], self.cores[k], &[1]);
        self.cores[k] = self.tape.permute(c, &[1, 0, 2]);
        if !unitary && self.center != Some(k) {
            self.center = None;
        }
    }

    fn shift_right(&mut self, k: usize) -> Result<()> {
        let (l, r) = self.shape(k);
        let (q, _) = qr(self.tape.value(self.cores[k]).data(), 2 * l, r);
        let p = (2 * l).min(r);
        let qd = self.tape.leaf(DenseTensor::from_parts(vec![p, 2 * l], dagger(&q, 2 * l, p)));
        let m = self.tape.reshape(self.cores[k], vec![2 * l, r])?;
        let rm = self.tape.contract(qd, &[1], m, &[0]);
        self.cores[k + 1] = self.tape.contract(rm, &[1], self.cores[k + 1], &[0]);
        self.cores[k] = self.tape.leaf(DenseTensor::from_parts(vec![l, 2, p], q));
        Ok(())
    }

    fn shift_left(&mut self, k: usize) -> Result<()> {
        let (l, r) = self.shape(k);
        let (qd, _) = qr(&dagger(self.tape.value(self.cores[k]).data(), l, 2 * r), 2 * r, l);
        let p = l.min(2 * r);
        let m = self.tape.reshape(self.cores[k], vec![l, 2 * r])?;
        let qd_id = self.tape.leaf(DenseTensor::from_parts(vec![2 * r, p], qd.clone()));
        let lm = self.tape.contract(m, &[1], qd_id, &[0]);
        self.cores[k - 1] = self.tape.contract(self.cores[k - 1], &[2], lm, &[0]);
        self.cores[k] = self.tape.leaf(DenseTensor::from_parts(vec![p, 2, r], dagger(&qd, 2 * r, p)));
        Ok(())
    }

    fn move_center(&mut self, target: usize) -> Result<()> {
        match self.center {
            Some(mut c) => {
                while c < target {
                    self.shift_right(c)?;
                    c += 1;
                }
                while c > target {
                    self.shift_left(c)?;
                    c -= 1;
                }
            }
            None => {
                for k in 0..target {
                    self.shift_right(k)?;
                }
                for k in (target + 1..self.cores.len()).rev() {
                    self.shift_left(k)?;
                }
            }
        }
        self.center = Some(target);
        Ok(())
    }

    /// Applies a `[2,2,2,2]` gate node to sites `(k, k+1)`.
    fn adjacent(&mut self, k: usize, m: NodeId) -> Result<()> {
        if !self.exact {
            self.move_center(k)?;
        }
        let (l, _) = self.shape(k);
        let (_, r2) = self.shape(k + 1);
        let theta = self.tape.contract(self.cores[k], &[2], self.cores[k + 1], &[0]);
        let gated = self.tape.contract(m, &[2, 3], theta, &[1, 2]);
        let gated = self.tape.permute(gated, &[2, 0, 1, 3]);
        let block = self.tape.reshape(gated, vec![2 * l, 2 * r2])?;
        let (rows, cols) = (2 * l, 2 * r2);
        let dec = svd(self.tape.value(block).data(), rows, cols);
        if self.exact {
            // Full-rank split with the square unitary factor held fixed:
            // A·B reproduces the block for every perturbation.
            if rows <= cols {
                let u = dec.u_cols(rows);
                let ud = self.tape.leaf(DenseTensor::from_parts(vec![rows, rows], dagger(&u, rows, rows)));
                let b = self.tape.contract(ud, &[1], block, &[0]);
                self.cores[k + 1] = self.tape.reshape(b, vec![rows, 2, r2])?;
                self.cores[k] = self.tape.leaf(DenseTensor::from_parts(vec![l, 2, rows], u));
            } else {
                let vt = dec.vt_rows(cols);
                let v = self.tape.leaf(DenseTensor::from_parts(vec![cols, cols], dagger(&vt, cols, cols)));
                let a = self.tape.contract(block, &[1], v, &[0]);
                self.cores[k] = self.tape.reshape(a, vec![l, 2, cols])?;
                self.cores[k + 1] = self.tape.leaf(DenseTensor::from_parts(vec![cols, 2, r2], vt));
            }
            self.center = None;
            return Ok(());
        }
        // Truncating split: the kept left singular vectors and the
        // renormalization factor are treated as constants.
        let keep = self.trunc.keep(&dec.s);
        let total: f64 = dec.s.iter().map(|v| v * v).sum();
        let kept: f64 = dec.s[..keep].iter().map(|v| v * v).sum();
        let w = if total > 0.0 { (total - kept) / total } else { 0.0 };
        self.discarded = 1.0 - (1.0 - self.discarded) * (1.0 - w);
        let scale = if kept > 0.0 { (total / kept).sqrt() } else { 1.0 };
        let u = dec.u_cols(keep);
        let ud = self.tape.leaf(DenseTensor::from_parts(vec![keep, rows], dagger(&u, rows, keep)));
        let b = self.tape.contract(ud, &[1], block, &[0]);
        let b = if scale != 1.0 { self.tape.scale(b, C64::new(scale, 0.0)) } else { b };
        self.cores[k + 1] = self.tape.reshape(b, vec![keep, 2, r2])?;
        self.cores[k] = self.tape.leaf(DenseTensor::from_parts(vec![l, 2, keep], u));
        self.center = Some(k + 1);
        Ok(())
    }
}

/// `G[la,t,ra] = Σ L[la,lb]·op[t,s]·A[lb,s,rb]·R[ra,rb]`, the derivative of
/// `⟨ψ|…|ψ⟩` with respect to `conj(A)`.
fn env_gradient(left: &[C64], core: &DenseTensor, op: Option<&[C64]>, right: &[C64]) -> Vec<C64> {
    let (lb, rb) = (core.shape()[0], core.shape()[2]);
    let la = left.len() / lb;
    let ra = right.len() / rb;
    let mut t = matmul(left, core.data(), la, lb, 2 * rb);
    if let Some(op) = op {
        t = apply_physical(&t, la, rb, op);
    }
    matmul(&t, &transpose(right, ra, rb), 2 * la, rb, ra)
}

fn axpy(acc: &mut [C64], f: f64, x: &[C64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += v * f;
    }
}

/// Value of `⟨ψ|H|ψ⟩` and the adjoint `2·∂/∂conj(A_k)` of every core.
///
/// Terms entirely to the left (right) of a core are folded into one running
/// environment, so the cost is one sweep plus a transfer over each support.
pub(crate) fn tt_expval_adjoints(cores: &[DenseTensor], h: &PauliHamiltonian) -> Result<(f64, Vec<DenseTensor>)> {
    let n = cores.len();
    let one = vec![C64::new(1.0, 0.0)];
    let mut left = Vec::with_capacity(n + 1);
    left.push(one.clone());
    for k in 0..n {
        let next = transfer_left(&left[k], &cores[k], &cores[k], None);
        left.push(next);
    }
    let mut right = vec![Vec::new(); n + 1];
    right[n] = one.clone();
    for k in (0..n).rev() {
        right[k] = transfer_right(&right[k + 1], &cores[k], &cores[k], None);
    }

    struct TermPass {
        value: C64,
        start: usize,
        end: usize,
        left_closed: Vec<C64>,
        right_closed: Vec<C64>,
        inner: Vec<Vec<C64>>,
    }

    let passes: Vec<Option<TermPass>> = h
        .terms()
        .par_iter()
        .map(|t| {
            let (a, b) = t.support()?;
            let ops: Vec<Option<[C64; 4]>> = (a..=b).map(|k| t.ops.get(&k).map(|p| p.matrix())).collect();
            let op = |k: usize| ops[k - a].as_ref().map(|m| &m[..]);
            // lt[j] is the environment left of site a+j with the term's operators
            let mut lt = vec![left[a].clone()];
            for k in a..=b {
                let e = transfer_left(&lt[k - a], &cores[k], &cores[k], op(k));
                lt.push(e);
            }
            let mut rt = vec![Vec::new(); b - a + 2];
            rt[b - a + 1] = right[b + 1].clone();
            for k in (a..=b).rev() {
                rt[k - a] = transfer_right(&rt[k - a + 1], &cores[k], &cores[k], op(k));
            }
            let inner = (a..=b)
                .map(|k| env_gradient(&lt[k - a], &cores[k], op(k), &rt[k - a + 1]))
                .collect();
            let value = lt[b - a + 1].iter().zip(&right[b + 1]).map(|(x, y)| x * y).sum();
            Some(TermPass {
                value,
                start: a,
                end: b,
                left_closed: lt.pop().expect("nonempty"),
                right_closed: rt.swap_remove(0),
                inner,
            })
        })
        .collect();

    let norm2 = left[n][0];
    let mut total = C64::new(0.0, 0.0);
    let mut identity_coeff = 0.0;
    let mut closed_left: Vec<Vec<(f64, &[C64])>> = vec![Vec::new(); n + 1];
    let mut closed_right: Vec<Vec<(f64, &[C64])>> = vec![Vec::new(); n + 1];
    for (t, pass) in h.terms().iter().zip(&passes) {
        match pass {
            None => {
                total += norm2 * t.coeff;
                identity_coeff += t.coeff;
            }
            Some(p) => {
                total += p.value * t.coeff;
                closed_left[p.end + 1].push((t.coeff, &p.left_closed));
                closed_right[p.start].push((t.coeff, &p.right_closed));
            }
        }
    }
    if total.im.abs() > crate::hamiltonian::IMAG_TOLERANCE {
        return Err(Error::NonHermitianResidue(total.im));
    }

    // hl[k]: Σ c_t·(environment left of site k) over terms ending before k
    let mut hl: Vec<Vec<C64>> = Vec::with_capacity(n + 1);
    hl.push(vec![C64::new(identity_coeff, 0.0)]);
    for k in 1..=n {
        let mut e = transfer_left(&hl[k - 1], &cores[k - 1], &cores[k - 1], None);
        for (c, env) in &closed_left[k] {
            axpy(&mut e, *c, env);
        }
        hl.push(e);
    }
    // hr[k]: Σ c_t·(environment right of site k-1) over terms starting at k or later
    let mut hr: Vec<Vec<C64>> = vec![Vec::new(); n + 1];
    hr[n] = vec![C64::new(0.0, 0.0)];
    for k in (0..n).rev() {
        let mut e = transfer_right(&hr[k + 1], &cores[k], &cores[k], None);
        for (c, env) in &closed_right[k] {
            axpy(&mut e, *c, env);
        }
        hr[k] = e;
    }

    let mut adj: Vec<Vec<C64>> = (0..n)
        .map(|k| {
            let mut g = env_gradient(&hl[k], &cores[k], None, &right[k + 1]);
            let g2 = env_gradient(&left[k], &cores[k], None, &hr[k + 1]);
            axpy(&mut g, 1.0, &g2);
            g
        })
        .collect();
    for (t, pass) in h.terms().iter().zip(&passes) {
        if let Some(p) = pass {
            for (j, g) in p.inner.iter().enumerate() {
                axpy(&mut adj[p.start + j], t.coeff, g);
            }
        }
    }
    let adj = adj
        .into_iter()
        .zip(cores)
        .map(|(g, c)| DenseTensor::from_parts(c.shape().to_vec(), g.into_iter().map(|v| v * 2.0).collect()))
        .collect();
    Ok((total.re, adj))
}
