//! Reverse-mode tape over dense tensor operations.
//!
//! Adjoints are conjugate-linear sensitivities of a real scalar `L`:
//! `x̄ = ∂L/∂Re x + i ∂L/∂Im x`. For `C = contract(A, B)` this gives
//! `Ā = C̄·conj(B)` and `B̄ = conj(A)·C̄`, and a gate angle collects
//! `Re Σ conj(Ū) ⊙ dU/dθ`.

use crate::error::{Error, Result};
use crate::tensor::{contract_pair_unchecked, permute_unchecked, DenseTensor};
use crate::C64;

pub type NodeId = usize;

#[derive(Clone, Debug)]
enum Op {
    /// Constant input; never receives an adjoint.
    Leaf,
    /// Gate matrix for trainable slot `slot`.
    Param { slot: usize },
    Contract {
        a: NodeId,
        b: NodeId,
        a_axes: Vec<usize>,
        b_axes: Vec<usize>,
    },
    Permute { a: NodeId, perm: Vec<usize> },
    Reshape { a: NodeId },
    Scale { a: NodeId, factor: C64 },
    Add { a: NodeId, b: NodeId },
}

#[derive(Clone, Debug)]
struct Node {
    value: DenseTensor,
    op: Op,
    needs_grad: bool,
}

/// How a trainable slot's matrix changes with its angle.
#[derive(Clone, Debug)]
pub struct ParamBinding {
    pub node: NodeId,
    pub derivative: DenseTensor,
}

#[derive(Clone, Debug, Default)]
pub struct GradTape {
    nodes: Vec<Node>,
    params: Vec<Option<ParamBinding>>,
}

impl GradTape {
    pub fn new(num_params: usize) -> Self {
        Self {
            nodes: Vec::new(),
            params: vec![None; num_params],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn value(&self, id: NodeId) -> &DenseTensor {
        &self.nodes[id].value
    }

    /// Total number of complex entries held by node values.
    pub fn stored_entries(&self) -> usize {
        self.nodes.iter().map(|n| n.value.len()).sum()
    }

    fn push(&mut self, value: DenseTensor, op: Op, needs_grad: bool) -> NodeId {
        self.nodes.push(Node { value, op, needs_grad });
        self.nodes.len() - 1
    }

    fn grad_of(&self, ids: &[NodeId]) -> bool {
        ids.iter().any(|&i| self.nodes[i].needs_grad)
    }

    pub fn leaf(&mut self, value: DenseTensor) -> NodeId {
        self.push(value, Op::Leaf, false)
    }

    /// Binds `slot` to a gate matrix and its angle derivative.
    pub fn param(&mut self, slot: usize, matrix: DenseTensor, derivative: DenseTensor) -> Result<NodeId> {
        if slot >= self.params.len() {
            return Err(Error::ParamCountMismatch {
                expected: self.params.len(),
                got: slot + 1,
            });
        }
        let id = self.push(matrix, Op::Param { slot }, true);
        self.params[slot] = Some(ParamBinding { node: id, derivative });
        Ok(id)
    }

    pub fn contract(&mut self, a: NodeId, a_axes: &[usize], b: NodeId, b_axes: &[usize]) -> NodeId {
        let value = contract_pair_unchecked(&self.nodes[a].value, a_axes, &self.nodes[b].value, b_axes);
        let needs = self.grad_of(&[a, b]);
        self.push(
            value,
            Op::Contract {
                a,
                b,
                a_axes: a_axes.to_vec(),
                b_axes: b_axes.to_vec(),
            },
            needs,
        )
    }

    pub fn permute(&mut self, a: NodeId, perm: &[usize]) -> NodeId {
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return a;
        }
        let value = permute_unchecked(&self.nodes[a].value, perm);
        let needs = self.nodes[a].needs_grad;
        self.push(value, Op::Permute { a, perm: perm.to_vec() }, needs)
    }

    pub fn reshape(&mut self, a: NodeId, shape: Vec<usize>) -> Result<NodeId> {
        if self.nodes[a].value.shape() == shape.as_slice() {
            return Ok(a);
        }
        let value = self.nodes[a].value.reshape(shape)?;
        let needs = self.nodes[a].needs_grad;
        Ok(self.push(value, Op::Reshape { a }, needs))
    }

    pub fn scale(&mut self, a: NodeId, factor: C64) -> NodeId {
        let value = self.nodes[a].value.scale(factor);
        let needs = self.nodes[a].needs_grad;
        self.push(value, Op::Scale { a, factor }, needs)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let value = self.nodes[a].value.add(&self.nodes[b].value)?;
        let needs = self.grad_of(&[a, b]);
        Ok(self.push(value, Op::Add { a, b }, needs))
    }

    /// Reverse sweep from the given output adjoints. Returns `dL/dθ` per slot.
    /// Node values are left intact, so the sweep can be repeated.
    pub fn backward(&self, seeds: Vec<(NodeId, DenseTensor)>) -> Result<Vec<f64>> {
        let mut adj: Vec<Option<DenseTensor>> = vec![None; self.nodes.len()];
        for (id, g) in seeds {
            if g.shape() != self.nodes[id].value.shape() {
                return Err(Error::ShapeMismatch {
                    shape: self.nodes[id].value.shape().to_vec(),
                    expected: self.nodes[id].value.len(),
                    got: g.len(),
                });
            }
            accumulate(&mut adj[id], g);
        }
        let mut grads = vec![0.0; self.params.len()];
        for id in (0..self.nodes.len()).rev() {
            let Some(g) = adj[id].take() else { continue };
            let node = &self.nodes[id];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Leaf => {}
                Op::Param { slot } => {
                    let d = &self.params[*slot].as_ref().expect("bound slot").derivative;
                    grads[*slot] += g.data().iter().zip(d.data()).map(|(u, du)| (u.conj() * du).re).sum::<f64>();
                }
                Op::Contract { a, b, a_axes, b_axes } => {
                    let (va, vb) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    let free_a: Vec<usize> = (0..va.rank()).filter(|x| !a_axes.contains(x)).collect();
                    let free_b: Vec<usize> = (0..vb.rank()).filter(|x| !b_axes.contains(x)).collect();
                    let na = free_a.len();
                    if self.nodes[*a].needs_grad {
                        // Ā[free_a, ax_a] = Σ_{free_b} C̄[free_a, free_b] conj(B)[.., free_b]
                        let g_axes: Vec<usize> = (na..na + free_b.len()).collect();
                        let r = contract_pair_unchecked(&g, &g_axes, &vb.conj(), &free_b);
                        // remaining B axes come out in ascending order
                        let mut b_rest: Vec<usize> = b_axes.clone();
                        b_rest.sort_unstable();
                        let mut perm = vec![0; va.rank()];
                        for (pos, &ax) in free_a.iter().enumerate() {
                            perm[ax] = pos;
                        }
                        for (j, bax) in b_rest.iter().enumerate() {
                            let pair = b_axes.iter().position(|x| x == bax).expect("paired axis");
                            perm[a_axes[pair]] = na + j;
                        }
                        accumulate(&mut adj[*a], permute_unchecked(&r, &perm));
                    }
                    if self.nodes[*b].needs_grad {
                        // B̄[ax_b, free_b] = Σ_{free_a} conj(A)[free_a, ..] C̄[free_a, free_b]
                        let g_axes: Vec<usize> = (0..na).collect();
                        let r = contract_pair_unchecked(&va.conj(), &free_a, &g, &g_axes);
                        let mut a_rest: Vec<usize> = a_axes.clone();
                        a_rest.sort_unstable();
                        let mut perm = vec![0; vb.rank()];
                        for (j, aax) in a_rest.iter().enumerate() {
                            let pair = a_axes.iter().position(|x| x == aax).expect("paired axis");
                            perm[b_axes[pair]] = j;
                        }
                        for (pos, &ax) in free_b.iter().enumerate() {
                            perm[ax] = a_rest.len() + pos;
                        }
                        accumulate(&mut adj[*b], permute_unchecked(&r, &perm));
                    }
                }
                Op::Permute { a, perm } => {
                    let mut inv = vec![0; perm.len()];
                    for (k, &p) in perm.iter().enumerate() {
                        inv[p] = k;
                    }
                    accumulate(&mut adj[*a], permute_unchecked(&g, &inv));
                }
                Op::Reshape { a } => {
                    let shape = self.nodes[*a].value.shape().to_vec();
                    accumulate(&mut adj[*a], g.reshape(shape)?);
                }
                Op::Scale { a, factor } => {
                    accumulate(&mut adj[*a], g.scale(factor.conj()));
                }
                Op::Add { a, b } => {
                    if self.nodes[*b].needs_grad {
                        accumulate(&mut adj[*b], g.clone());
                    }
                    if self.nodes[*a].needs_grad {
                        accumulate(&mut adj[*a], g);
                    }
                }
            }
        }
        Ok(grads)
    }

    /// Recomputes every node from the recorded operations and inputs.
    pub fn replay(&self) -> Result<Vec<DenseTensor>> {
        let mut vals: Vec<DenseTensor> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match &node.op {
                Op::Leaf | Op::Param { .. } => node.value.clone(),
                Op::Contract { a, b, a_axes, b_axes } => contract_pair_unchecked(&vals[*a], a_axes, &vals[*b], b_axes),
                Op::Permute { a, perm } => permute_unchecked(&vals[*a], perm),
                Op::Reshape { a } => vals[*a].reshape(node.value.shape().to_vec())?,
                Op::Scale { a, factor } => vals[*a].scale(*factor),
                Op::Add { a, b } => vals[*a].add(&vals[*b])?,
            };
            vals.push(v);
        }
        Ok(vals)
    }

    /// Largest entrywise deviation between a replay and the recorded values.
    pub fn replay_deviation(&self) -> Result<f64> {
        Ok(self
            .replay()?
            .iter()
            .zip(&self.nodes)
            .map(|(v, n)| v.max_abs_diff(&n.value))
            .fold(0.0, f64::max))
    }
}

fn accumulate(slot: &mut Option<DenseTensor>, g: DenseTensor) {
    *slot = Some(match slot.take() {
        Some(prev) => prev.add(&g).expect("adjoint shapes agree"),
        None => g,
    });
}
