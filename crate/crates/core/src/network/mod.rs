//! Labeled tensor networks: validation, pairwise labeled contraction and path
//! execution.
//!
//! A label shared by two or more tensors and absent from the output is summed.
//! Labels that must survive a pairwise step (because a third tensor or the
//! output still needs them) are carried as batch axes.

mod path;
mod simplify;

pub use path::{optimize_path, path_cost, ContractionPath, Objective, Strategy};
pub use simplify::simplify_network;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{contract_pair_unchecked, matmul, permute_unchecked, DenseTensor};
use crate::C64;

/// Labels and extents of a network, without tensor data. Path search only
/// needs this much.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub tensors: Vec<TensorSlot>,
    pub output: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorSlot {
    pub labels: Vec<String>,
    pub shape: Vec<usize>,
}

impl NetworkShape {
    pub fn from_json(text: &str) -> Result<Self> {
        let shape: NetworkShape = serde_json::from_str(text)?;
        shape.validate()?;
        Ok(shape)
    }

    /// Checks label/extent consistency and returns the extent of every label.
    pub fn validate(&self) -> Result<BTreeMap<String, usize>> {
        let mut extents = BTreeMap::new();
        for (t, slot) in self.tensors.iter().enumerate() {
            if slot.labels.len() != slot.shape.len() {
                return Err(Error::InvalidNetwork(format!(
                    "tensor {t} has {} labels for rank {}",
                    slot.labels.len(),
                    slot.shape.len()
                )));
            }
            for (k, (label, &extent)) in slot.labels.iter().zip(&slot.shape).enumerate() {
                if extent < 1 {
                    return Err(Error::InvalidExtent(slot.shape.clone()));
                }
                if slot.labels[..k].contains(label) {
                    return Err(Error::InvalidNetwork(format!(
                        "label `{label}` repeated on tensor {t}"
                    )));
                }
                match extents.insert(label.clone(), extent) {
                    Some(prev) if prev != extent => {
                        return Err(Error::InvalidNetwork(format!(
                            "label `{label}` has extents {prev} and {extent}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        for (k, label) in self.output.iter().enumerate() {
            if !extents.contains_key(label) {
                return Err(Error::InvalidNetwork(format!(
                    "output label `{label}` appears on no tensor"
                )));
            }
            if self.output[..k].contains(label) {
                return Err(Error::InvalidNetwork(format!("output label `{label}` repeated")));
            }
        }
        if self.tensors.is_empty() {
            return Err(Error::InvalidNetwork("network has no tensors".into()));
        }
        Ok(extents)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct TensorNetwork {
    tensors: Vec<DenseTensor>,
    labels: Vec<Vec<String>>,
    output: Vec<String>,
}

impl TensorNetwork {
    pub fn new(
        tensors: Vec<DenseTensor>,
        labels: Vec<Vec<String>>,
        output: Vec<String>,
    ) -> Result<Self> {
        if tensors.len() != labels.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} tensors but {} label lists",
                tensors.len(),
                labels.len()
            )));
        }
        let net = Self {
            tensors,
            labels,
            output,
        };
        net.shape().validate()?;
        Ok(net)
    }

    /// Convenience constructor taking `&str` labels.
    pub fn from_parts(tensors: Vec<DenseTensor>, labels: &[&[&str]], output: &[&str]) -> Result<Self> {
        Self::new(
            tensors,
            labels
                .iter()
                .map(|ls| ls.iter().map(|s| s.to_string()).collect())
                .collect(),
            output.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn shape(&self) -> NetworkShape {
        NetworkShape {
            tensors: self
                .tensors
                .iter()
                .zip(&self.labels)
                .map(|(t, l)| TensorSlot {
                    labels: l.clone(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
            output: self.output.clone(),
        }
    }

    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn output(&self) -> &[String] {
        &self.output
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }
}

/// Contracts two labeled tensors, keeping exactly the labels in `keep` that
/// either operand carries. Shared labels outside `keep` are summed; shared
/// labels inside `keep` become leading batch axes of the result.
///
/// Returns the result and its labels (batch, then free of `a`, then free of `b`).
pub(crate) fn contract_labeled(
    a: &DenseTensor,
    la: &[String],
    b: &DenseTensor,
    lb: &[String],
    keep: &dyn Fn(&str) -> bool,
) -> (DenseTensor, Vec<String>) {
    let (a, la) = sum_out(a, la, &|l: &str| keep(l) || lb.iter().any(|x| x == l));
    let (b, lb) = sum_out(b, lb, &|l: &str| keep(l) || la.iter().any(|x| x == l));

    let mut batch = Vec::new();
    let mut summed = Vec::new();
    for (i, l) in la.iter().enumerate() {
        if let Some(j) = lb.iter().position(|x| x == l) {
            if keep(l) {
                batch.push((i, j));
            } else {
                summed.push((i, j));
            }
        }
    }
    let a_free: Vec<usize> = (0..la.len())
        .filter(|i| !batch.iter().chain(&summed).any(|p| p.0 == *i))
        .collect();
    let b_free: Vec<usize> = (0..lb.len())
        .filter(|j| !batch.iter().chain(&summed).any(|p| p.1 == *j))
        .collect();

    let labels: Vec<String> = batch
        .iter()
        .map(|p| la[p.0].clone())
        .chain(a_free.iter().map(|&i| la[i].clone()))
        .chain(b_free.iter().map(|&j| lb[j].clone()))
        .collect();

    if batch.is_empty() {
        let a_axes: Vec<usize> = summed.iter().map(|p| p.0).collect();
        let b_axes: Vec<usize> = summed.iter().map(|p| p.1).collect();
        return (contract_pair_unchecked(&a, &a_axes, &b, &b_axes), labels);
    }

    let a_perm: Vec<usize> = batch
        .iter()
        .map(|p| p.0)
        .chain(a_free.iter().copied())
        .chain(summed.iter().map(|p| p.0))
        .collect();
    let b_perm: Vec<usize> = batch
        .iter()
        .map(|p| p.1)
        .chain(summed.iter().map(|p| p.1))
        .chain(b_free.iter().copied())
        .collect();
    let ap = permute_unchecked(&a, &a_perm);
    let bp = permute_unchecked(&b, &b_perm);
    let nb: usize = batch.iter().map(|p| a.shape()[p.0]).product();
    let m: usize = a_free.iter().map(|&i| a.shape()[i]).product();
    let k: usize = summed.iter().map(|p| a.shape()[p.0]).product();
    let n: usize = b_free.iter().map(|&j| b.shape()[j]).product();
    let mut data = Vec::with_capacity(nb * m * n);
    for s in 0..nb {
        data.extend(matmul(
            &ap.data()[s * m * k..(s + 1) * m * k],
            &bp.data()[s * k * n..(s + 1) * k * n],
            m,
            k,
            n,
        ));
    }
    let shape = batch
        .iter()
        .map(|p| a.shape()[p.0])
        .chain(a_free.iter().map(|&i| a.shape()[i]))
        .chain(b_free.iter().map(|&j| b.shape()[j]))
        .collect();
    (DenseTensor::from_parts(shape, data), labels)
}

/// Sums over every label of `t` for which `keep` is false.
pub(crate) fn sum_out(
    t: &DenseTensor,
    labels: &[String],
    keep: &dyn Fn(&str) -> bool,
) -> (DenseTensor, Vec<String>) {
    let drop: Vec<usize> = (0..labels.len()).filter(|&i| !keep(&labels[i])).collect();
    if drop.is_empty() {
        return (t.clone(), labels.to_vec());
    }
    let ones = DenseTensor::from_parts(
        drop.iter().map(|&i| t.shape()[i]).collect(),
        vec![C64::new(1.0, 0.0); drop.iter().map(|&i| t.shape()[i]).product()],
    );
    let axes_b: Vec<usize> = (0..drop.len()).collect();
    let out = contract_pair_unchecked(t, &drop, &ones, &axes_b);
    let kept = (0..labels.len())
        .filter(|i| !drop.contains(i))
        .map(|i| labels[i].clone())
        .collect();
    (out, kept)
}

/// Permutes a labeled tensor so its labels follow `order`.
pub(crate) fn align(t: &DenseTensor, labels: &[String], order: &[String]) -> DenseTensor {
    let perm: Vec<usize> = order
        .iter()
        .map(|l| labels.iter().position(|x| x == l).expect("label present"))
        .collect();
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        t.clone()
    } else {
        permute_unchecked(t, &perm)
    }
}

/// Runs a contraction path. The result's axes follow the network's output labels.
pub fn execute_path(net: &TensorNetwork, path: &ContractionPath) -> Result<DenseTensor> {
    execute_path_traced(net, path).map(|(t, _)| t)
}

/// As [`execute_path`], also returning the largest number of bytes held by live
/// tensors (inputs still waiting, intermediates, and the step's result) at any step.
pub fn execute_path_traced(net: &TensorNetwork, path: &ContractionPath) -> Result<(DenseTensor, f64)> {
    path::check_steps(net.len(), &path.steps)?;

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for ls in &net.labels {
        for l in ls {
            *counts.entry(l.as_str()).or_default() += 1;
        }
    }
    let in_output = |l: &str| net.output.iter().any(|o| o == l);

    let mut live: Vec<(DenseTensor, Vec<String>)> = net
        .tensors
        .iter()
        .zip(&net.labels)
        .map(|(t, ls)| sum_out(t, ls, &|l: &str| in_output(l) || counts[l] > 1))
        .collect();

    let bytes = |items: &[(DenseTensor, Vec<String>)]| -> f64 {
        items.iter().map(|(t, _)| (t.len() * 16) as f64).sum()
    };
    let mut peak = bytes(&live);

    for &(i, j) in &path.steps {
        let (hi, lo) = (i.max(j), i.min(j));
        let (b, lb) = live.remove(hi);
        let (a, la) = live.remove(lo);
        let (a, la, b, lb) = if i < j { (a, la, b, lb) } else { (b, lb, a, la) };
        let needed = |l: &str| in_output(l) || live.iter().any(|(_, ls)| ls.iter().any(|x| x == l));
        let (c, lc) = contract_labeled(&a, &la, &b, &lb, &needed);
        let now = bytes(&live) + ((a.len() + b.len() + c.len()) * 16) as f64;
        peak = peak.max(now);
        live.push((c, lc));
    }
    if live.len() != 1 {
        return Err(Error::PathInvalid(format!(
            "path leaves {} tensors uncontracted",
            live.len()
        )));
    }
    let (t, ls) = live.pop().expect("one tensor");
    let (t, ls) = sum_out(&t, &ls, &in_output);
    Ok((align(&t, &ls, &net.output), peak))
}
