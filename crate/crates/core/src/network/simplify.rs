//! Pre-contraction simplification.
//!
//! Three value-preserving rewrites run to a fixpoint:
//!
//! 1. summed labels of extent 1 are dropped from every tensor;
//! 2. a tensor whose labels all appear on one single neighbor is absorbed into it;
//! 3. a tensor of rank at most 2 is folded into a neighbor whenever the
//!    neighbor does not grow (this fuses runs of single-qubit gate matrices).
//!
//! Each rewrite of kind 2 or 3 removes exactly one tensor, so the tensor count
//! never increases and the loop terminates.

use super::{align, contract_labeled, TensorNetwork};
use crate::error::Result;

pub fn simplify_network(net: &TensorNetwork) -> Result<TensorNetwork> {
    net.shape().validate()?;
    let mut tensors = net.tensors.clone();
    let mut labels = net.labels.clone();
    let output = net.output.clone();

    loop {
        let mut changed = drop_unit_labels(&mut tensors, &mut labels, &output)?;
        if let Some((t, n)) = find_absorption(&tensors, &labels) {
            merge_into(&mut tensors, &mut labels, &output, t, n);
            changed = true;
        } else if let Some((t, n)) = find_small_fold(&tensors, &labels, &output) {
            merge_into(&mut tensors, &mut labels, &output, t, n);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    TensorNetwork::new(tensors, labels, output)
}

fn drop_unit_labels(
    tensors: &mut [crate::tensor::DenseTensor],
    labels: &mut [Vec<String>],
    output: &[String],
) -> Result<bool> {
    let mut changed = false;
    for (t, ls) in tensors.iter_mut().zip(labels.iter_mut()) {
        let keep: Vec<usize> = (0..ls.len())
            .filter(|&k| t.shape()[k] != 1 || output.contains(&ls[k]))
            .collect();
        if keep.len() != ls.len() {
            let shape = keep.iter().map(|&k| t.shape()[k]).collect();
            t.reshape_in_place(shape)?;
            *ls = keep.iter().map(|&k| ls[k].clone()).collect();
            changed = true;
        }
    }
    Ok(changed)
}

fn neighbors(labels: &[Vec<String>], t: usize) -> Vec<usize> {
    (0..labels.len())
        .filter(|&o| o != t && labels[o].iter().any(|l| labels[t].contains(l)))
        .collect()
}

/// A tensor whose every label sits on exactly one neighbor. Scalars are
/// absorbed into the first other tensor.
fn find_absorption(
    tensors: &[crate::tensor::DenseTensor],
    labels: &[Vec<String>],
) -> Option<(usize, usize)> {
    if tensors.len() < 2 {
        return None;
    }
    for t in 0..tensors.len() {
        if labels[t].is_empty() {
            return Some((t, if t == 0 { 1 } else { 0 }));
        }
        let nb = neighbors(labels, t);
        if nb.len() == 1 && labels[t].iter().all(|l| labels[nb[0]].contains(l)) {
            return Some((t, nb[0]));
        }
    }
    None
}

fn find_small_fold(
    tensors: &[crate::tensor::DenseTensor],
    labels: &[Vec<String>],
    output: &[String],
) -> Option<(usize, usize)> {
    for t in 0..tensors.len() {
        if labels[t].len() > 2 {
            continue;
        }
        for n in neighbors(labels, t) {
            let merged = merged_labels(labels, output, t, n);
            let extent_of = |l: &String| {
                let (src, k) = if let Some(k) = labels[n].iter().position(|x| x == l) {
                    (n, k)
                } else {
                    (t, labels[t].iter().position(|x| x == l).expect("label on t"))
                };
                tensors[src].shape()[k]
            };
            let size: usize = merged.iter().map(extent_of).product();
            if size <= tensors[n].len() {
                return Some((t, n));
            }
        }
    }
    None
}

/// Labels that survive contracting `t` into `n`: those needed by a third
/// tensor or by the output, in `n`'s order followed by new ones from `t`.
fn merged_labels(labels: &[Vec<String>], output: &[String], t: usize, n: usize) -> Vec<String> {
    let needed = |l: &String| {
        output.contains(l)
            || labels
                .iter()
                .enumerate()
                .any(|(o, ls)| o != t && o != n && ls.contains(l))
    };
    let mut out: Vec<String> = labels[n]
        .iter()
        .filter(|l| needed(l) || !labels[t].contains(l))
        .cloned()
        .collect();
    out.extend(
        labels[t]
            .iter()
            .filter(|l| !labels[n].contains(l) && needed(l))
            .cloned(),
    );
    out
}

fn merge_into(
    tensors: &mut Vec<crate::tensor::DenseTensor>,
    labels: &mut Vec<Vec<String>>,
    output: &[String],
    t: usize,
    n: usize,
) {
    let target = merged_labels(labels, output, t, n);
    let needed = |l: &str| target.iter().any(|x| x == l);
    let (c, lc) = contract_labeled(&tensors[n], &labels[n], &tensors[t], &labels[t], &needed);
    let c = align(&c, &lc, &target);
    tensors[n] = c;
    labels[n] = target;
    tensors.remove(t);
    labels.remove(t);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{execute_path, optimize_path, Objective, Strategy};
    use crate::tensor::DenseTensor;
    use crate::C64;

    fn rnd(shape: Vec<usize>, seed: f64) -> DenseTensor {
        let n: usize = shape.iter().product();
        DenseTensor::new(
            shape,
            (0..n)
                .map(|k| C64::new((k as f64 * 1.3 + seed).sin(), (k as f64 * 0.7 - seed).cos()))
                .collect(),
        )
        .unwrap()
    }

    fn evaluate(net: &TensorNetwork) -> DenseTensor {
        let p = optimize_path(&net.shape(), Strategy::Greedy, Objective::Flops).unwrap();
        execute_path(net, &p).unwrap()
    }

    #[test]
    fn fuses_single_wire_gate_chain() {
        let (g1, g2, g3) = (rnd(vec![2, 2], 0.1), rnd(vec![2, 2], 0.2), rnd(vec![2, 2], 0.3));
        let net = TensorNetwork::from_parts(
            vec![g3.clone(), g2.clone(), g1.clone()],
            &[&["d", "c"], &["c", "b"], &["b", "a"]],
            &["d", "a"],
        )
        .unwrap();
        let s = simplify_network(&net).unwrap();
        assert_eq!(s.len(), 1);
        // sequential application of g1, g2, g3 to basis vectors
        let fused = evaluate(&s);
        for col in 0..2 {
            let mut v = DenseTensor::zeros(vec![2]);
            v.data_mut()[col] = C64::new(1.0, 0.0);
            for g in [&g1, &g2, &g3] {
                v = crate::tensor::contract_pair(g, &[1], &v, &[0]).unwrap();
            }
            for row in 0..2 {
                assert!((fused.get(&[row, col]) - v.get(&[row])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_rank3_tensors_are_a_fixpoint() {
        let net = TensorNetwork::from_parts(
            vec![rnd(vec![2, 2, 3], 0.0), rnd(vec![3, 2, 2], 1.0)],
            &[&["i", "j", "k"], &["k", "l", "m"]],
            &["i", "j", "l", "m"],
        )
        .unwrap();
        let s = simplify_network(&net).unwrap();
        assert_eq!(s.tensors(), net.tensors());
        assert_eq!(s.labels(), net.labels());
    }

    #[test]
    fn removes_unit_bond() {
        let a = rnd(vec![2, 3, 1], 0.5);
        let b = rnd(vec![1, 3, 4], 1.5);
        let net = TensorNetwork::from_parts(
            vec![a, b],
            &[&["i", "j", "u"], &["u", "k", "l"]],
            &["i", "j", "k", "l"],
        )
        .unwrap();
        let s = simplify_network(&net).unwrap();
        assert!(s.labels().iter().all(|ls| !ls.contains(&"u".to_string())));
        assert!(evaluate(&s).rel_distance(&evaluate(&net)) < 1e-12);
    }

    #[test]
    fn absorbs_tensor_covered_by_neighbor() {
        let big = rnd(vec![2, 3, 4], 0.0);
        let small = rnd(vec![2, 3, 5], 2.0);
        let cover = rnd(vec![3, 2], 3.0);
        let net = TensorNetwork::from_parts(
            vec![big, cover, small],
            &[&["i", "j", "k"], &["j", "i"], &["i", "j", "x"]],
            &["k", "x"],
        )
        .unwrap();
        let s = simplify_network(&net).unwrap();
        assert!(s.len() < net.len());
        assert!(evaluate(&s).rel_distance(&evaluate(&net)) < 1e-10);
        let again = simplify_network(&s).unwrap();
        assert_eq!(again.labels(), s.labels());
        assert_eq!(again.tensors(), s.tensors());
    }
}
