//! MaxCut through multi-basis encoding: two vertices share one qubit, one
//! read out in the Z basis and one in the X basis.
//!
//! The relaxed loss is `L = Σ w·tanh(α⟨σ_u⟩)·tanh(α⟨σ_v⟩)` over edges, so
//! anti-aligned endpoints (cut edges) lower it. A run minimizes `L` over the
//! angles of a brickwork ansatz and rounds each expectation to its sign.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{minimize, Engine, MinimizeConfig, Optimizer, Recording};
use crate::circuit::{Brickwork, Circuit};
use crate::error::{Error, Result};
use crate::hamiltonian::{Pauli, PauliHamiltonian, PauliString};
use crate::rng::seeded;

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(u, v, w) in &edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) outside {num_vertices} vertices"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) has weight {w}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
        }
        Ok(Self { num_vertices, edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2.abs()).sum()
    }

    /// Each of the `V(V−1)/2` possible edges present with probability `p`,
    /// unit weight.
    pub fn random<R: Rng + ?Sized>(num_vertices: usize, p: f64, rng: &mut R) -> Self {
        let mut edges = Vec::new();
        for u in 0..num_vertices {
            for v in u + 1..num_vertices {
                if rng.random::<f64>() < p {
                    edges.push((u, v, 1.0));
                }
            }
        }
        Self { num_vertices, edges }
    }
}

/// Parses an edge list: one `u v [w]` per line, `#` starts a comment, and an
/// optional `vertices N` line fixes the vertex count (otherwise one more than
/// the largest index).
pub fn load_graph(text: &str) -> Result<Graph> {
    let mut header: Option<usize> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let perr = |msg: String| Error::ParseError { line, msg };
        if fields[0] == "vertices" {
            if fields.len() != 2 || header.is_some() || !edges.is_empty() {
                return Err(perr("`vertices N` must appear once, before any edge".into()));
            }
            header = Some(fields[1].parse().map_err(|_| perr(format!("bad vertex count `{}`", fields[1])))?);
            continue;
        }
        if !(2..=3).contains(&fields.len()) {
            return Err(perr(format!("expected `u v [w]`, got `{body}`")));
        }
        let vertex = |s: &str| s.parse::<usize>().map_err(|_| perr(format!("bad vertex `{s}`")));
        let (u, v) = (vertex(fields[0])?, vertex(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite())
                .ok_or_else(|| perr(format!("bad weight `{s}`")))?,
            None => 1.0,
        };
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        edges.push((u, v, w));
    }
    let needed = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = match header {
        Some(h) if h < needed => {
            return Err(Error::InvalidArgument(format!(
                "header declares {h} vertices but edges reference {needed}"
            )))
        }
        Some(h) => h,
        None => needed,
    };
    Graph::new(n, edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// Qubit count and `(qubit, basis)` for each vertex.
pub fn mbe_encode(graph: &Graph) -> (usize, Vec<(usize, Basis)>) {
    let v = graph.num_vertices();
    let map = (0..v)
        .map(|i| (i / 2, if i % 2 == 0 { Basis::Z } else { Basis::X }))
        .collect();
    (v.div_ceil(2), map)
}

/// `Σ w·t_u·t_v` for relaxed per-vertex values `t`.
pub fn mbe_loss(t: &[f64], graph: &Graph) -> Result<f64> {
    if t.len() != graph.num_vertices() {
        return Err(Error::SizeMismatch(format!(
            "{} values for {} vertices",
            t.len(),
            graph.num_vertices()
        )));
    }
    Ok(graph.edges().iter().map(|&(u, v, w)| w * t[u] * t[v]).sum())
}

/// Sign of each value, with 0 mapped to +1.
pub fn round_cut(expectations: &[f64]) -> Vec<i8> {
    expectations.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect()
}

pub fn cut_value(graph: &Graph, assignment: &[i64]) -> Result<f64> {
    if assignment.len() != graph.num_vertices() {
        return Err(Error::SizeMismatch(format!(
            "{} labels for {} vertices",
            assignment.len(),
            graph.num_vertices()
        )));
    }
    if let Some(&bad) = assignment.iter().find(|&&a| a != 1 && a != -1) {
        return Err(Error::InvalidLabel(bad));
    }
    Ok(graph
        .edges()
        .iter()
        .map(|&(u, v, w)| w * (1 - assignment[u] * assignment[v]) as f64 / 2.0)
        .sum())
}

fn cut_of(graph: &Graph, assignment: &[i8]) -> f64 {
    graph
        .edges()
        .iter()
        .filter(|&&(u, v, _)| assignment[u] != assignment[v])
        .map(|e| e.2)
        .sum()
}

pub const BRUTE_FORCE_LIMIT: usize = 22;

/// Exhaustive search over all cuts with vertex 0 fixed to +1.
pub fn brute_force_maxcut(graph: &Graph) -> Result<(f64, Vec<i8>)> {
    let n = graph.num_vertices();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyVertices(n));
    }
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let (best_mask, best) = (0u32..1 << (n - 1))
        .into_par_iter()
        .map(|mask| {
            let side = |v: usize| v > 0 && (mask >> (v - 1)) & 1 == 1;
            let cut: f64 = graph
                .edges()
                .iter()
                .filter(|&&(u, v, _)| side(u) != side(v))
                .map(|e| e.2)
                .sum();
            (mask, cut)
        })
        .reduce(
            || (0, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    let assignment = (0..n)
        .map(|v| if v > 0 && (best_mask >> (v - 1)) & 1 == 1 { -1 } else { 1 })
        .collect();
    Ok((best, assignment))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MbeConfig {
    /// Brickwork layers before the closing rotation layer.
    pub depth: usize,
    pub engine: Engine,
    pub optimizer: Optimizer,
    pub rate: f64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for MbeConfig {
    fn default() -> Self {
        Self {
            depth: 4,
            engine: Engine::Dense,
            optimizer: Optimizer::Adam,
            rate: 0.05,
            restarts: 5,
            max_iters: 500,
            tol: 1e-6,
            seed: 42,
            alpha: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbeResult {
    #[serde(rename = "cut")]
    pub cut_value: f64,
    pub optimal: Option<f64>,
    pub assignment: Vec<i8>,
    #[serde(rename = "loss")]
    pub relaxed_loss: f64,
    #[serde(rename = "iters")]
    pub iterations: usize,
    pub restart_index: usize,
    pub seed: u64,
}

impl MbeResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result serializes")
    }
}

/// Loss, ansatz and encoding for one graph.
pub struct MbeProblem<'g> {
    graph: &'g Graph,
    circuit: Circuit,
    observables: Vec<PauliString>,
    alpha: f64,
    engine: Engine,
}

impl<'g> MbeProblem<'g> {
    pub fn new(graph: &'g Graph, depth: usize, alpha: f64, engine: Engine) -> Result<Self> {
        let (n, map) = mbe_encode(graph);
        let circuit = Brickwork::new(n.max(1), depth).build()?;
        let observables = map
            .iter()
            .map(|&(q, b)| PauliString::new(1.0, &[(q, if b == Basis::Z { Pauli::Z } else { Pauli::X })]))
            .collect();
        Ok(Self {
            graph,
            circuit,
            observables,
            alpha,
            engine,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    /// Per-vertex `⟨σ_v⟩` at `theta`.
    pub fn expectations(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let rec = Recording::record(&self.circuit, theta, &self.engine)?;
        Ok(rec.pauli_values(&self.observables).iter().map(|v| v.re).collect())
    }

    /// Relaxed loss and its gradient. The chain rule through `tanh` gives
    /// per-vertex weights `g_v = ∂L/∂⟨σ_v⟩`, and the gradient is that of
    /// `⟨Σ g_v σ_v⟩` at fixed `g`.
    pub fn loss_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let rec = Recording::record(&self.circuit, theta, &self.engine)?;
        let e: Vec<f64> = rec.pauli_values(&self.observables).iter().map(|v| v.re).collect();
        let t: Vec<f64> = e.iter().map(|&x| (self.alpha * x).tanh()).collect();
        let loss = mbe_loss(&t, self.graph)?;
        let mut dt = vec![0.0; t.len()];
        for &(u, v, w) in self.graph.edges() {
            dt[u] += w * t[v];
            dt[v] += w * t[u];
        }
        let terms = self
            .observables
            .iter()
            .zip(dt.iter().zip(&t))
            .map(|(p, (&d, &tv))| PauliString {
                coeff: d * self.alpha * (1.0 - tv * tv),
                ops: p.ops.clone(),
            })
            .collect();
        let h = PauliHamiltonian::new(self.circuit.n_qubits(), terms)?;
        let (_, grad) = rec.expval_and_grad(&h)?;
        Ok((loss, grad))
    }
}

/// Optimizes the relaxed loss from `restarts` seeded starts and returns the
/// best rounded cut (lowest restart index on ties).
pub fn solve_maxcut(graph: &Graph, cfg: &MbeConfig) -> Result<MbeResult> {
    let optimal = if graph.num_vertices() <= BRUTE_FORCE_LIMIT {
        Some(brute_force_maxcut(graph)?.0)
    } else {
        None
    };
    if graph.num_vertices() == 0 {
        return Ok(MbeResult {
            cut_value: 0.0,
            optimal,
            assignment: Vec::new(),
            relaxed_loss: 0.0,
            iterations: 0,
            restart_index: 0,
            seed: cfg.seed,
        });
    }
    let problem = MbeProblem::new(graph, cfg.depth, cfg.alpha, cfg.engine)?;
    let mut rng = seeded(cfg.seed);
    let starts: Vec<Vec<f64>> = (0..cfg.restarts.max(1))
        .map(|_| (0..problem.num_params()).map(|_| rng.random_range(-PI..PI)).collect())
        .collect();
    let mcfg = MinimizeConfig {
        max_iters: cfg.max_iters,
        rate: cfg.rate,
        tol: cfg.tol,
        ..MinimizeConfig::default()
    };
    let runs: Vec<MbeResult> = starts
        .par_iter()
        .enumerate()
        .map(|(r, t0)| {
            let tr = minimize(|t| problem.loss_and_grad(t), t0, &cfg.optimizer, &mcfg)?;
            let last = tr.steps.last().expect("at least one step");
            let assignment = round_cut(&problem.expectations(&last.theta)?);
            Ok(MbeResult {
                cut_value: cut_of(graph, &assignment),
                optimal,
                assignment,
                relaxed_loss: last.value,
                iterations: last.iter,
                restart_index: r,
                seed: cfg.seed,
            })
        })
        .collect::<Result<_>>()?;
    let mut best = runs[0].clone();
    for run in runs.into_iter().skip(1) {
        if run.cut_value > best.cut_value {
            best = run;
        }
    }
    Ok(best)
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        load_graph(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::DEFAULT_FD_STEP;

    fn triangle() -> Graph {
        load_graph("0 1\n1 2\n0 2").unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect()).unwrap()
    }

    /// Enumerates every labeling without fixing a vertex.
    fn enumerate_max(g: &Graph) -> f64 {
        let n = g.num_vertices();
        (0..1u32 << n)
            .map(|m| {
                let a: Vec<i64> = (0..n).map(|v| if m >> v & 1 == 1 { -1 } else { 1 }).collect();
                cut_value(g, &a).unwrap()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn parsing() {
        let g = triangle();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.edges().len(), 3);
        let g = load_graph("# weighted\n0 1 2.5\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1, 2.5)]);
        assert!(matches!(load_graph("0 0"), Err(Error::SelfLoop(0))));
        assert!(matches!(load_graph("0 1\n1 0"), Err(Error::DuplicateEdge(1, 0))));
        assert!(matches!(load_graph("0 1\nx 2"), Err(Error::ParseError { line: 2, .. })));
        assert!(matches!(load_graph("0 1 2 3"), Err(Error::ParseError { line: 1, .. })));
        assert!(matches!(load_graph("0 -1"), Err(Error::ParseError { .. })));
        assert_eq!(load_graph("vertices 6\n0 1").unwrap().num_vertices(), 6);
        assert!(load_graph("vertices 1\n0 1").is_err());
        assert_eq!(load_graph("").unwrap().num_vertices(), 0);
    }

    #[test]
    fn encoding() {
        let g = |v: usize| Graph::new(v, vec![]).unwrap();
        assert_eq!(mbe_encode(&g(4)).0, 2);
        let (n, map) = mbe_encode(&g(5));
        assert_eq!(n, 3);
        assert_eq!(map[4], (2, Basis::Z));
        assert_eq!(map[3], (1, Basis::X));
        assert_eq!(mbe_encode(&g(1)).0, 1);
    }

    #[test]
    fn loss_values() {
        let t = triangle();
        assert_eq!(mbe_loss(&[0.0; 3], &t).unwrap(), 0.0);
        assert_eq!(mbe_loss(&[1.0; 3], &t).unwrap(), 3.0);
        let e = load_graph("0 1 2.0").unwrap();
        let big = (50.0f64).tanh();
        assert!((mbe_loss(&[big, -big], &e).unwrap() + 2.0).abs() < 1e-12);
        assert!(mbe_loss(&[1.0], &t).is_err());
    }

    #[test]
    fn rounding_and_cuts() {
        assert_eq!(round_cut(&[0.3, -0.7]), vec![1, -1]);
        assert_eq!(round_cut(&[0.0, 0.0]), vec![1, 1]);
        assert_eq!(round_cut(&[0.6, -1.4, 0.0]), round_cut(&[3.0 * 0.6, 3.0 * -1.4, 0.0]));
        let e = load_graph("0 1").unwrap();
        assert_eq!(cut_value(&e, &[1, -1]).unwrap(), 1.0);
        assert!(matches!(cut_value(&e, &[1, 0]), Err(Error::InvalidLabel(0))));
        assert!(cut_value(&e, &[1]).is_err());
        assert_eq!(cut_value(&triangle(), &[1, 1, -1]).unwrap(), 2.0);
        assert_eq!(cut_value(&cycle(4), &[1, -1, 1, -1]).unwrap(), 4.0);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_maxcut(&triangle()).unwrap().0, 2.0);
        assert_eq!(enumerate_max(&triangle()), 2.0);
        let path = load_graph("0 1\n1 2").unwrap();
        assert_eq!(brute_force_maxcut(&path).unwrap().0, 2.0);
        assert_eq!(brute_force_maxcut(&Graph::new(1, vec![]).unwrap()).unwrap().0, 0.0);
        assert_eq!(enumerate_max(&cycle(4)), 4.0);
        assert!(matches!(
            brute_force_maxcut(&Graph::new(23, vec![]).unwrap()),
            Err(Error::TooManyVertices(23))
        ));
        let mut rng = seeded(5);
        for _ in 0..5 {
            let g = Graph::random(9, 0.5, &mut rng);
            let (best, a) = brute_force_maxcut(&g).unwrap();
            assert_eq!(best, enumerate_max(&g));
            assert_eq!(cut_of(&g, &a), best);
        }
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let g = Graph::random(10, 0.4, &mut seeded(2));
        let p = MbeProblem::new(&g, 2, 1.3, Engine::Dense).unwrap();
        let mut rng = seeded(3);
        let theta: Vec<f64> = (0..p.num_params()).map(|_| rng.random_range(-PI..PI)).collect();
        let (l, grad) = p.loss_and_grad(&theta).unwrap();
        assert!(l.abs() <= g.total_weight());
        for k in 0..theta.len() {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += DEFAULT_FD_STEP;
            tm[k] -= DEFAULT_FD_STEP;
            let fd = (p.loss_and_grad(&tp).unwrap().0 - p.loss_and_grad(&tm).unwrap().0) / (2.0 * DEFAULT_FD_STEP);
            assert!((grad[k] - fd).abs() <= 1e-5 * (grad[k].abs() + 1e-8) || (grad[k] - fd).abs() < 1e-9);
        }
    }

    #[test]
    fn small_instances_reach_the_optimum() {
        let cfg = MbeConfig::default();
        let edge = load_graph("0 1").unwrap();
        assert_eq!(solve_maxcut(&edge, &cfg).unwrap().cut_value, 1.0);
        let r = solve_maxcut(&triangle(), &cfg).unwrap();
        assert_eq!(r.cut_value, 2.0);
        assert_eq!(cut_of(&triangle(), &r.assignment), r.cut_value);
        assert_eq!(solve_maxcut(&cycle(4), &cfg).unwrap().cut_value, 4.0);
        let empty = Graph::new(3, vec![]).unwrap();
        let r = solve_maxcut(&empty, &cfg).unwrap();
        assert_eq!((r.cut_value, r.relaxed_loss), (0.0, 0.0));
    }

    #[test]
    fn results_are_deterministic_and_serialize() {
        let g = Graph::random(6, 0.5, &mut seeded(8));
        let cfg = MbeConfig {
            restarts: 2,
            max_iters: 60,
            ..Default::default()
        };
        let a = solve_maxcut(&g, &cfg).unwrap();
        let b = solve_maxcut(&g, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.cut_value <= a.optimal.unwrap());
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        for key in ["cut", "optimal", "assignment", "loss", "iters", "seed"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
