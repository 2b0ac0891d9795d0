//! Benchmarks: pure-state partial traces and a large TFIM ansatz.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde_json::json;

use super::report::RunReport;
use crate::alloc;
use crate::autodiff::{Engine, Recording};
use crate::circuit::{Brickwork, Circuit};
use crate::density::{partial_trace_pure, purity, KEEP_LIMIT};
use crate::error::{Error, Result};
use crate::hamiltonian::{expval, tfim, Boundary};
use crate::rng::{random_state, seeded};
use crate::tt::{simulate_tt, TTState, Truncation};

/// Extra allocation allowed for a pure-state trace, in complex entries per
/// `2^n + 4^m`.
pub const ENVELOPE_FACTOR: usize = 4;
const ENTRY_BYTES: usize = 16;

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Byte budget for tracing `n` qubits down to `m`.
pub fn ptrace_envelope(n: usize, m: usize) -> usize {
    ENVELOPE_FACTOR * ((1usize << n) + (1usize << (2 * m))) * ENTRY_BYTES
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtraceBench {
    pub n: usize,
    /// Explicit keep set; the first `keep_size` qubits otherwise.
    pub keep: Option<Vec<usize>>,
    pub keep_size: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Times `partial_trace_pure` on a seeded random state. When the tracking
/// allocator is installed, the extra allocation of every repetition must stay
/// inside [`ptrace_envelope`].
pub fn bench_ptrace(cfg: &PtraceBench) -> Result<RunReport> {
    let keep: Vec<usize> = cfg.keep.clone().unwrap_or_else(|| (0..cfg.keep_size).collect());
    if keep.len() > KEEP_LIMIT {
        return Err(Error::KeepTooLarge {
            size: keep.len(),
            limit: KEEP_LIMIT,
        });
    }
    if cfg.n > crate::circuit::DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits {
            n: cfg.n,
            limit: crate::circuit::DENSE_QUBIT_LIMIT,
        });
    }
    let mut report = RunReport::new("bench ptrace", cfg.seed);
    report
        .input("n", cfg.n)
        .input("keep", &keep)
        .input("reps", cfg.reps);

    let t = Instant::now();
    let psi = random_state(cfg.n, &mut seeded(cfg.seed));
    report.timings("prepare", &[ms_since(t)]);

    let tracking = alloc::is_active();
    let limit = ptrace_envelope(cfg.n, keep.len());
    let mut times = Vec::new();
    let mut extra_peak = 0usize;
    let mut largest = 0usize;
    let mut result = None;
    for _ in 0..cfg.reps.max(1) {
        drop(result.take());
        let base = alloc::current_bytes();
        alloc::reset();
        let t = Instant::now();
        let rho = partial_trace_pure(&psi, &keep)?;
        times.push(ms_since(t));
        extra_peak = extra_peak.max(alloc::peak_bytes().saturating_sub(base));
        largest = largest.max(alloc::largest_allocation());
        result = Some(rho);
    }
    let rho = result.expect("at least one repetition");
    if tracking && extra_peak > limit {
        return Err(Error::MemoryEnvelope {
            used: extra_peak,
            limit,
        });
    }
    report.timings("ptrace", &times);
    report
        .output("m", keep.len())
        .output("trace", rho.trace())
        .output("purity", purity(&rho))
        .output("envelope_bytes", limit)
        .output("tracked", tracking);
    if tracking {
        report
            .output("extra_peak_bytes", extra_peak)
            .output("largest_allocation_bytes", largest);
        report.peak_bytes = Some(alloc::peak_bytes() as u64);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfimBench {
    pub n: usize,
    /// Exact gate count; takes precedence over `layers`.
    pub gates: Option<usize>,
    /// Full brickwork layers without a closing rotation layer.
    pub layers: Option<usize>,
    pub trunc: Truncation,
    pub grad: bool,
    pub j: f64,
    pub h: f64,
    pub seed: u64,
}

impl Default for TfimBench {
    fn default() -> Self {
        Self {
            n: 500,
            gates: Some(5000),
            layers: None,
            trunc: Truncation::new(Truncation::default().eps, Some(16)),
            grad: true,
            j: 1.0,
            h: 1.0,
            seed: 42,
        }
    }
}

const ROTATIONS: [&str; 2] = ["ry", "rz"];

fn tfim_circuit(cfg: &TfimBench) -> Result<Circuit> {
    match (cfg.gates, cfg.layers) {
        (Some(g), _) => Brickwork::with_gate_count(cfg.n, g, &ROTATIONS),
        (None, Some(l)) => Brickwork::new(cfg.n, l).rotations(&ROTATIONS).final_rotations(false).build(),
        (None, None) => Brickwork::with_gate_count(cfg.n, 5000, &ROTATIONS),
    }
}

fn bond_histogram(tt: &TTState) -> BTreeMap<String, usize> {
    let mut hist = BTreeMap::new();
    for b in tt.bond_dims() {
        *hist.entry(b.to_string()).or_insert(0) += 1;
    }
    hist
}

/// Expectation (and optionally gradient) of the open-chain TFIM on the
/// tensor-train engine for a brickwork ansatz with seeded random angles.
pub fn bench_tfim(cfg: &TfimBench) -> Result<RunReport> {
    if cfg.n < 2 {
        return Err(Error::InvalidArgument("bench tfim needs at least 2 qubits".into()));
    }
    let mut report = RunReport::new("bench tfim", cfg.seed);
    report
        .input("n", cfg.n)
        .input("gates", cfg.gates)
        .input("layers", cfg.layers)
        .input("eps", cfg.trunc.eps)
        .input("chi_max", cfg.trunc.chi_max)
        .input("grad", cfg.grad)
        .input("j", cfg.j)
        .input("h", cfg.h);

    let t = Instant::now();
    let circuit = tfim_circuit(cfg)?;
    let ham = tfim(cfg.n, cfg.j, cfg.h, Boundary::Open)?;
    let mut rng = seeded(cfg.seed);
    let theta: Vec<f64> = (0..circuit.num_params()).map(|_| rng.random_range(-PI..PI)).collect();
    report.timings("build", &[ms_since(t)]);

    let per_layer = ROTATIONS.len() * cfg.n + cfg.n - 1;
    report.output("gate_count", circuit.gates().len()).output(
        "circuit",
        json!({
            "ansatz": "brickwork",
            "layer": "ry on every qubit, rz on every qubit, cz on pairs (0,1),(2,3),..., cz on pairs (1,2),(3,4),...",
            "gates_per_layer": per_layer,
            "full_layers": circuit.gates().len() / per_layer,
            "trailing_gates": circuit.gates().len() % per_layer,
            "trainable": circuit.num_params(),
            "cz": circuit.gates().iter().filter(|g| g.name() == "cz").count(),
            "angles": "uniform in [-pi, pi) from the run seed",
            "hamiltonian": "open-chain tfim, ZZ terms then X terms",
        }),
    );

    if cfg.grad {
        let t = Instant::now();
        let rec = Recording::record(&circuit, &theta, &Engine::Tt(cfg.trunc))?;
        report.timings("forward", &[ms_since(t)]);
        let t = Instant::now();
        let (value, grad) = rec.expval_and_grad(&ham)?;
        report.timings("expval_backward", &[ms_since(t)]);
        let tt = rec.tt_state().expect("tt recording");
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        report
            .output("value", value)
            .output("max_bond", tt.max_bond())
            .output("bond_histogram", bond_histogram(&tt))
            .output("discarded_weight", rec.discarded_weight())
            .output("tape_nodes", rec.tape().len())
            .output("grad_norm", norm)
            .output("grad_finite", grad.iter().all(|g| g.is_finite()))
            .output("grad", grad);
    } else {
        let t = Instant::now();
        let tt = simulate_tt(&circuit.with_parameters(&theta)?, &cfg.trunc)?;
        report.timings("forward", &[ms_since(t)]);
        let t = Instant::now();
        let value = expval(&tt, &ham)?;
        report.timings("expval", &[ms_since(t)]);
        report
            .output("value", value)
            .output("max_bond", tt.max_bond())
            .output("bond_histogram", bond_histogram(&tt))
            .output("discarded_weight", tt.discarded_weight());
    }
    if alloc::is_active() {
        report.peak_bytes = Some(alloc::peak_bytes() as u64);
    }
    Ok(report)
}
