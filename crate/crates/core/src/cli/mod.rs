//! Command line front end.
//!
//! Every command prints a [`RunReport`] as JSON (or CSV with `--format csv`).
//! Exit codes: 0 on success, 2 for bad input (parse errors, missing files,
//! invalid arguments), 1 for numerical failures.

mod bench;
mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use bench::{bench_ptrace, bench_tfim, ptrace_envelope, PtraceBench, TfimBench, ENVELOPE_FACTOR};
pub use report::{median, RepTiming, RunReport, RUN_REPORT_SCHEMA, VERSION};

use crate::autodiff::{
    expval_at, finite_diff_grad, grad_expval, parameter_shift_grad, Engine, Optimizer, DEFAULT_FD_STEP,
};
use crate::circuit::{simulate_dense, Circuit, StateVector};
use crate::density::{partial_trace_pure, purity, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::maxcut::{load_graph, solve_maxcut, MbeConfig};
use crate::network::{optimize_path, NetworkShape, Objective, Strategy};
use crate::rng::{random_state, seeded};
use crate::tt::{simulate_tt, tt_to_dense, Truncation};

#[derive(Debug, Parser)]
#[command(name = "qtensor", version, about = "Tensor-network quantum circuit simulation")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineKind {
    Dense,
    Tt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GradMethod {
    Ad,
    Shift,
    Fd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OptimizerKind {
    Gd,
    Adam,
}

#[derive(Debug, Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = EngineKind::Dense)]
    engine: EngineKind,
    /// Maximum bond dimension for the TT engine.
    #[arg(long)]
    chi: Option<usize>,
    /// Relative singular-value cutoff for the TT engine.
    #[arg(long)]
    eps: Option<f64>,
}

impl EngineArgs {
    fn engine(&self) -> Result<Engine> {
        match self.engine {
            EngineKind::Dense => Ok(Engine::Dense),
            EngineKind::Tt => Ok(Engine::Tt(truncation(self.chi, self.eps)?)),
        }
    }
}

fn truncation(chi: Option<usize>, eps: Option<f64>) -> Result<Truncation> {
    if chi == Some(0) {
        return Err(Error::InvalidArgument("--chi must be at least 1".into()));
    }
    let eps = eps.unwrap_or(Truncation::default().eps);
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("--eps must lie in [0, 1), got {eps}")));
    }
    Ok(Truncation::new(eps, chi))
}

#[derive(Debug, Args)]
struct CircuitArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    ham: PathBuf,
    /// Comma-separated trainable angles; defaults to those in the circuit file.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expectation value of a Hamiltonian after a circuit.
    Expval(CircuitArgs),
    /// Gradient of the expectation value with respect to trainable angles.
    Grad {
        #[command(flatten)]
        args: CircuitArgs,
        #[arg(long, value_enum, default_value_t = GradMethod::Ad)]
        method: GradMethod,
        /// Finite-difference step.
        #[arg(long, default_value_t = DEFAULT_FD_STEP)]
        step: f64,
    },
    /// Runs a circuit and reports the final state.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Reduced density operator of a pure state.
    Ptrace {
        /// Qubits of a seeded random state (ignored with --circuit).
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Trace the output state of this circuit instead.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Comma-separated qubits to keep.
        #[arg(long, value_delimiter = ',', conflicts_with = "keep_size")]
        keep: Option<Vec<usize>>,
        /// Keep qubits 0..k.
        #[arg(long)]
        keep_size: Option<usize>,
        #[arg(long, default_value_t = 1)]
        reps: usize,
    },
    /// MaxCut by multi-basis encoding.
    Maxcut {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
        #[arg(long, value_enum, default_value_t = OptimizerKind::Adam)]
        optimizer: OptimizerKind,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Contraction order for a tensor network file.
    Paths {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value = "greedy")]
        strategy: String,
        #[arg(long, default_value = "flops")]
        objective: String,
    },
    /// Benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// TFIM expectation (and gradient) on a large brickwork ansatz.
    Tfim {
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// Exact number of gates (default 5000 unless --layers is given).
        #[arg(long)]
        gates: Option<usize>,
        /// Whole brickwork layers instead of a gate count.
        #[arg(long, conflicts_with = "gates")]
        layers: Option<usize>,
        #[arg(long, default_value_t = 16)]
        chi: usize,
        #[arg(long)]
        eps: Option<f64>,
        /// No truncation at all (overrides --chi and --eps).
        #[arg(long)]
        exact: bool,
        /// Also run the reverse sweep.
        #[arg(long)]
        grad: bool,
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
    /// Pure-state partial trace timing and memory.
    Ptrace {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        keep_size: usize,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn amplitudes_json(psi: &StateVector) -> Vec<[f64; 2]> {
    psi.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

/// Largest register whose amplitudes or density matrix are printed.
const PRINT_QUBITS: usize = 6;

fn load_inputs(args: &CircuitArgs, report: &mut RunReport) -> Result<(Circuit, PauliHamiltonian, Vec<f64>, Engine)> {
    let circuit = Circuit::from_json(&read(&args.circuit)?)?;
    let ham = PauliHamiltonian::from_json(&read(&args.ham)?)?;
    let theta = args.theta.clone().unwrap_or_else(|| circuit.parameters());
    let engine = args.engine.engine()?;
    report
        .input("circuit", args.circuit.display().to_string())
        .input("ham", args.ham.display().to_string())
        .input("engine", engine_json(&engine))
        .input("theta", &theta);
    Ok((circuit, ham, theta, engine))
}

fn engine_json(engine: &Engine) -> serde_json::Value {
    match engine {
        Engine::Dense => json!({"kind": "dense"}),
        Engine::Tt(t) => json!({"kind": "tt", "eps": t.eps, "chi_max": t.chi_max}),
    }
}

fn execute(cli: &Cli) -> Result<RunReport> {
    let seed = cli.seed;
    match &cli.command {
        Command::Expval(args) => {
            let mut r = RunReport::new("expval", seed);
            let (c, h, theta, engine) = load_inputs(args, &mut r)?;
            let t = Instant::now();
            let value = expval_at(&c, &h, &theta, &engine)?;
            r.timings("expval", &[ms_since(t)]);
            r.output("value", value);
            Ok(r)
        }
        Command::Grad { args, method, step } => {
            let mut r = RunReport::new("grad", seed);
            let (c, h, theta, engine) = load_inputs(args, &mut r)?;
            let t = Instant::now();
            let (value, grad, name) = match method {
                GradMethod::Ad => {
                    let (v, g) = grad_expval(&c, &h, &theta, &engine)?;
                    (v, g, "ad")
                }
                GradMethod::Shift => (
                    expval_at(&c, &h, &theta, &engine)?,
                    parameter_shift_grad(&c, &h, &theta, &engine)?,
                    "shift",
                ),
                GradMethod::Fd => (
                    expval_at(&c, &h, &theta, &engine)?,
                    finite_diff_grad(&c, &h, &theta, *step, &engine)?,
                    "fd",
                ),
            };
            r.timings("grad", &[ms_since(t)]);
            r.input("method", name);
            if *method == GradMethod::Fd {
                r.input("step", step);
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            r.output("value", value).output("grad", &grad).output("grad_norm", norm);
            Ok(r)
        }
        Command::Simulate { circuit, engine } => {
            let mut r = RunReport::new("simulate", seed);
            let c = Circuit::from_json(&read(circuit)?)?;
            let engine = engine.engine()?;
            r.input("circuit", circuit.display().to_string()).input("engine", engine_json(&engine));
            let t = Instant::now();
            let small = c.n_qubits() <= PRINT_QUBITS;
            match engine {
                Engine::Dense => {
                    let psi = simulate_dense(&c)?;
                    r.timings("simulate", &[ms_since(t)]);
                    r.output("n_qubits", c.n_qubits()).output("norm", psi.norm());
                    if small {
                        r.output("amplitudes", amplitudes_json(&psi));
                    }
                }
                Engine::Tt(trunc) => {
                    let tt = simulate_tt(&c, &trunc)?;
                    r.timings("simulate", &[ms_since(t)]);
                    r.output("n_qubits", c.n_qubits())
                        .output("norm", tt.norm())
                        .output("bond_dims", tt.bond_dims())
                        .output("max_bond", tt.max_bond())
                        .output("discarded_weight", tt.discarded_weight());
                    if small {
                        r.output("amplitudes", amplitudes_json(&tt_to_dense(&tt)?));
                    }
                }
            }
            Ok(r)
        }
        Command::Ptrace {
            n,
            circuit,
            keep,
            keep_size,
            reps,
        } => {
            let mut r = RunReport::new("ptrace", seed);
            let psi = match circuit {
                Some(path) => {
                    r.input("circuit", path.display().to_string());
                    simulate_dense(&Circuit::from_json(&read(path)?)?)?
                }
                None => {
                    if *n > crate::circuit::DENSE_QUBIT_LIMIT {
                        return Err(Error::TooManyQubits {
                            n: *n,
                            limit: crate::circuit::DENSE_QUBIT_LIMIT,
                        });
                    }
                    r.input("n", n);
                    random_state(*n, &mut seeded(seed))
                }
            };
            let keep: Vec<usize> = match (keep, keep_size) {
                (Some(k), _) => k.clone(),
                (None, Some(k)) => (0..*k).collect(),
                (None, None) => return Err(Error::InvalidArgument("give --keep or --keep-size".into())),
            };
            r.input("keep", &keep).input("reps", reps);
            let mut times = Vec::new();
            let mut rho = None;
            for _ in 0..(*reps).max(1) {
                drop(rho.take());
                let t = Instant::now();
                rho = Some(partial_trace_pure(&psi, &keep)?);
                times.push(ms_since(t));
            }
            let rho = rho.expect("at least one repetition");
            r.timings("ptrace", &times);
            r.output("m", rho.m_qubits())
                .output("trace", rho.trace())
                .output("purity", purity(&rho));
            if rho.m_qubits() <= 10 {
                r.output("entropy", von_neumann_entropy(&rho, false)?);
            }
            if rho.m_qubits() <= PRINT_QUBITS {
                let d = rho.dim();
                let rows: Vec<Vec<[f64; 2]>> = (0..d)
                    .map(|i| (0..d).map(|j| [rho.get(i, j).re, rho.get(i, j).im]).collect())
                    .collect();
                r.output("matrix", rows);
            }
            Ok(r)
        }
        Command::Maxcut {
            graph,
            depth,
            restarts,
            alpha,
            max_iters,
            rate,
            optimizer,
            engine,
        } => {
            let mut r = RunReport::new("maxcut", seed);
            let g = load_graph(&read(graph)?)?;
            let cfg = MbeConfig {
                depth: *depth,
                engine: engine.engine()?,
                optimizer: match optimizer {
                    OptimizerKind::Gd => Optimizer::Gd,
                    OptimizerKind::Adam => Optimizer::Adam,
                },
                rate: *rate,
                restarts: *restarts,
                max_iters: *max_iters,
                seed,
                alpha: *alpha,
                ..MbeConfig::default()
            };
            r.input("graph", graph.display().to_string())
                .input("vertices", g.num_vertices())
                .input("edges", g.edges().len())
                .input("depth", depth)
                .input("restarts", restarts)
                .input("alpha", alpha)
                .input("max_iters", max_iters)
                .input("rate", rate)
                .input("optimizer", format!("{optimizer:?}").to_lowercase())
                .input("engine", engine_json(&cfg.engine));
            let t = Instant::now();
            let res = solve_maxcut(&g, &cfg)?;
            r.timings("solve", &[ms_since(t)]);
            r.output("cut", res.cut_value)
                .output("optimal", res.optimal)
                .output("assignment", &res.assignment)
                .output("loss", res.relaxed_loss)
                .output("iters", res.iterations)
                .output("restart_index", res.restart_index);
            Ok(r)
        }
        Command::Paths {
            network,
            strategy,
            objective,
        } => {
            let mut r = RunReport::new("paths", seed);
            let shape = NetworkShape::from_json(&read(network)?)?;
            let strategy: Strategy = strategy.parse()?;
            let objective: Objective = objective.parse()?;
            r.input("network", network.display().to_string())
                .input("strategy", strategy)
                .input("objective", objective)
                .input("tensors", shape.tensors.len());
            let t = Instant::now();
            let path = optimize_path(&shape, strategy, objective)?;
            r.timings("search", &[ms_since(t)]);
            r.output("steps", &path.steps)
                .output("est_flops", path.est_flops)
                .output("est_peak_memory", path.est_peak_memory);
            Ok(r)
        }
        Command::Bench(BenchCommand::Tfim {
            n,
            gates,
            layers,
            chi,
            eps,
            exact,
            grad,
            j,
            h,
        }) => {
            let trunc = if *exact {
                Truncation::exact()
            } else {
                truncation(Some(*chi), *eps)?
            };
            let gates = match (gates, layers) {
                (None, None) => Some(5000),
                (g, _) => *g,
            };
            bench_tfim(&TfimBench {
                n: *n,
                gates,
                layers: *layers,
                trunc,
                grad: *grad,
                j: *j,
                h: *h,
                seed,
            })
        }
        Command::Bench(BenchCommand::Ptrace { n, keep_size, reps }) => bench_ptrace(&PtraceBench {
            n: *n,
            keep: None,
            keep_size: *keep_size,
            reps: *reps,
            seed,
        }),
    }
}

/// Parses `argv` (including the program name) and runs one command.
pub fn run(argv: &[String]) -> Result<RunReport> {
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    run_parsed(&cli)
}

fn run_parsed(cli: &Cli) -> Result<RunReport> {
    let mut report = match cli.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| execute(cli)),
        None => execute(cli),
    }?;
    if report.peak_bytes.is_none() && crate::alloc::is_active() {
        report.peak_bytes = Some(crate::alloc::peak_bytes() as u64);
    }
    Ok(report)
}

/// Runs the command line and returns the process exit code.
pub fn run_cli_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayVersion | ErrorKind::DisplayHelp => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    match run_parsed(&cli) {
        Ok(report) => {
            let text = match cli.format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
            };
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

/// [`run_cli_with`] on the process streams.
pub fn run_cli(argv: &[String]) -> i32 {
    run_cli_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
