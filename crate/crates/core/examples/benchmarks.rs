//! The two benchmark workloads at a small size. The full-size runs are
//! `qtensor bench tfim` and `qtensor bench ptrace`.

use qtensor::alloc::TrackingAllocator;
use qtensor::cli::{bench_ptrace, bench_tfim, PtraceBench, TfimBench};
use qtensor::Result;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

fn main() -> Result<()> {
    let tfim = bench_tfim(&TfimBench {
        n: 60,
        gates: Some(600),
        ..TfimBench::default()
    })?;
    println!("{}", tfim.to_csv());
    println!("value {}, max bond {}, wall {:?}", tfim.outputs["value"], tfim.outputs["max_bond"], tfim.wall_ms);

    let ptrace = bench_ptrace(&PtraceBench {
        n: 16,
        keep: None,
        keep_size: 8,
        reps: 3,
        seed: 42,
    })?;
    println!("{}", ptrace.to_json());
    Ok(())
}
