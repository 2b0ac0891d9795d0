//! MaxCut with two graph vertices per qubit.
//!
//! Pass an edge-list file to solve it, otherwise a few built-in graphs run.

use qtensor::maxcut::{brute_force_maxcut, load_graph, solve_maxcut, Graph, MbeConfig};
use qtensor::rng::seeded;
use qtensor::Result;

fn report(name: &str, graph: &Graph, cfg: &MbeConfig) -> Result<()> {
    let res = solve_maxcut(graph, cfg)?;
    let optimum = brute_force_maxcut(graph)?.0;
    println!(
        "{name}: cut {} of optimum {optimum}, assignment {:?}, loss {:.4}",
        res.cut_value, res.assignment, res.relaxed_loss
    );
    Ok(())
}

fn main() -> Result<()> {
    let cfg = MbeConfig::default();
    if let Some(path) = std::env::args().nth(1) {
        let text = std::fs::read_to_string(&path)?;
        return report(&path, &load_graph(&text)?, &cfg);
    }
    report("triangle", &load_graph(include_str!("../data/triangle.txt"))?, &cfg)?;
    report("C4", &load_graph(include_str!("../data/c4.txt"))?, &cfg)?;
    let random = Graph::random(10, 0.5, &mut seeded(11));
    report("G(10, 0.5)", &random, &cfg)?;
    Ok(())
}
