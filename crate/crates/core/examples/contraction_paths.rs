//! Plan and execute contraction orders for a small tensor network.

use qtensor::network::{execute_path, optimize_path, simplify_network, NetworkShape, Objective, Strategy, TensorNetwork};
use qtensor::rng::seeded;
use qtensor::{DenseTensor, Result, C64};
use rand::Rng;

fn random_tensor(shape: Vec<usize>, rng: &mut impl Rng) -> DenseTensor {
    let len = shape.iter().product();
    let data = (0..len).map(|_| C64::new(rng.random(), rng.random())).collect();
    DenseTensor::new(shape, data).expect("sizes agree")
}

fn main() -> Result<()> {
    let chain = NetworkShape::from_json(include_str!("../data/chain.json"))?;
    for strategy in [Strategy::Greedy, Strategy::Optimal, Strategy::Exhaustive] {
        let path = optimize_path(&chain, strategy, Objective::Flops)?;
        println!("{strategy:?}: steps {:?}, flops {}, peak bytes {}", path.steps, path.est_flops, path.est_peak_memory);
    }

    // a ring of four matrices with a dangling vector, traced down to a scalar
    let mut rng = seeded(7);
    let net = TensorNetwork::from_parts(
        vec![
            random_tensor(vec![2, 3], &mut rng),
            random_tensor(vec![3, 4], &mut rng),
            random_tensor(vec![4, 5], &mut rng),
            random_tensor(vec![5, 2], &mut rng),
            random_tensor(vec![3], &mut rng),
        ],
        &[&["a", "b"], &["b", "c"], &["c", "d"], &["d", "a"], &["b"]],
        &[],
    )?;
    let simplified = simplify_network(&net)?;
    println!("simplified {} tensors to {}", net.len(), simplified.len());
    let greedy = optimize_path(&net.shape(), Strategy::Greedy, Objective::Flops)?;
    let optimal = optimize_path(&net.shape(), Strategy::Optimal, Objective::Flops)?;
    let a = execute_path(&net, &greedy)?;
    let b = execute_path(&net, &optimal)?;
    let c = execute_path(&simplified, &optimize_path(&simplified.shape(), Strategy::Greedy, Objective::Flops)?)?;
    println!("simplified result differs by {:.2e}", a.max_abs_diff(&c));
    println!(
        "greedy {} flops, optimal {} flops, results differ by {:.2e}",
        greedy.est_flops,
        optimal.est_flops,
        a.max_abs_diff(&b)
    );
    Ok(())
}
