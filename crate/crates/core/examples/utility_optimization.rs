//! Weighted log-utility maximization on the three-node path by projected
//! gradient ascent with backtracking, using the closed-form gradient.

use pcsma::optimizer::{optimize, GradientMode};
use pcsma::{ConflictGraph, NetworkConfig, OptimizerConfig, Topology};

fn main() -> pcsma::Result<()> {
    let template = NetworkConfig::new(ConflictGraph::named(Topology::Path, 3)?, vec![0.5; 3], 2)?;
    let mut opt = OptimizerConfig::new(vec![0.6, 0.6, 0.3]);
    opt.gradient = GradientMode::AnalyticPath3;

    let trace = optimize(&template, &opt, &[0.5, 0.5, 0.5])?;
    for it in trace.iterations.iter().filter(|it| it.k % 10 == 0) {
        println!("iter {:>4}  J = {:.9}  p = {:.4?}", it.k, it.j, it.p);
    }
    let last = trace.final_iterate();
    println!(
        "stopped after {} iterations ({}): p = {:.6?}, S = {:.6?}, J = {:.9}",
        last.k,
        trace.reason.as_deref().unwrap_or("converged"),
        last.p,
        last.s,
        last.j
    );
    Ok(())
}
