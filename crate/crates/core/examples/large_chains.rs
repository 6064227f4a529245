//! Solver selection and the state-space cap: small chains are solved
//! directly, larger ones by power iteration, and chains beyond the cap are
//! refused with advice to simulate instead.

use pcsma::chain::{build_chain, build_chain_with, stationary, ChainOptions};
use pcsma::{simulate, ConflictGraph, NetworkConfig, SimConfig, Topology};

fn main() -> pcsma::Result<()> {
    for (kind, n, t) in [(Topology::Path, 6, 3), (Topology::Cycle, 8, 4), (Topology::Star, 7, 5)] {
        let cfg = NetworkConfig::new(ConflictGraph::named(kind, n)?, vec![0.3; n], t)?;
        let chain = build_chain(&cfg)?;
        let pi = stationary(&chain)?;
        println!(
            "{kind} n={n} T={t}: {} states, {} transitions, {:?} solve ({} iterations), residual {:.1e}",
            chain.num_states(),
            chain.transitions().nnz(),
            pi.method,
            pi.iterations,
            pi.residual(&chain)
        );
    }

    let cfg = NetworkConfig::new(ConflictGraph::empty(10)?, vec![0.5; 10], 12)?;
    match build_chain_with(&cfg, ChainOptions { max_states: 100_000 }) {
        Err(e) => println!("\n{e}"),
        Ok(c) => println!("unexpectedly built {} states", c.num_states()),
    }
    let sim = simulate(&SimConfig::new(cfg, 200_000, 1)?);
    println!("simulated node 0: {:.4} ± {:.4}", sim.throughput[0], sim.ci_halfwidth[0]);
    Ok(())
}
