//! Seeded slot-level simulation with batch-means confidence intervals, plus
//! a short per-slot trace.

use pcsma::simulator::{bit_streams, trace};
use pcsma::{exact_throughput, simulate, ConflictGraph, NetworkConfig, SimConfig};

fn main() -> pcsma::Result<()> {
    let graph = ConflictGraph::erdos_renyi(7, 0.4, 3)?;
    let cfg = NetworkConfig::new(graph.clone(), vec![0.3, 0.5, 0.2, 0.6, 0.4, 0.1, 0.7], 3)?;
    println!("edges: {:?}", graph.edges());

    let exact = exact_throughput(&cfg)?;
    let sim = simulate(&SimConfig::new(cfg.clone(), 1_000_000, 42)?);
    for i in 0..cfg.n() {
        println!(
            "node {i}: sim {:.5} ± {:.5}  exact {:.5}  attempts {} collisions {}",
            sim.throughput[i], sim.ci_halfwidth[i], exact[i], sim.attempts[i], sim.collisions[i]
        );
    }

    let records = trace(&SimConfig::with_warmup(cfg, 40, 42, 0)?, 40)?;
    println!("\nfirst 40 slots (1 = successful packet on air):");
    for (i, bits) in bit_streams(&records).iter().enumerate() {
        println!("  {i}: {bits}");
    }
    println!("\nslot 0 as JSON: {}", records[0].to_json_line());
    Ok(())
}
