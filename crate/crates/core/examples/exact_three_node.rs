//! Exact throughput of the three-node path `0 - 1 - 2` with two-slot packets.
//!
//! Prints the enumerated chain, its stationary distribution and per-node
//! throughput, and compares against the closed form.

use pcsma::chain::{build_chain, stationary, throughput};
use pcsma::optimizer::path3;
use pcsma::{ConflictGraph, NetworkConfig, Topology};

fn main() -> pcsma::Result<()> {
    let p = [0.5, 0.5, 0.5];
    let cfg = NetworkConfig::new(ConflictGraph::named(Topology::Path, 3)?, p.to_vec(), 2)?;
    let chain = build_chain(&cfg)?;
    let pi = stationary(&chain)?;

    println!("{} reachable states", chain.num_states());
    for (s, state) in chain.states().enumerate() {
        println!("  pi{state} = {:.6}", pi.pi[s]);
    }

    let s = throughput(&chain, &pi);
    let closed = path3::throughput(p);
    for i in 0..3 {
        println!("S_{i} = {:.9}  (closed form {:.9})", s[i], closed[i]);
    }
    println!("residual |pi P - pi| = {:.2e}", pi.residual(&chain));
    Ok(())
}
