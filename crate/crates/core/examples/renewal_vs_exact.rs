//! The renewal approximations next to the exact engine on a few topologies.
//! On a complete graph the classic formula is exact; elsewhere it is not.

use pcsma::{exact_throughput, renewal_classic, renewal_extended, ConflictGraph, NetworkConfig, Topology};

fn main() -> pcsma::Result<()> {
    println!("{:<10} {:>2} {:>5} {:>12} {:>12} {:>12}", "topology", "T", "node", "exact", "classic", "extended");
    for kind in [Topology::Complete, Topology::Star, Topology::Path, Topology::Cycle] {
        for t in [2, 5] {
            let cfg = NetworkConfig::new(ConflictGraph::named(kind, 5)?, vec![0.25; 5], t)?;
            let exact = exact_throughput(&cfg)?;
            let classic = renewal_classic(&cfg);
            let extended = renewal_extended(&cfg);
            for i in [0, 1] {
                println!(
                    "{:<10} {:>2} {:>5} {:>12.6} {:>12.6} {:>12.6}",
                    kind.to_string(), t, i, exact[i], classic[i], extended[i]
                );
            }
        }
    }
    Ok(())
}
