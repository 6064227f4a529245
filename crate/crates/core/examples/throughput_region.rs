//! Boundary of the achievable `(S_1, S_2)` region on the three-node path with
//! node 0 silenced, for two packet durations.

use pcsma::experiments::{cmd_region, RegionSettings};
use pcsma::{ConflictGraph, OptimizerConfig, Topology};

fn main() -> pcsma::Result<()> {
    let report = cmd_region(&RegionSettings {
        graph: ConflictGraph::named(Topology::Path, 3)?,
        packet_slots: vec![2, 4],
        pinned: vec![0],
        pair: (1, 2),
        steps: 10,
        optimizer: OptimizerConfig::new(vec![0.0; 3]),
        p0: vec![0.0, 0.5, 0.5],
    })?;
    println!("{:>3} {:>6} {:>10} {:>10}", "T", "w_1", "S_1", "S_2");
    for r in 0..report.rows.len() {
        let get = |c: &str| report.num(r, c).unwrap_or(f64::NAN);
        println!("{:>3} {:>6.2} {:>10.6} {:>10.6}", get("T"), get("weight"), get("S_1"), get("S_2"));
    }
    Ok(())
}
