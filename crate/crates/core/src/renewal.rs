//! Renewal-reward throughput approximations.
//!
//! [`renewal_classic`] treats every node as contending with every other node
//! and ignores the graph. It is exact on complete graphs.
//! [`renewal_extended`] restricts the contention products to each node's own
//! neighborhood. Both are evaluated exactly as written, including the extra
//! `(1 - p_i)` factor in the idle term of the extended form and values above 1
//! for isolated nodes with long packets; they exist to be compared against the
//! exact engine, not to be corrected.

use crate::chain::ThroughputVector;
use crate::config::NetworkConfig;

/// ```text
/// S_i = p_i prod_{j != i}(1 - p_j) T / (sigma prod_j (1 - p_j) + (1 - prod_j (1 - p_j)) T)
/// ```
pub fn renewal_classic(cfg: &NetworkConfig) -> ThroughputVector {
    let p = cfg.p();
    let t = cfg.packet_slots() as f64;
    let sigma = cfg.sigma();
    let idle_all: f64 = p.iter().map(|x| 1.0 - x).product();
    let denom = sigma * idle_all + (1.0 - idle_all) * t;
    ThroughputVector(
        (0..p.len())
            .map(|i| {
                let others: f64 = p
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, x)| 1.0 - x)
                    .product();
                let num = p[i] * others * t;
                if num == 0.0 {
                    0.0
                } else {
                    num / denom
                }
            })
            .collect(),
    )
}

/// ```text
/// S_i = p_i prod_{j in N(i)}(1 - p_j) T
///       / (sigma (1 - p_i) prod_{j in N(i)}(1 - p_j) + (1 - prod_{j in N(i)}(1 - p_j)) T)
/// ```
pub fn renewal_extended(cfg: &NetworkConfig) -> ThroughputVector {
    let p = cfg.p();
    let g = cfg.graph();
    let t = cfg.packet_slots() as f64;
    let sigma = cfg.sigma();
    ThroughputVector(
        (0..p.len())
            .map(|i| {
                let nb: f64 = g.neighbors(i).iter().map(|&j| 1.0 - p[j]).product();
                let num = p[i] * nb * t;
                if num == 0.0 {
                    return 0.0;
                }
                num / (sigma * (1.0 - p[i]) * nb + (1.0 - nb) * t)
            })
            .collect(),
    )
}
