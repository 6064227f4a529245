//! Closed-form stationary distribution for two-slot packets.
//!
//! With `T = 2` every state is a binary vector and the chain is reversible.
//! The stationary weight of a state `s` is
//!
//! ```text
//! w(s) = prod_{i in busy(s)} p_i * prod_{i in blocked(s)} (1 - p_i)
//! ```
//!
//! where `busy(s) = {i : s_i = 1}` and `blocked(s)` holds the idle nodes that
//! have at least one busy neighbor. `pi(s) = w(s) / Z`, with `Z` the sum of
//! all weights over `{0,1}^n`. Every binary vector is reachable from the
//! all-zeros state, so the sum runs over the whole hypercube.
//!
//! No linear solve is needed, only the `2^n` enumeration, which is capped at
//! [`MAX_NODES`] nodes.

use rayon::join;

use crate::chain::{StateVector, ThroughputVector};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};

pub const MAX_NODES: usize = 24;

const LEAF: u64 = 1 << 10;
const EXTREME: f64 = 1e-12;

/// Unnormalized stationary weight of one binary state.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFormWeight {
    pub state: StateVector,
    /// Busy nodes.
    pub g1: Vec<usize>,
    /// Idle nodes with a busy neighbor.
    pub g2: Vec<usize>,
    pub weight: f64,
}

struct Masks<'a> {
    p: &'a [f64],
    neighbors: Vec<u32>,
    log_space: bool,
}

impl<'a> Masks<'a> {
    fn new(cfg: &'a NetworkConfig) -> Result<Self> {
        if cfg.packet_slots() != 2 {
            return Err(Error::InvalidConfig(format!(
                "product form needs T = 2, got T = {}",
                cfg.packet_slots()
            )));
        }
        let n = cfg.n();
        if n > MAX_NODES {
            return Err(Error::StateSpaceTooLarge {
                required: format!("2^{n}"),
                cap: 1 << MAX_NODES,
            });
        }
        let g = cfg.graph();
        let neighbors = (0..n)
            .map(|i| g.neighbors(i).iter().fold(0u32, |m, &j| m | 1 << j))
            .collect();
        let log_space = cfg.p().iter().any(|&x| x < EXTREME || x > 1.0 - EXTREME);
        Ok(Self {
            p: cfg.p(),
            neighbors,
            log_space,
        })
    }

    fn blocked(&self, busy: u32) -> u32 {
        let mut m = 0;
        for (i, &nb) in self.neighbors.iter().enumerate() {
            if busy & (1 << i) == 0 && nb & busy != 0 {
                m |= 1 << i;
            }
        }
        m
    }

    fn weight(&self, busy: u32, blocked: u32) -> f64 {
        let factors = (0..self.p.len()).filter_map(|i| {
            if busy & (1 << i) != 0 {
                Some(self.p[i])
            } else if blocked & (1 << i) != 0 {
                Some(1.0 - self.p[i])
            } else {
                None
            }
        });
        if self.log_space {
            factors.map(f64::ln).sum::<f64>().exp()
        } else {
            factors.product()
        }
    }

    /// `R_i(s)` for every node: an eligible node succeeds when it starts and
    /// none of its eligible neighbors does.
    fn success_into(&self, busy: u32, blocked: u32, out: &mut [f64]) {
        let eligible = !(busy | blocked);
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = if eligible & (1 << i) == 0 {
                0.0
            } else {
                let mut r = self.p[i];
                let mut nb = self.neighbors[i] & eligible;
                while nb != 0 {
                    let j = nb.trailing_zeros() as usize;
                    r *= 1.0 - self.p[j];
                    nb &= nb - 1;
                }
                r
            };
        }
    }
}

fn mask_of(state: &[u16]) -> Result<u32> {
    let mut m = 0;
    for (i, &a) in state.iter().enumerate() {
        match a {
            0 => {}
            1 => m |= 1 << i,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "state entry a_{i}={a} is not binary"
                )))
            }
        }
    }
    Ok(m)
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

pub fn state_weight(state: &[u16], cfg: &NetworkConfig) -> Result<ProductFormWeight> {
    let masks = Masks::new(cfg)?;
    if state.len() != cfg.n() {
        return Err(Error::InvalidConfig(format!(
            "state has {} entries for {} nodes",
            state.len(),
            cfg.n()
        )));
    }
    let busy = mask_of(state)?;
    let blocked = masks.blocked(busy);
    Ok(ProductFormWeight {
        state: StateVector(state.to_vec()),
        g1: members(busy, cfg.n()),
        g2: members(blocked, cfg.n()),
        weight: masks.weight(busy, blocked),
    })
}

/// Sum of `f(mask)` over `lo..hi`, split pairwise so the reduction order does
/// not depend on thread scheduling.
fn pairwise<F>(lo: u64, hi: u64, width: usize, f: &F) -> Vec<f64>
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    if hi - lo <= LEAF {
        let mut acc = vec![0.0; width];
        for m in lo..hi {
            f(m, &mut acc);
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    let (mut a, b) = join(|| pairwise(lo, mid, width, f), || pairwise(mid, hi, width, f));
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Normalizer `Z` of the product-form weights.
pub fn partition_function(cfg: &NetworkConfig) -> Result<f64> {
    let masks = Masks::new(cfg)?;
    let total = pairwise(0, 1u64 << cfg.n(), 1, &|m, acc: &mut [f64]| {
        let busy = m as u32;
        acc[0] += masks.weight(busy, masks.blocked(busy));
    });
    Ok(total[0])
}

/// Per-node throughput from the product form, `S_i = 2 sum_s w(s) R_i(s) / Z`.
pub fn throughput_closed_form(cfg: &NetworkConfig) -> Result<ThroughputVector> {
    let masks = Masks::new(cfg)?;
    let n = cfg.n();
    let acc = pairwise(0, 1u64 << n, n + 1, &|m, acc: &mut [f64]| {
        let busy = m as u32;
        let blocked = masks.blocked(busy);
        let w = masks.weight(busy, blocked);
        if w == 0.0 {
            return;
        }
        acc[0] += w;
        let mut r = vec![0.0; n];
        masks.success_into(busy, blocked, &mut r);
        for (a, ri) in acc[1..].iter_mut().zip(r) {
            *a += w * ri;
        }
    });
    let z = acc[0];
    Ok(ThroughputVector(acc[1..].iter().map(|x| 2.0 * x / z).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConflictGraph, Topology};
    use approx::assert_abs_diff_eq;

    fn path_cfg(p: [f64; 3]) -> NetworkConfig {
        NetworkConfig::new(ConflictGraph::named(Topology::Path, 3).unwrap(), p.to_vec(), 2)
            .unwrap()
    }

    #[test]
    fn weights_on_three_node_path() {
        let (p0, p1, p2) = (0.2, 0.3, 0.7);
        let cfg = path_cfg([p0, p1, p2]);
        let w = state_weight(&[0, 1, 0], &cfg).unwrap();
        assert_eq!((w.g1.as_slice(), w.g2.as_slice()), (&[1][..], &[0, 2][..]));
        assert_abs_diff_eq!(w.weight, p1 * (1.0 - p0) * (1.0 - p2), epsilon = 1e-15);

        let w = state_weight(&[0, 0, 1], &cfg).unwrap();
        assert_eq!((w.g1.as_slice(), w.g2.as_slice()), (&[2][..], &[1][..]));
        assert_abs_diff_eq!(w.weight, p2 * (1.0 - p1), epsilon = 1e-15);

        let w = state_weight(&[0, 0, 0], &cfg).unwrap();
        assert!(w.g1.is_empty() && w.g2.is_empty());
        assert_eq!(w.weight, 1.0);
    }

    #[test]
    fn partition_function_examples() {
        let (p0, p1, p2) = (0.2, 0.3, 0.7);
        let q1 = 1.0 - p1;
        let z = partition_function(&path_cfg([p0, p1, p2])).unwrap();
        assert_abs_diff_eq!(
            z,
            1.0 + q1 * p2 + q1 * p0 + p1 + q1 * p0 * p2,
            epsilon = 1e-14
        );

        let single = NetworkConfig::new(ConflictGraph::empty(1).unwrap(), vec![0.4], 2).unwrap();
        assert_abs_diff_eq!(partition_function(&single).unwrap(), 1.4, epsilon = 1e-15);

        assert_eq!(partition_function(&path_cfg([0.0; 3])).unwrap(), 1.0);
    }

    #[test]
    fn rejects_other_packet_lengths() {
        let cfg = path_cfg([0.5; 3]).with_packet_slots(3).unwrap();
        assert!(matches!(partition_function(&cfg), Err(Error::InvalidConfig(_))));
        assert!(matches!(state_weight(&[0, 2, 0], &path_cfg([0.5; 3])), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn rejects_large_graphs() {
        let g = ConflictGraph::empty(MAX_NODES + 1).unwrap();
        let cfg = NetworkConfig::new(g, vec![0.5; MAX_NODES + 1], 2).unwrap();
        assert!(matches!(
            partition_function(&cfg),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn symmetric_pair() {
        let g = ConflictGraph::named(Topology::Complete, 2).unwrap();
        let cfg = NetworkConfig::new(g, vec![0.35, 0.35], 2).unwrap();
        let s = throughput_closed_form(&cfg).unwrap();
        assert_eq!(s[0], s[1]);
    }

    #[test]
    fn extreme_probabilities_use_log_space() {
        let cfg = path_cfg([1e-300, 0.5, 1.0]);
        let s = throughput_closed_form(&cfg).unwrap();
        assert!(s.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x)));
    }
}
