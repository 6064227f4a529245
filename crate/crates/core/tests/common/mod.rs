//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use pcsma::{ConflictGraph, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_p(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// The three-node path expressions exactly as printed, term by term,
/// including the repeated `p0 q1 p2` in `S_2`.
pub fn path3_printed(p: [f64; 3]) -> [f64; 3] {
    let [p0, p1, p2] = p;
    let (q0, q1, q2) = (1.0 - p0, 1.0 - p1, 1.0 - p2);
    let z = 1.0 + q1 * p2 + q1 * p0 + p1 + q1 * p0 * p2;
    [
        2.0 * ((p0 * q1 * q2 + p0 * q1 * p2 + q1 * p0 * p2) / z),
        2.0 * ((q0 * p1 * q2) / z),
        2.0 * ((p0 * q1 * p2 + q0 * q1 * p2 + p0 * q1 * p2) / z),
    ]
}

/// Brute-force chain over the full `{0..T-1}^n` grid with every one of the
/// `2^n` transmission vectors checked for validity, solved by iterating the
/// distribution from the all-zeros state. Only for tiny `T^n`.
pub struct BruteForce {
    pub n: usize,
    pub t: usize,
    pub matrix: Vec<Vec<f64>>,
    pub success: Vec<Vec<f64>>,
}

impl BruteForce {
    pub fn decode(&self, mut code: usize) -> Vec<usize> {
        (0..self.n)
            .map(|_| {
                let a = code % self.t;
                code /= self.t;
                a
            })
            .collect()
    }

    pub fn encode(&self, a: &[usize]) -> usize {
        a.iter().rev().fold(0, |acc, &x| acc * self.t + x)
    }

    pub fn new(g: &ConflictGraph, p: &[f64], t: usize) -> Self {
        let n = g.n();
        let size = t.pow(n as u32);
        let mut bf = BruteForce {
            n,
            t,
            matrix: vec![vec![0.0; size]; size],
            success: vec![vec![0.0; n]; size],
        };
        for code in 0..size {
            let a = bf.decode(code);
            let can = |i: usize| a[i] == 0 && g.neighbors(i).iter().all(|&j| a[j] == 0);
            for mask in 0..(1usize << n) {
                let tx = |i: usize| mask >> i & 1 == 1;
                if (0..n).any(|i| tx(i) && !can(i)) {
                    continue;
                }
                let mut prob = 1.0;
                for i in (0..n).filter(|&i| can(i)) {
                    prob *= if tx(i) { p[i] } else { 1.0 - p[i] };
                }
                let next: Vec<usize> = (0..n)
                    .map(|i| if tx(i) { t - 1 } else { a[i].saturating_sub(1) })
                    .collect();
                let to = bf.encode(&next);
                bf.matrix[code][to] += prob;
                for i in 0..n {
                    if tx(i) && g.neighbors(i).iter().all(|&j| !tx(j)) {
                        bf.success[code][i] += prob;
                    }
                }
            }
        }
        bf
    }

    /// Stationary law reached from the all-zeros state: row 0 of `P^(2^k)`
    /// for growing `k`.
    pub fn stationary(&self) -> Vec<f64> {
        let size = self.matrix.len();
        let mut m = self.matrix.clone();
        for _ in 0..64 {
            let mut sq = vec![vec![0.0; size]; size];
            for (r, row) in m.iter().enumerate() {
                for (k, &a) in row.iter().enumerate().filter(|(_, a)| **a != 0.0) {
                    for (c, &b) in m[k].iter().enumerate() {
                        sq[r][c] += a * b;
                    }
                }
            }
            for row in &mut sq {
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= total);
            }
            let delta = sq[0].iter().zip(&m[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            m = sq;
            if delta < 1e-14 {
                break;
            }
        }
        m.swap_remove(0)
    }

    pub fn throughput(&self) -> Vec<f64> {
        let pi = self.stationary();
        (0..self.n)
            .map(|i| {
                self.t as f64
                    * pi.iter().zip(&self.success).map(|(w, r)| w * r[i]).sum::<f64>()
            })
            .collect()
    }

    /// Codes reachable from all-zeros through positive-probability moves.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.matrix.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for (u, &v) in self.matrix[s].iter().enumerate() {
                if v > 0.0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        (0..seen.len()).filter(|&c| seen[c]).collect()
    }
}

/// Named topologies with up to `max_n` nodes plus a few random graphs.
pub fn graph_corpus(max_n: usize) -> Vec<ConflictGraph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for kind in [Topology::Star, Topology::Complete, Topology::Path, Topology::Cycle] {
            out.push(ConflictGraph::named(kind, n).unwrap());
        }
        out.push(ConflictGraph::empty(n).unwrap());
        for seed in 0..3 {
            out.push(ConflictGraph::erdos_renyi(n, 0.5, 100 + seed).unwrap());
        }
    }
    out.dedup();
    out
}

/// All maximal cliques (Bron–Kerbosch without pivoting).
pub fn maximal_cliques(g: &ConflictGraph) -> Vec<Vec<usize>> {
    fn bk(g: &ConflictGraph, r: Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            out.push(r);
            return;
        }
        while let Some(v) = p.pop() {
            let mut r2 = r.clone();
            r2.push(v);
            let p2 = p.iter().copied().filter(|&u| g.has_edge(u, v)).collect();
            let x2 = x.iter().copied().filter(|&u| g.has_edge(u, v)).collect();
            bk(g, r2, p2, x2, out);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    bk(g, Vec::new(), (0..g.n()).collect(), Vec::new(), &mut out);
    out
}
