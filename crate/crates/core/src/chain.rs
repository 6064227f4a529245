//! Exact saturation throughput via the slot-level Markov chain.
//!
//! The state is the vector of residual busy counters `a_i` in `0..T`. A node
//! may start a packet only when its own counter and every neighbor's counter
//! are zero. Starting sets the counter to `T - 1`; otherwise counters count
//! down towards zero. Each eligible node starts independently with
//! probability `p_i`, so a state with `m` eligible nodes has up to `2^m`
//! outgoing transmission vectors.
//!
//! A start by node `i` succeeds when no neighbor starts in the same slot.
//! Neighbors cannot start later in the packet because `i` keeps them
//! ineligible, so success is decided entirely in the start slot.
//!
//! Only states reachable from the all-zeros state with positive probability
//! are enumerated. That set is the single recurrent class of the chain.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::graph::ConflictGraph;

pub const DEFAULT_MAX_STATES: usize = 2_000_000;
pub const DEFAULT_DIRECT_LIMIT: usize = 4096;

/// Residual busy counters `a_i`, one per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateVector(pub Vec<u16>);

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

impl Deref for StateVector {
    type Target = [u16];

    fn deref(&self) -> &[u16] {
        &self.0
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Per-node saturation throughput.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThroughputVector(pub Vec<f64>);

impl Deref for ThroughputVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ThroughputVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Nodes allowed to start a packet in `state`.
pub fn eligible_nodes(state: &[u16], graph: &ConflictGraph) -> Vec<usize> {
    (0..graph.n())
        .filter(|&i| state[i] == 0 && graph.neighbors(i).iter().all(|&j| state[j] == 0))
        .collect()
}

/// Applies one slot of the dynamics. Fails if a non-eligible node is marked
/// as transmitting.
pub fn next_state(
    state: &[u16],
    tx: &[bool],
    graph: &ConflictGraph,
    packet_slots: usize,
) -> Result<StateVector> {
    let n = graph.n();
    if state.len() != n || tx.len() != n {
        return Err(Error::InvalidConfig(format!(
            "state/tx length must equal node count {n}"
        )));
    }
    let eligible = eligible_nodes(state, graph);
    if let Some(i) = (0..n).find(|&i| tx[i] && eligible.binary_search(&i).is_err()) {
        return Err(Error::InvalidTransmission(i));
    }
    let top = (packet_slots - 1) as u16;
    Ok(StateVector(
        (0..n)
            .map(|i| if tx[i] { top } else { state[i].saturating_sub(1) })
            .collect(),
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct ChainOptions {
    /// Hard cap on the number of enumerated states.
    pub max_states: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// Packs counters into a `u64`, `bits` per node.
#[derive(Clone, Copy, Debug)]
struct StateCodec {
    n: usize,
    bits: u32,
}

impl StateCodec {
    fn new(n: usize, packet_slots: usize, cap: usize) -> Result<Self> {
        let bits = usize::BITS - (packet_slots.max(2) - 1).leading_zeros();
        if n as u64 * bits as u64 > 64 {
            // At least 2^n states are reachable (any subset may start from
            // all-zeros), which is far past any practical cap here.
            return Err(Error::StateSpaceTooLarge {
                required: format!("at least 2^{n}"),
                cap,
            });
        }
        Ok(Self { n, bits })
    }

    fn encode(&self, a: &[u16]) -> u64 {
        a.iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | (v as u64) << (i as u32 * self.bits))
    }

    fn decode_into(&self, code: u64, out: &mut [u16]) {
        let mask = (1u64 << self.bits) - 1;
        for (i, slot) in out.iter_mut().enumerate().take(self.n) {
            *slot = ((code >> (i as u32 * self.bits)) & mask) as u16;
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn rows(&self) -> usize {
        self.row_ptr.len().saturating_sub(1)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero `(column, value)` pairs of row `r`, sorted by column.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `x^T M`, i.e. one step of a distribution through the chain.
    pub fn left_multiply(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.cols[k] as usize] += xr * self.vals[k];
            }
        }
    }

    fn push_row(&mut self, entries: &mut Vec<(u32, f64)>) {
        if self.row_ptr.is_empty() {
            self.row_ptr.push(0);
        }
        entries.sort_unstable_by_key(|e| e.0);
        let mut last: Option<u32> = None;
        for &(c, v) in entries.iter() {
            if last == Some(c) {
                *self.vals.last_mut().expect("nonempty") += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = Some(c);
            }
        }
        self.row_ptr.push(self.cols.len());
        entries.clear();
    }
}

/// Enumerated chain: reachable states, transition matrix and per-state
/// success probabilities `R[s, i]`.
#[derive(Clone, Debug)]
pub struct ChainModel {
    n: usize,
    packet_slots: usize,
    codec: StateCodec,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
    transitions: SparseMatrix,
    success: Vec<f64>,
}

impl ChainModel {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn packet_slots(&self) -> usize {
        self.packet_slots
    }

    /// Index of the all-zeros state. States are numbered in BFS order, so
    /// this is always 0.
    pub fn zero_state_index(&self) -> usize {
        0
    }

    pub fn state(&self, s: usize) -> StateVector {
        let mut a = vec![0u16; self.n];
        self.codec.decode_into(self.states[s], &mut a);
        StateVector(a)
    }

    pub fn states(&self) -> impl Iterator<Item = StateVector> + '_ {
        (0..self.num_states()).map(|s| self.state(s))
    }

    pub fn index_of(&self, state: &[u16]) -> Option<usize> {
        if state.len() != self.n || state.iter().any(|&a| a as usize >= self.packet_slots) {
            return None;
        }
        self.index.get(&self.codec.encode(state)).copied()
    }

    pub fn transitions(&self) -> &SparseMatrix {
        &self.transitions
    }

    pub fn transition_prob(&self, from: usize, to: usize) -> f64 {
        self.transitions.get(from, to)
    }

    /// Probability that node `i` starts a successful packet in state `s`.
    pub fn success(&self, s: usize, i: usize) -> f64 {
        self.success[s * self.n + i]
    }

    /// Debug dump: `{"states": [[a...],...], "transitions": [[s, s', prob],...]}`.
    pub fn to_debug_json(&self) -> serde_json::Value {
        let states: Vec<Vec<u16>> = self.states().map(|s| s.0).collect();
        let mut transitions = Vec::with_capacity(self.transitions.nnz());
        for s in 0..self.num_states() {
            for (t, v) in self.transitions.row(s) {
                transitions.push(serde_json::json!([s, t, v]));
            }
        }
        serde_json::json!({ "states": states, "transitions": transitions })
    }
}

pub fn build_chain(cfg: &NetworkConfig) -> Result<ChainModel> {
    build_chain_with(cfg, ChainOptions::default())
}

/// Breadth-first enumeration from the all-zeros state.
pub fn build_chain_with(cfg: &NetworkConfig, opts: ChainOptions) -> Result<ChainModel> {
    if cfg.sigma() != 1.0 {
        return Err(Error::InvalidConfig(
            "the exact engine measures time in idle slots and requires sigma = 1".into(),
        ));
    }
    let graph = cfg.graph();
    let n = graph.n();
    let t = cfg.packet_slots();
    let codec = StateCodec::new(n, t, opts.max_states)?;
    let top = (t - 1) as u16;

    let mut states = vec![0u64];
    let mut index = HashMap::from([(0u64, 0usize)]);
    let mut transitions = SparseMatrix::default();
    let mut success = Vec::new();

    let mut current = vec![0u16; n];
    let mut next = vec![0u16; n];
    let mut tx = vec![false; n];
    let mut row = Vec::new();

    let mut s = 0;
    while s < states.len() {
        codec.decode_into(states[s], &mut current);
        let eligible = eligible_nodes(&current, graph);
        for i in 0..n {
            next[i] = current[i].saturating_sub(1);
        }
        let mut succ_row = vec![0.0; n];
        let mut walk = Walk {
            graph,
            p: cfg.p(),
            eligible: &eligible,
            top,
            codec,
            cap: opts.max_states,
            states: &mut states,
            index: &mut index,
            next: &mut next,
            tx: &mut tx,
            row: &mut row,
            success: &mut succ_row,
        };
        walk.visit(0, 1.0)?;
        transitions.push_row(&mut row);
        success.extend_from_slice(&succ_row);
        s += 1;
    }

    Ok(ChainModel {
        n,
        packet_slots: t,
        codec,
        states,
        index,
        transitions,
        success,
    })
}

/// Depth-first walk over the transmission vectors of one state.
struct Walk<'a> {
    graph: &'a ConflictGraph,
    p: &'a [f64],
    eligible: &'a [usize],
    top: u16,
    codec: StateCodec,
    cap: usize,
    states: &'a mut Vec<u64>,
    index: &'a mut HashMap<u64, usize>,
    next: &'a mut [u16],
    tx: &'a mut [bool],
    row: &'a mut Vec<(u32, f64)>,
    success: &'a mut [f64],
}

impl Walk<'_> {
    fn visit(&mut self, k: usize, prob: f64) -> Result<()> {
        if k == self.eligible.len() {
            return self.leaf(prob);
        }
        let i = self.eligible[k];
        let pi = self.p[i];
        if pi < 1.0 {
            self.visit(k + 1, prob * (1.0 - pi))?;
        }
        if pi > 0.0 {
            self.tx[i] = true;
            self.next[i] = self.top;
            let r = self.visit(k + 1, prob * pi);
            self.tx[i] = false;
            self.next[i] = 0;
            r?;
        }
        Ok(())
    }

    fn leaf(&mut self, prob: f64) -> Result<()> {
        let code = self.codec.encode(self.next);
        let target = match self.index.get(&code) {
            Some(&t) => t,
            None => {
                if self.states.len() >= self.cap {
                    return Err(Error::StateSpaceTooLarge {
                        required: format!("more than {}", self.cap),
                        cap: self.cap,
                    });
                }
                self.states.push(code);
                self.index.insert(code, self.states.len() - 1);
                self.states.len() - 1
            }
        };
        self.row.push((target as u32, prob));
        for &i in self.eligible {
            if self.tx[i] && self.graph.neighbors(i).iter().all(|&j| !self.tx[j]) {
                self.success[i] += prob;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Direct,
    Power,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Chains up to this many states use a dense direct solve.
    pub direct_limit: usize,
    /// Power iteration stops when successive iterates differ by at most this
    /// much in the max norm.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            direct_limit: DEFAULT_DIRECT_LIMIT,
            tol: 1e-12,
            max_iters: 1_000_000,
        }
    }
}

/// Stationary distribution over the states of a [`ChainModel`].
#[derive(Clone, Debug)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub method: SolverMethod,
    /// Power iterations performed (0 for the direct solve).
    pub iterations: usize,
}

impl StationaryDistribution {
    /// `max_s |(pi P)_s - pi_s|`.
    pub fn residual(&self, chain: &ChainModel) -> f64 {
        let mut out = vec![0.0; self.pi.len()];
        chain.transitions().left_multiply(&self.pi, &mut out);
        out.iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn stationary(chain: &ChainModel) -> Result<StationaryDistribution> {
    stationary_with(chain, SolverOptions::default())
}

pub fn stationary_with(chain: &ChainModel, opts: SolverOptions) -> Result<StationaryDistribution> {
    let period = chain_period(chain);
    if period > 1 {
        return Err(Error::PeriodicChain(period));
    }
    let (mut pi, method, iterations) = if chain.num_states() <= opts.direct_limit {
        (solve_direct(chain)?, SolverMethod::Direct, 0)
    } else {
        let (pi, iters) = solve_power(chain, opts)?;
        (pi, SolverMethod::Power, iters)
    };
    for v in pi.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(StationaryDistribution {
        pi,
        method,
        iterations,
    })
}

/// Period of the (irreducible) chain: gcd of `level(u) + 1 - level(v)` over
/// all positive transitions, with BFS levels from the zero state.
fn chain_period(chain: &ChainModel) -> usize {
    let m = chain.num_states();
    let mut level = vec![usize::MAX; m];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for (v, _) in chain.transitions.row(u) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0usize;
    for u in 0..m {
        for (v, _) in chain.transitions.row(u) {
            let d = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
            g = gcd(g, d);
            if g == 1 {
                return 1;
            }
        }
    }
    g.max(1)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Solves `pi (P - I) = 0` with the zero-state balance equation replaced by
/// `sum(pi) = 1`.
fn solve_direct(chain: &ChainModel) -> Result<Vec<f64>> {
    let m = chain.num_states();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for s in 0..m {
        a[(s, s)] -= 1.0;
        for (t, v) in chain.transitions.row(s) {
            // row t of A is the balance equation of state t
            a[(t, s)] += v;
        }
    }
    let z = chain.zero_state_index();
    for c in 0..m {
        a[(z, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[z] = 1.0;
    let x = a.lu().solve(&b).ok_or(Error::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x.iter().copied().collect())
}

fn solve_power(chain: &ChainModel, opts: SolverOptions) -> Result<(Vec<f64>, usize)> {
    let m = chain.num_states();
    let mut pi = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    let mut delta = f64::INFINITY;
    for iter in 1..=opts.max_iters {
        chain.transitions.left_multiply(&pi, &mut next);
        let total: f64 = next.iter().sum();
        delta = 0.0;
        for (x, y) in next.iter_mut().zip(&pi) {
            *x /= total;
            delta = f64::max(delta, (*x - y).abs());
        }
        std::mem::swap(&mut pi, &mut next);
        if delta <= opts.tol {
            return Ok((pi, iter));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iters,
        delta,
    })
}

/// `S_i = T * sum_s pi(s) R_i(s)`.
pub fn throughput(chain: &ChainModel, pi: &StationaryDistribution) -> ThroughputVector {
    let n = chain.num_nodes();
    let t = chain.packet_slots() as f64;
    let mut s = vec![0.0; n];
    for (state, &w) in pi.pi.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (i, acc) in s.iter_mut().enumerate() {
            *acc += w * chain.success(state, i);
        }
    }
    ThroughputVector(s.into_iter().map(|x| t * x).collect())
}

/// Builds the chain, solves it and returns per-node throughput.
pub fn exact_throughput(cfg: &NetworkConfig) -> Result<ThroughputVector> {
    let chain = build_chain(cfg)?;
    let pi = stationary(&chain)?;
    Ok(throughput(&chain, &pi))
}
