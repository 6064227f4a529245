//! Slot-level Monte Carlo simulation of p-persistent CSMA.
//!
//! Each slot, every eligible node (own counter and all neighbor counters at
//! zero) starts a packet with probability `p_i`, drawn from a
//! [`ChaCha8Rng`] seeded with `seed_from_u64(seed)`. Draws are taken only for
//! eligible nodes, in node order. A start collides when a neighbor starts in
//! the same slot. Colliding packets still occupy `T` slots.
//!
//! Throughput is estimated as `T * successful starts / counted slots` after a
//! warmup. Confidence half-widths come from batch means over
//! [`BATCHES`] equal batches, since consecutive slots are correlated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::ThroughputVector;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};

pub const BATCHES: usize = 30;
pub const MAX_TRACE_SLOTS: u64 = 10_000;

/// Two-sided 97.5% Student t quantile with `BATCHES - 1 = 29` degrees of freedom.
const T_QUANTILE_29: f64 = 2.045_229_642_132_703;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub network: NetworkConfig,
    pub slots: u64,
    pub seed: u64,
    pub warmup: u64,
}

impl SimConfig {
    /// Uses the default warmup of `10 * T` slots.
    pub fn new(network: NetworkConfig, slots: u64, seed: u64) -> Result<Self> {
        let warmup = 10 * network.packet_slots() as u64;
        Self::with_warmup(network, slots, seed, warmup)
    }

    pub fn with_warmup(network: NetworkConfig, slots: u64, seed: u64, warmup: u64) -> Result<Self> {
        if slots <= warmup {
            return Err(Error::InvalidConfig(format!(
                "simulated slots ({slots}) must exceed warmup ({warmup})"
            )));
        }
        Ok(Self {
            network,
            slots,
            seed,
            warmup,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub throughput: ThroughputVector,
    pub attempts: Vec<u64>,
    pub successes: Vec<u64>,
    pub collisions: Vec<u64>,
    /// 95% confidence half-width per node.
    pub ci_halfwidth: Vec<f64>,
}

/// Outcome of one slot for one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotEvent {
    Idle,
    SuccessStart,
    SuccessCont,
    CollisionStart,
    CollisionCont,
}

impl SlotEvent {
    /// Single-letter code used in trace records.
    pub fn code(self) -> &'static str {
        match self {
            SlotEvent::Idle => "I",
            SlotEvent::SuccessStart | SlotEvent::SuccessCont => "S",
            SlotEvent::CollisionStart | SlotEvent::CollisionCont => "C",
        }
    }

    pub fn is_start(self) -> bool {
        matches!(self, SlotEvent::SuccessStart | SlotEvent::CollisionStart)
    }

    pub fn is_success(self) -> bool {
        matches!(self, SlotEvent::SuccessStart | SlotEvent::SuccessCont)
    }
}

/// One slot of a trace. `phase` holds the counters at the start of the slot.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub events: Vec<SlotEvent>,
    pub phase: Vec<u16>,
}

#[derive(Serialize, Deserialize)]
struct TraceLine {
    t: u64,
    events: Vec<String>,
    phase: Vec<u16>,
}

impl TraceRecord {
    /// `{"t": int, "events": ["I"|"S"|"C", ...], "phase": [a_i...]}`. Starts
    /// and continuations share a letter; a start is the slot whose phase
    /// entry is 0.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&TraceLine {
            t: self.t,
            events: self.events.iter().map(|e| e.code().to_string()).collect(),
            phase: self.phase.clone(),
        })
        .expect("trace record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let raw: TraceLine = serde_json::from_str(line)?;
        if raw.events.len() != raw.phase.len() {
            return Err(Error::InvalidConfig("events and phase lengths differ".into()));
        }
        let events = raw
            .events
            .iter()
            .zip(&raw.phase)
            .map(|(e, &a)| match (e.as_str(), a == 0) {
                ("I", _) => Ok(SlotEvent::Idle),
                ("S", true) => Ok(SlotEvent::SuccessStart),
                ("S", false) => Ok(SlotEvent::SuccessCont),
                ("C", true) => Ok(SlotEvent::CollisionStart),
                ("C", false) => Ok(SlotEvent::CollisionCont),
                (other, _) => Err(Error::InvalidConfig(format!("unknown event `{other}`"))),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            t: raw.t,
            events,
            phase: raw.phase,
        })
    }
}

/// Mutable channel state shared by [`simulate`] and [`trace`].
struct Channel<'a> {
    network: &'a NetworkConfig,
    rng: ChaCha8Rng,
    counters: Vec<u16>,
    /// Whether each node's current packet is a success.
    ok: Vec<bool>,
    started: Vec<bool>,
}

impl<'a> Channel<'a> {
    fn new(network: &'a NetworkConfig, seed: u64) -> Self {
        let n = network.n();
        Self {
            network,
            rng: ChaCha8Rng::seed_from_u64(seed),
            counters: vec![0; n],
            ok: vec![false; n],
            started: vec![false; n],
        }
    }

    /// Advances one slot and fills `events`.
    fn step(&mut self, events: &mut [SlotEvent]) {
        let g = self.network.graph();
        let p = self.network.p();
        let n = g.n();
        for i in 0..n {
            let eligible =
                self.counters[i] == 0 && g.neighbors(i).iter().all(|&j| self.counters[j] == 0);
            self.started[i] = eligible && p[i] > 0.0 && self.rng.gen::<f64>() < p[i];
        }
        let top = (self.network.packet_slots() - 1) as u16;
        for i in 0..n {
            if self.started[i] {
                self.ok[i] = g.neighbors(i).iter().all(|&j| !self.started[j]);
                events[i] = if self.ok[i] {
                    SlotEvent::SuccessStart
                } else {
                    SlotEvent::CollisionStart
                };
            } else if self.counters[i] > 0 {
                events[i] = if self.ok[i] {
                    SlotEvent::SuccessCont
                } else {
                    SlotEvent::CollisionCont
                };
            } else {
                events[i] = SlotEvent::Idle;
            }
        }
        for i in 0..n {
            self.counters[i] = if self.started[i] {
                top
            } else {
                self.counters[i].saturating_sub(1)
            };
        }
    }
}

pub fn simulate(sim: &SimConfig) -> SimResult {
    let n = sim.network.n();
    let t = sim.network.packet_slots() as f64;
    let mut channel = Channel::new(&sim.network, sim.seed);
    let mut events = vec![SlotEvent::Idle; n];
    for _ in 0..sim.warmup {
        channel.step(&mut events);
    }

    let counted = sim.slots - sim.warmup;
    let mut attempts = vec![0u64; n];
    let mut successes = vec![0u64; n];
    let mut batch_successes = vec![vec![0u64; n]; BATCHES];
    let mut batch_len = vec![0u64; BATCHES];
    for k in 0..counted {
        let batch = ((k as u128 * BATCHES as u128) / counted as u128) as usize;
        batch_len[batch] += 1;
        channel.step(&mut events);
        for (i, e) in events.iter().enumerate() {
            if e.is_start() {
                attempts[i] += 1;
                if *e == SlotEvent::SuccessStart {
                    successes[i] += 1;
                    batch_successes[batch][i] += 1;
                }
            }
        }
    }

    let throughput = successes.iter().map(|&s| t * s as f64 / counted as f64).collect();
    let ci_halfwidth = (0..n)
        .map(|i| {
            let means: Vec<f64> = (0..BATCHES)
                .filter(|&b| batch_len[b] > 0)
                .map(|b| t * batch_successes[b][i] as f64 / batch_len[b] as f64)
                .collect();
            let m = means.len() as f64;
            if m < 2.0 {
                return f64::INFINITY;
            }
            let mean = means.iter().sum::<f64>() / m;
            let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            T_QUANTILE_29 * (var / m).sqrt()
        })
        .collect();
    let collisions = attempts.iter().zip(&successes).map(|(a, s)| a - s).collect();
    SimResult {
        throughput: ThroughputVector(throughput),
        attempts,
        successes,
        collisions,
        ci_halfwidth,
    }
}

/// Per-slot event log of the first `max_slots` slots (warmup is not applied).
pub fn trace(sim: &SimConfig, max_slots: u64) -> Result<Vec<TraceRecord>> {
    if max_slots > MAX_TRACE_SLOTS {
        return Err(Error::InvalidConfig(format!(
            "trace length {max_slots} exceeds {MAX_TRACE_SLOTS} slots"
        )));
    }
    let n = sim.network.n();
    let mut channel = Channel::new(&sim.network, sim.seed);
    let mut events = vec![SlotEvent::Idle; n];
    let mut out = Vec::with_capacity(max_slots as usize);
    for t in 0..max_slots {
        let phase = channel.counters.clone();
        channel.step(&mut events);
        out.push(TraceRecord {
            t,
            events: events.clone(),
            phase,
        });
    }
    Ok(out)
}

/// Per-node bit strings: `1` for slots carrying a successful packet.
pub fn bit_streams(records: &[TraceRecord]) -> Vec<String> {
    let n = records.first().map_or(0, |r| r.events.len());
    (0..n)
        .map(|i| {
            records
                .iter()
                .map(|r| if r.events[i].is_success() { '1' } else { '0' })
                .collect()
        })
        .collect()
}
