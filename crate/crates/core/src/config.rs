use crate::error::{Error, Result};
use crate::graph::ConflictGraph;

/// A conflict graph together with the access probabilities and packet length.
///
/// `packet_slots` is the packet duration `T` in slots and `sigma` the idle
/// slot duration. The Markov-chain engine works in units of `sigma` and
/// therefore requires `sigma == 1`; the renewal formulas honor any positive
/// `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    graph: ConflictGraph,
    p: Vec<f64>,
    packet_slots: usize,
    sigma: f64,
}

impl NetworkConfig {
    pub fn new(graph: ConflictGraph, p: Vec<f64>, packet_slots: usize) -> Result<Self> {
        Self::with_sigma(graph, p, packet_slots, 1.0)
    }

    pub fn with_sigma(
        graph: ConflictGraph,
        p: Vec<f64>,
        packet_slots: usize,
        sigma: f64,
    ) -> Result<Self> {
        if p.len() != graph.n() {
            return Err(Error::InvalidConfig(format!(
                "{} access probabilities for {} nodes",
                p.len(),
                graph.n()
            )));
        }
        check_probabilities(&p)?;
        if packet_slots == 0 {
            return Err(Error::InvalidConfig("packet duration T must be at least 1".into()));
        }
        if packet_slots > u16::MAX as usize {
            return Err(Error::InvalidConfig(format!("packet duration T={packet_slots} is too large")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("idle slot duration sigma={sigma} must be positive")));
        }
        Ok(Self {
            graph,
            p,
            packet_slots,
            sigma,
        })
    }

    /// Same graph, `T` and `sigma` with a new probability vector.
    pub fn with_p(&self, p: Vec<f64>) -> Result<Self> {
        Self::with_sigma(self.graph.clone(), p, self.packet_slots, self.sigma)
    }

    /// Same graph, probabilities and `sigma` with a new packet duration.
    pub fn with_packet_slots(&self, packet_slots: usize) -> Result<Self> {
        Self::with_sigma(self.graph.clone(), self.p.clone(), packet_slots, self.sigma)
    }

    pub fn graph(&self) -> &ConflictGraph {
        &self.graph
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Packet duration `T` in slots.
    pub fn packet_slots(&self) -> usize {
        self.packet_slots
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }
}

pub(crate) fn check_probabilities(p: &[f64]) -> Result<()> {
    match p.iter().position(|x| !(0.0..=1.0).contains(x)) {
        Some(i) => Err(Error::InvalidConfig(format!(
            "access probability p_{i}={} not in [0,1]",
            p[i]
        ))),
        None => Ok(()),
    }
}
