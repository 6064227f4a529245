//! Exact saturation throughput of heterogeneous p-persistent CSMA on
//! arbitrary conflict graphs.
//!
//! The exact engine ([`chain`]) enumerates the slot-level Markov chain of
//! residual busy counters, solves for its stationary distribution and reads
//! off per-node throughput. Around it sit:
//!
//! * [`product_form`]: closed-form stationary weights for two-slot packets,
//! * [`renewal`]: the classic and neighborhood renewal approximations,
//! * [`simulator`]: a seeded slot-level Monte Carlo simulator,
//! * [`optimizer`]: projected gradient ascent on weighted utilities,
//! * [`experiments`] and [`report`]: sweep runners with CSV/JSON output.
//!
//! ```
//! use pcsma::{exact_throughput, ConflictGraph, NetworkConfig, Topology};
//!
//! let graph = ConflictGraph::named(Topology::Path, 3)?;
//! let cfg = NetworkConfig::new(graph, vec![0.5, 0.5, 0.5], 2)?;
//! let s = exact_throughput(&cfg)?;
//! assert!((s[0] - 0.75 / 2.125).abs() < 1e-12);
//! # Ok::<(), pcsma::Error>(())
//! ```

pub mod chain;
pub mod config;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod optimizer;
pub mod product_form;
pub mod renewal;
pub mod report;
pub mod simulator;

pub use chain::{
    build_chain, eligible_nodes, exact_throughput, next_state, stationary, throughput, ChainModel,
    StateVector, StationaryDistribution, ThroughputVector,
};
pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use graph::{ConflictGraph, Topology};
pub use optimizer::{optimize, OptimizerConfig, OptimizerTrace, Utility};
pub use product_form::{partition_function, state_weight, throughput_closed_form};
pub use renewal::{renewal_classic, renewal_extended};
pub use simulator::{simulate, trace, SimConfig, SimResult};
