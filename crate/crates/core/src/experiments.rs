//! Experiment runners behind the `csma` subcommands.
//!
//! Each runner returns an [`ExperimentReport`]. Sweeps evaluate their points
//! in parallel and emit rows in sweep order. A point that fails gets error
//! cells and the sweep continues.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::{build_chain_with, stationary, throughput, ChainOptions, DEFAULT_MAX_STATES};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, Topology};
use crate::optimizer::{optimize, pairwise_weight_grid, region_boundary, OptimizerConfig, OptimizerTrace};
use crate::product_form::throughput_closed_form;
use crate::renewal::{renewal_classic, renewal_extended};
use crate::report::{params, Cell, ExperimentReport, ReportMetadata};
use crate::simulator::{simulate, SimConfig};
use crate::ThroughputVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    Product2,
    Renewal,
    RenewalExt,
    Sim,
}

impl Method {
    pub fn column(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Product2 => "product_form",
            Method::Renewal => "renewal_classic",
            Method::RenewalExt => "renewal_extended",
            Method::Sim => "simulation",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Method::Exact),
            "product2" => Ok(Method::Product2),
            "renewal" => Ok(Method::Renewal),
            "renewal-ext" => Ok(Method::RenewalExt),
            "sim" => Ok(Method::Sim),
            other => Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected exact, product2, renewal, renewal-ext, sim)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Exact => "exact",
            Method::Product2 => "product2",
            Method::Renewal => "renewal",
            Method::RenewalExt => "renewal-ext",
            Method::Sim => "sim",
        };
        f.write_str(s)
    }
}

/// Simulation length and seed.
#[derive(Clone, Copy, Debug)]
pub struct SimSettings {
    pub slots: u64,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            slots: 1_000_000,
            seed: 1,
        }
    }
}

/// Exact throughput with an explicit state cap.
pub fn exact_with_cap(cfg: &NetworkConfig, max_states: usize) -> Result<ThroughputVector> {
    let chain = build_chain_with(cfg, ChainOptions { max_states })?;
    let pi = stationary(&chain)?;
    Ok(throughput(&chain, &pi))
}

fn graph_json(g: &ConflictGraph) -> serde_json::Value {
    serde_json::from_str(&g.to_json()).expect("graph JSON is valid")
}

/// Per-node throughput by each requested method.
pub fn cmd_throughput(
    cfg: &NetworkConfig,
    methods: &[Method],
    sim: SimSettings,
    max_states: usize,
) -> Result<ExperimentReport> {
    let uses_sim = methods.contains(&Method::Sim);
    let meta = ReportMetadata::new(
        "throughput",
        params([
            ("graph", graph_json(cfg.graph())),
            ("p", json!(cfg.p())),
            ("T", json!(cfg.packet_slots())),
            ("sigma", json!(cfg.sigma())),
            ("methods", json!(methods.iter().map(ToString::to_string).collect::<Vec<_>>())),
            ("slots", json!(uses_sim.then_some(sim.slots))),
            ("max_states", json!(max_states)),
        ]),
        uses_sim.then_some(sim.seed),
    );
    let mut columns = vec!["node".to_string()];
    let mut values: Vec<Vec<f64>> = Vec::new();
    for &m in methods {
        columns.push(m.column().to_string());
        match m {
            Method::Exact => values.push(exact_with_cap(cfg, max_states)?.0),
            Method::Product2 => values.push(throughput_closed_form(cfg)?.0),
            Method::Renewal => values.push(renewal_classic(cfg).0),
            Method::RenewalExt => values.push(renewal_extended(cfg).0),
            Method::Sim => {
                let r = simulate(&SimConfig::new(cfg.clone(), sim.slots, sim.seed)?);
                values.push(r.throughput.0);
                columns.push("simulation_ci".to_string());
                values.push(r.ci_halfwidth);
            }
        }
    }
    let mut report = ExperimentReport::new(meta, columns);
    for i in 0..cfg.n() {
        let mut row = vec![Cell::from(i)];
        row.extend(values.iter().map(|v| Cell::Num(v[i])));
        report.push_row(row);
    }
    Ok(report)
}

/// How a Table-1 row summarizes per-node throughput.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    /// Throughput of node 0.
    Node0,
    /// Mean over all nodes.
    Mean,
}

impl FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node0" => Ok(Aggregate::Node0),
            "mean" => Ok(Aggregate::Mean),
            other => Err(Error::InvalidConfig(format!(
                "unknown aggregate `{other}` (expected node0 or mean)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table1Settings {
    pub n: usize,
    pub edge_probs: Vec<f64>,
    /// Uniform access probability for every node.
    pub p: f64,
    pub packet_slots: usize,
    /// Row `k` uses graph seed `seed + k` and simulation seed
    /// `seed + 1_000_000 + k`.
    pub seed: u64,
    pub slots: u64,
    pub aggregate: Aggregate,
    pub max_states: usize,
}

impl Default for Table1Settings {
    fn default() -> Self {
        Self {
            n: 10,
            edge_probs: (0..=10).map(|k| k as f64 / 10.0).collect(),
            p: 0.5,
            packet_slots: 2,
            seed: 1,
            slots: 1_000_000,
            aggregate: Aggregate::Node0,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// Erdős–Rényi sweep comparing simulation, both renewal forms and the exact
/// engine, one row per edge probability.
pub fn cmd_table1(s: &Table1Settings) -> Result<ExperimentReport> {
    for &q in &s.edge_probs {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidConfig(format!("edge probability {q} not in [0,1]")));
        }
    }
    let meta = ReportMetadata::new(
        "table1",
        params([
            ("n", json!(s.n)),
            ("edge_probs", json!(s.edge_probs)),
            ("p", json!(s.p)),
            ("T", json!(s.packet_slots)),
            ("slots", json!(s.slots)),
            ("aggregate", json!(s.aggregate)),
            ("max_states", json!(s.max_states)),
        ]),
        Some(s.seed),
    );
    let columns = [
        "edge_prob",
        "edges",
        "simulation",
        "simulation_ci",
        "renewal_classic",
        "renewal_extended",
        "exact",
        "exact_within_3ci",
    ];
    let mut report = ExperimentReport::new(meta, columns.iter().map(|c| c.to_string()).collect());
    let rows: Vec<Vec<Cell>> = s
        .edge_probs
        .par_iter()
        .enumerate()
        .map(|(k, &q)| {
            let row = || -> Result<Vec<Cell>> {
                let g = ConflictGraph::erdos_renyi(s.n, q, s.seed.wrapping_add(k as u64))?;
                let edges = g.edge_count();
                let cfg = NetworkConfig::new(g, vec![s.p; s.n], s.packet_slots)?;
                let summarize = |v: &[f64]| match s.aggregate {
                    Aggregate::Node0 => v[0],
                    Aggregate::Mean => v.iter().sum::<f64>() / v.len() as f64,
                };
                let sim_seed = s.seed.wrapping_add(1_000_000 + k as u64);
                let sim = simulate(&SimConfig::new(cfg.clone(), s.slots, sim_seed)?);
                let sim_ci = match s.aggregate {
                    Aggregate::Node0 => sim.ci_halfwidth[0],
                    // Conservative: the mean's half-width is at most the mean of half-widths.
                    Aggregate::Mean => summarize(&sim.ci_halfwidth),
                };
                let (sim_v, exact) = (summarize(&sim.throughput), exact_with_cap(&cfg, s.max_states));
                let mut row = vec![
                    Cell::Num(q),
                    Cell::from(edges),
                    Cell::Num(sim_v),
                    Cell::Num(sim_ci),
                    Cell::Num(summarize(&renewal_classic(&cfg))),
                    Cell::Num(summarize(&renewal_extended(&cfg))),
                ];
                match exact {
                    Ok(e) => {
                        let e = summarize(&e);
                        row.push(Cell::Num(e));
                        let ok = (e - sim_v).abs() <= 3.0 * sim_ci;
                        row.push(Cell::from(if ok { "yes" } else { "no" }));
                    }
                    Err(err) => {
                        row.push(Cell::Error(err.to_string()));
                        row.push(Cell::Error(err.to_string()));
                    }
                }
                Ok(row)
            };
            row().unwrap_or_else(|e| {
                let mut r = vec![Cell::Num(q)];
                r.extend((1..columns.len()).map(|_| Cell::Error(e.to_string())));
                r
            })
        })
        .collect();
    rows.into_iter().for_each(|r| report.push_row(r));
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct StarSettings {
    pub n: usize,
    /// Either one value for every node or one per node.
    pub p: Vec<f64>,
    pub packet_slots: Vec<usize>,
    pub max_states: usize,
}

impl Default for StarSettings {
    fn default() -> Self {
        Self {
            n: 5,
            p: vec![0.3],
            packet_slots: vec![1, 2, 4, 8, 16],
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

fn expand_p(p: &[f64], n: usize) -> Result<Vec<f64>> {
    match p.len() {
        1 => Ok(vec![p[0]; n]),
        len if len == n => Ok(p.to_vec()),
        len => Err(Error::InvalidConfig(format!(
            "{len} access probabilities for {n} nodes"
        ))),
    }
}

/// Star topology (hub 0) swept over packet duration. Node 1 is the reported
/// peripheral.
pub fn cmd_star_sweep(s: &StarSettings) -> Result<ExperimentReport> {
    if s.n < 2 {
        return Err(Error::InvalidConfig("a star needs at least 2 nodes".into()));
    }
    let p = expand_p(&s.p, s.n)?;
    let graph = ConflictGraph::named(Topology::Star, s.n)?;
    let meta = ReportMetadata::new(
        "star-sweep",
        params([
            ("n", json!(s.n)),
            ("p", json!(p)),
            ("T", json!(s.packet_slots)),
            ("max_states", json!(s.max_states)),
        ]),
        None,
    );
    let columns = [
        "T",
        "hub_exact",
        "hub_renewal_extended",
        "peripheral_exact",
        "peripheral_renewal_extended",
        "peripheral_rel_underestimate",
    ];
    let mut report = ExperimentReport::new(meta, columns.iter().map(|c| c.to_string()).collect());
    let rows: Vec<Vec<Cell>> = s
        .packet_slots
        .par_iter()
        .map(|&t| {
            let row = || -> Result<Vec<Cell>> {
                let cfg = NetworkConfig::new(graph.clone(), p.clone(), t)?;
                let exact = exact_with_cap(&cfg, s.max_states)?;
                let ren = renewal_extended(&cfg);
                Ok(vec![
                    Cell::from(t),
                    Cell::Num(exact[0]),
                    Cell::Num(ren[0]),
                    Cell::Num(exact[1]),
                    Cell::Num(ren[1]),
                    Cell::Num((exact[1] - ren[1]) / exact[1]),
                ])
            };
            row().unwrap_or_else(|e| {
                let mut r = vec![Cell::from(t)];
                r.extend((1..columns.len()).map(|_| Cell::Error(e.to_string())));
                r
            })
        })
        .collect();
    rows.into_iter().for_each(|r| report.push_row(r));
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct RegionSettings {
    pub graph: ConflictGraph,
    pub packet_slots: Vec<usize>,
    /// Nodes held at `p = 0`.
    pub pinned: Vec<usize>,
    /// The two nodes whose weights are traded off.
    pub pair: (usize, usize),
    /// Weight grid resolution: `steps + 1` points from `(0, 1)` to `(1, 0)`.
    pub steps: usize,
    pub optimizer: OptimizerConfig,
    pub p0: Vec<f64>,
}

/// Throughput-region boundary traced by weight sweeps, one row per
/// `(T, weight)` point. Weights put `t` on the first node of the pair and
/// `1 - t` on the second.
pub fn cmd_region(s: &RegionSettings) -> Result<ExperimentReport> {
    let n = s.graph.n();
    let (a, b) = s.pair;
    for id in [a, b].into_iter().chain(s.pinned.iter().copied()) {
        if id >= n {
            return Err(Error::NodeOutOfRange { id, n });
        }
    }
    if a == b || s.pinned.contains(&a) || s.pinned.contains(&b) {
        return Err(Error::InvalidConfig("the traded pair must be two distinct free nodes".into()));
    }
    if s.steps == 0 {
        return Err(Error::InvalidConfig("weight grid needs at least one step".into()));
    }
    let mut opt = s.optimizer.clone();
    opt.pinned = s.pinned.iter().map(|&i| (i, 0.0)).collect();
    let weights = pairwise_weight_grid(n, a, b, s.steps);
    let meta = ReportMetadata::new(
        "region",
        params([
            ("graph", graph_json(&s.graph)),
            ("T", json!(s.packet_slots)),
            ("pinned", json!(s.pinned)),
            ("pair", json!([a, b])),
            ("steps", json!(s.steps)),
            ("optimizer", serde_json::to_value(&opt)?),
            ("p0", json!(s.p0)),
        ]),
        None,
    );
    let mut columns = vec!["T".to_string(), "weight".to_string()];
    columns.extend((0..n).map(|i| format!("p_{i}")));
    columns.extend((0..n).map(|i| format!("S_{i}")));
    columns.extend(["J".to_string(), "status".to_string()]);
    let mut report = ExperimentReport::new(meta, columns);

    for &t in &s.packet_slots {
        let template = NetworkConfig::new(s.graph.clone(), vec![0.5; n], t)?;
        let points = region_boundary(&template, &weights, &opt, &s.p0);
        for (w, pt) in weights.iter().zip(points) {
            let mut row = vec![Cell::from(t), Cell::Num(w[a])];
            if pt.p.is_empty() {
                let msg = pt.error.unwrap_or_default();
                row.extend((0..2 * n + 2).map(|_| Cell::Error(msg.clone())));
            } else {
                row.extend(pt.p.iter().chain(&pt.s).map(|&x| Cell::Num(x)));
                row.push(Cell::Num(pt.j));
                row.push(match (pt.converged, pt.error) {
                    (true, _) => Cell::from("converged"),
                    (false, Some(reason)) => Cell::Text(reason),
                    (false, None) => Cell::from("not converged"),
                });
            }
            report.push_row(row);
        }
    }
    Ok(report)
}

/// Runs the optimizer; the report holds the final per-node values and the
/// trace holds every iterate.
pub fn cmd_optimize(
    template: &NetworkConfig,
    opt: &OptimizerConfig,
    p0: &[f64],
) -> Result<(ExperimentReport, OptimizerTrace)> {
    let trace = optimize(template, opt, p0)?;
    let mut meta = ReportMetadata::new(
        "optimize",
        params([
            ("graph", graph_json(template.graph())),
            ("T", json!(template.packet_slots())),
            ("optimizer", serde_json::to_value(opt)?),
            ("p0", json!(p0)),
        ]),
        None,
    );
    let last = trace.final_iterate();
    meta.summary = json!({
        "J": last.j,
        "iterations": last.k,
        "converged": trace.converged,
        "reason": trace.reason,
    });
    let columns = ["node", "alpha", "p", "S"];
    let mut report = ExperimentReport::new(meta, columns.iter().map(|c| c.to_string()).collect());
    for i in 0..template.n() {
        report.push_row(vec![
            Cell::from(i),
            Cell::Num(opt.alpha[i]),
            Cell::Num(last.p[i]),
            Cell::Num(last.s[i]),
        ]);
    }
    Ok((report, trace))
}
