//! Conflict graphs: construction, file formats and canonical topologies.
//!
//! Two input formats are accepted by [`ConflictGraph::parse`]:
//!
//! * JSON: `{"n": 3, "edges": [[0,1],[1,2]], "names": ["a","b","c"]}`. When
//!   `names` is present, edge endpoints may also be given by name.
//! * Edge-list text: a `n=<int>` header line followed by one `i j` pair per
//!   line. Blank lines and `#` comments are ignored.
//!
//! Reversed and duplicated edges are merged. Self-loops and out-of-range ids
//! are rejected.
//!
//! Random graphs use [`rand_chacha::ChaCha8Rng`] seeded with
//! `seed_from_u64(seed)`, and draw one uniform `f64` per unordered pair in
//! lexicographic `(i, j)` order, so a given `(n, q, seed)` always produces the
//! same graph with this crate.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected interference graph over transmitters `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
    names: Option<Vec<String>>,
}

impl ConflictGraph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::MalformedGraph("graph must have at least one node".into()));
        }
        Ok(Self {
            n,
            adjacency: vec![Vec::new(); n],
            names: None,
        })
    }

    /// Builds a graph from an edge list, merging duplicate and reversed pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut sets = vec![BTreeSet::new(); n];
        if n == 0 {
            return Err(Error::MalformedGraph("graph must have at least one node".into()));
        }
        for (i, j) in edges {
            for id in [i, j] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            sets[i].insert(j);
            sets[j].insert(i);
        }
        Ok(Self {
            n,
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            names: None,
        })
    }

    /// Attaches a name table. `names.len()` must equal `n`.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::MalformedGraph(format!(
                "{} names given for {} nodes",
                names.len(),
                self.n
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted neighbor list `N(i)`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// True when every pair of distinct nodes is adjacent.
    pub fn is_complete(&self) -> bool {
        self.adjacency.iter().all(|a| a.len() == self.n - 1)
    }

    /// True when every pair in `nodes` is adjacent.
    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(k, &i)| nodes[k + 1..].iter().all(|&j| self.has_edge(i, j)))
    }

    /// Parses either the JSON or the edge-list format.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_edge_list(text)
        }
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| Error::MalformedGraph(e.to_string()))?;
        let mut edges = Vec::with_capacity(doc.edges.len());
        for [a, b] in &doc.edges {
            edges.push((
                a.resolve(doc.n, doc.names.as_deref())?,
                b.resolve(doc.n, doc.names.as_deref())?,
            ));
        }
        let g = Self::from_edges(doc.n, edges)?;
        match doc.names {
            Some(names) => g.with_names(names),
            None => Ok(g),
        }
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::MalformedGraph(format!("line {}: `{}`", lineno + 1, raw.trim()));
            if n.is_none() {
                let value = line
                    .strip_prefix("n=")
                    .or_else(|| line.strip_prefix("n ="))
                    .ok_or_else(|| {
                        Error::MalformedGraph(format!(
                            "line {}: expected `n=<int>` header",
                            lineno + 1
                        ))
                    })?;
                n = Some(value.trim().parse::<usize>().map_err(|_| bad())?);
                continue;
            }
            let mut parts = line.split_whitespace();
            let i = parts.next().ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?;
            let j = parts.next().ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?;
            if parts.next().is_some() {
                return Err(bad());
            }
            edges.push((i, j));
        }
        let n = n.ok_or_else(|| Error::MalformedGraph("missing `n=<int>` header".into()))?;
        Self::from_edges(n, edges)
    }

    pub fn to_json(&self) -> String {
        let doc = GraphDocument {
            n: self.n,
            edges: self
                .edges()
                .into_iter()
                .map(|(i, j)| [NodeRef::Id(i), NodeRef::Id(j)])
                .collect(),
            names: self.names.clone(),
        };
        serde_json::to_string(&doc).expect("graph document serializes")
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (i, j) in self.edges() {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    /// G(n, q) random graph; see the module docs for the RNG contract.
    pub fn erdos_renyi(n: usize, q: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidConfig(format!("edge probability {q} not in [0,1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < q {
                    edges.push((i, j));
                }
            }
        }
        Self::from_edges(n, edges)
    }

    /// Canonical topology. For stars node 0 is the hub.
    pub fn named(kind: Topology, n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = match kind {
            Topology::Star => (1..n).map(|j| (0, j)).collect(),
            Topology::Complete => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
            Topology::Path => (1..n).map(|j| (j - 1, j)).collect(),
            Topology::Cycle => {
                let mut e: Vec<_> = (1..n).map(|j| (j - 1, j)).collect();
                if n > 2 {
                    e.push((n - 1, 0));
                }
                e
            }
        };
        Self::from_edges(n, edges)
    }
}

/// Named canonical topologies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Star,
    Complete,
    Path,
    Cycle,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "star" => Ok(Topology::Star),
            "complete" => Ok(Topology::Complete),
            "path" => Ok(Topology::Path),
            "cycle" => Ok(Topology::Cycle),
            _ => Err(Error::UnknownTopology(s.to_string())),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Topology::Star => "star",
            Topology::Complete => "complete",
            Topology::Path => "path",
            Topology::Cycle => "cycle",
        };
        f.write_str(s)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphDocument {
    n: usize,
    #[serde(default)]
    edges: Vec<[NodeRef; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRef {
    Id(usize),
    Name(String),
}

impl NodeRef {
    fn resolve(&self, n: usize, names: Option<&[String]>) -> Result<usize> {
        match self {
            NodeRef::Id(id) if *id < n => Ok(*id),
            NodeRef::Id(id) => Err(Error::NodeOutOfRange { id: *id, n }),
            NodeRef::Name(name) => names
                .and_then(|ns| ns.iter().position(|x| x == name))
                .ok_or_else(|| Error::MalformedGraph(format!("unknown node name `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_node_path() {
        let g = ConflictGraph::parse(r#"{"n":3,"edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn parses_isolated_node() {
        let g = ConflictGraph::parse(r#"{"n":1,"edges":[]}"#).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn reversed_duplicate_is_merged() {
        let g = ConflictGraph::parse(r#"{"n":3,"edges":[[0,1],[1,0]]}"#).unwrap();
        assert_eq!(g, ConflictGraph::from_edges(3, [(0, 1)]).unwrap());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            ConflictGraph::parse(r#"{"n":2,"edges":[[1,1]]}"#),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            ConflictGraph::parse(r#"{"n":2,"edges":[[0,2]]}"#),
            Err(Error::NodeOutOfRange { id: 2, n: 2 })
        ));
        assert!(matches!(
            ConflictGraph::parse(r#"{"n":2,"edges":[[0]]}"#),
            Err(Error::MalformedGraph(_))
        ));
        assert!(ConflictGraph::parse("{not json").is_err());
        assert!(ConflictGraph::parse("0 1\n").is_err());
        assert!(ConflictGraph::parse(r#"{"n":0}"#).is_err());
    }

    #[test]
    fn names_resolve_edges() {
        let g = ConflictGraph::parse(
            r#"{"n":3,"edges":[["ap","sta1"],[2,"ap"]],"names":["ap","sta1","sta2"]}"#,
        )
        .unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2)]);
        assert_eq!(g.names().unwrap()[2], "sta2");
        assert!(ConflictGraph::parse(r#"{"n":2,"edges":[["x",1]],"names":["a","b"]}"#).is_err());
    }

    #[test]
    fn edge_list_format() {
        let g = ConflictGraph::parse("# path\nn=3\n0 1\n\n2 1 # reversed\n").unwrap();
        assert_eq!(g, ConflictGraph::named(Topology::Path, 3).unwrap());
        assert_eq!(ConflictGraph::parse(&g.to_edge_list()).unwrap(), g);
        assert!(ConflictGraph::parse("n=3\n0 1 2\n").is_err());
    }

    #[test]
    fn named_topologies() {
        let star = ConflictGraph::named(Topology::Star, 4).unwrap();
        assert_eq!(star.edges(), vec![(0, 1), (0, 2), (0, 3)]);
        let k3 = ConflictGraph::named(Topology::Complete, 3).unwrap();
        assert_eq!(k3.edges(), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(k3.is_complete());
        let path = ConflictGraph::named(Topology::Path, 3).unwrap();
        assert_eq!(path.edges(), vec![(0, 1), (1, 2)]);
        let c4 = ConflictGraph::named(Topology::Cycle, 4).unwrap();
        assert_eq!(c4.edge_count(), 4);
        assert!(matches!("wheel".parse::<Topology>(), Err(Error::UnknownTopology(_))));
        assert_eq!("Star".parse::<Topology>().unwrap(), Topology::Star);
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(ConflictGraph::erdos_renyi(5, 0.0, 7).unwrap().edge_count(), 0);
        assert!(ConflictGraph::erdos_renyi(5, 1.0, 7).unwrap().is_complete());
        assert!(ConflictGraph::erdos_renyi(5, 1.5, 7).is_err());
    }

    #[test]
    fn erdos_renyi_edge_count_mean() {
        let total: usize = (0..1000)
            .map(|seed| ConflictGraph::erdos_renyi(10, 0.5, seed).unwrap().edge_count())
            .sum();
        let mean = total as f64 / 1000.0;
        assert!((mean - 22.5).abs() <= 1.0, "mean edge count {mean}");
    }

    #[test]
    fn erdos_renyi_is_reproducible() {
        let a = ConflictGraph::erdos_renyi(10, 0.5, 42).unwrap();
        let b = ConflictGraph::erdos_renyi(10, 0.5, 42).unwrap();
        assert_eq!(a, b);
    }
}
