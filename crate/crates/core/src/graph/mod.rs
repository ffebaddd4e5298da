//! Weighted undirected graphs with stable edge identities.
//!
//! Each undirected pair `{u, v}` is stored once with `u < v`, and its
//! [`EdgeId`] is its insertion index. Perturbation vectors and LP variables
//! are indexed by that id. A [`Graph`] is immutable once built; derived
//! graphs (perturbed, reweighted, induced) are new values.

mod paths;
mod structure;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub use paths::{dijkstra, second_shortest_excluding, yen_k_shortest};
pub use structure::{
    bfs_hops, induced_subgraph, induced_subgraph_within_hops, is_connected,
    largest_connected_component, nodes_at_hop_distance, Subgraph,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// An undirected edge, normalized so that `u < v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

impl Edge {
    /// The endpoint opposite `x`, if `x` is an endpoint.
    pub fn other(&self, x: NodeId) -> Option<NodeId> {
        if x == self.u {
            Some(self.v)
        } else if x == self.v {
            Some(self.u)
        } else {
            None
        }
    }
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn check_weight(w: f64) -> Result<()> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::arg(format!("edge weight must be finite and >= 0, got {w}")));
    }
    Ok(())
}

/// Incrementally assembles a [`Graph`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    n_nodes: usize,
    edges: Vec<Edge>,
    lookup: HashMap<(NodeId, NodeId), EdgeId>,
}

impl GraphBuilder {
    pub fn new(n_nodes: usize) -> Self {
        GraphBuilder {
            n_nodes,
            edges: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    pub fn with_capacity(n_nodes: usize, n_edges: usize) -> Self {
        GraphBuilder {
            n_nodes,
            edges: Vec::with_capacity(n_edges),
            lookup: HashMap::with_capacity(n_edges),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Grows the node count; never shrinks it.
    pub fn ensure_nodes(&mut self, n_nodes: usize) {
        self.n_nodes = self.n_nodes.max(n_nodes);
    }

    pub fn contains(&self, a: NodeId, b: NodeId) -> bool {
        self.lookup.contains_key(&key(a, b))
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.lookup.get(&key(a, b)).copied()
    }

    /// Adds `{a, b}` with weight `w`. Self-loops, duplicates, out-of-range
    /// endpoints and negative weights are rejected.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, w: f64) -> Result<EdgeId> {
        if a.0 >= self.n_nodes {
            return Err(Error::NodeOutOfRange(a, self.n_nodes));
        }
        if b.0 >= self.n_nodes {
            return Err(Error::NodeOutOfRange(b, self.n_nodes));
        }
        if a == b {
            return Err(Error::arg(format!("self-loop on node {a}")));
        }
        check_weight(w)?;
        let k = key(a, b);
        if self.lookup.contains_key(&k) {
            return Err(Error::arg(format!("duplicate edge {{{}, {}}}", k.0, k.1)));
        }
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge { u: k.0, v: k.1, weight: w });
        self.lookup.insert(k, id);
        Ok(id)
    }

    /// Overwrites the weight of an existing edge.
    pub fn set_weight(&mut self, e: EdgeId, w: f64) -> Result<()> {
        check_weight(w)?;
        let edge = self
            .edges
            .get_mut(e.0)
            .ok_or_else(|| Error::arg(format!("edge {e} out of range")))?;
        edge.weight = w;
        Ok(())
    }

    pub fn weight(&self, e: EdgeId) -> f64 {
        self.edges[e.0].weight
    }

    pub fn build(self) -> Graph {
        let mut adjacency = vec![Vec::new(); self.n_nodes];
        for (i, e) in self.edges.iter().enumerate() {
            adjacency[e.u.0].push((e.v, EdgeId(i)));
            adjacency[e.v.0].push((e.u, EdgeId(i)));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n_nodes: self.n_nodes,
            edges: self.edges,
            adjacency,
            lookup: self.lookup,
        }
    }
}

/// Undirected graph with nonnegative weights. Adjacency lists are sorted by
/// neighbor id so every traversal is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    lookup: HashMap<(NodeId, NodeId), EdgeId>,
}

impl Graph {
    /// Builds a graph from `(u, v, w)` triples; edge ids follow iteration order.
    pub fn from_edges<I>(n_nodes: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut b = GraphBuilder::new(n_nodes);
        for (u, v, w) in edges {
            b.add_edge(NodeId(u), NodeId(v), w)?;
        }
        Ok(b.build())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n_nodes).map(NodeId)
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().enumerate().map(|(i, e)| (EdgeId(i), e))
    }

    pub fn weight(&self, e: EdgeId) -> f64 {
        self.edges[e.0].weight
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Neighbors of `u` with the connecting edge, sorted by neighbor id.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[u.0]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u.0].len()
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.lookup.get(&key(a, b)).copied()
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u.0 < self.n_nodes {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(u, self.n_nodes))
        }
    }

    /// Same topology and edge ids, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Graph> {
        if weights.len() != self.edges.len() {
            return Err(Error::arg(format!(
                "expected {} weights, got {}",
                self.edges.len(),
                weights.len()
            )));
        }
        for &w in &weights {
            check_weight(w)?;
        }
        let mut g = self.clone();
        for (e, w) in g.edges.iter_mut().zip(weights) {
            e.weight = w;
        }
        Ok(g)
    }
}

/// A simple path, stored as its node sequence plus the derived edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
}

impl Path {
    /// Validates adjacency and simplicity of `nodes` in `g`.
    pub fn from_nodes(g: &Graph, nodes: Vec<NodeId>) -> Result<Path> {
        if nodes.is_empty() {
            return Err(Error::InvalidPath("empty node sequence".into()));
        }
        let mut seen = vec![false; g.n_nodes()];
        for &u in &nodes {
            g.check_node(u)?;
            if std::mem::replace(&mut seen[u.0], true) {
                return Err(Error::InvalidPath(format!("node {u} repeats")));
            }
        }
        let edges = nodes
            .windows(2)
            .map(|w| {
                g.edge_between(w[0], w[1]).ok_or_else(|| {
                    Error::InvalidPath(format!("nodes {} and {} are not adjacent", w[0], w[1]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Path { nodes, edges })
    }

    pub fn from_indices(g: &Graph, nodes: &[usize]) -> Result<Path> {
        Path::from_nodes(g, nodes.iter().copied().map(NodeId).collect())
    }

    /// Trusted constructor for node sequences produced by the search routines.
    pub(crate) fn from_search(g: &Graph, nodes: Vec<NodeId>) -> Path {
        let edges = nodes
            .windows(2)
            .map(|w| g.edge_between(w[0], w[1]).expect("search produced non-adjacent nodes"))
            .collect();
        Path { nodes, edges }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    pub fn hops(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    /// Checks that every edge id refers to `g` and matches the node pairs.
    pub fn check_in(&self, g: &Graph) -> Result<()> {
        for (w, &e) in self.nodes.windows(2).zip(&self.edges) {
            if g.edge_between(w[0], w[1]) != Some(e) {
                return Err(Error::InvalidPath(format!(
                    "edge {e} does not join {} and {} in this graph",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, u) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "]")
    }
}

/// Nonnegative additive weight changes, one entry per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVector(Vec<f64>);

impl PerturbationVector {
    pub fn zeros(n_edges: usize) -> Self {
        PerturbationVector(vec![0.0; n_edges])
    }

    /// Rejects negative or non-finite entries.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::arg(format!("perturbation on e{i} is {v}; must be >= 0")));
        }
        Ok(PerturbationVector(values))
    }

    /// Wraps raw values without validation; used by diagnostics that need to
    /// inspect malformed vectors.
    pub fn from_raw(values: Vec<f64>) -> Self {
        PerturbationVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, e: EdgeId) -> f64 {
        self.0[e.0]
    }

    pub(crate) fn add(&mut self, e: EdgeId, amount: f64) {
        self.0[e.0] += amount;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Nonzero entries in edge-id order.
    pub fn support(&self) -> impl Iterator<Item = (EdgeId, f64)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (EdgeId(i), *v))
    }
}

pub(crate) fn check_delta_len(g: &Graph, delta: &PerturbationVector) -> Result<()> {
    if delta.len() != g.n_edges() {
        return Err(Error::arg(format!(
            "perturbation has {} entries, graph has {} edges",
            delta.len(),
            g.n_edges()
        )));
    }
    Ok(())
}

/// Length of `p` under `w + delta`, summed in traversal order.
pub fn path_length(g: &Graph, p: &Path, delta: Option<&PerturbationVector>) -> Result<f64> {
    p.check_in(g)?;
    if let Some(d) = delta {
        check_delta_len(g, d)?;
    }
    Ok(p.edge_ids().iter().fold(0.0, |acc, &e| {
        acc + (g.weight(e) + delta.map_or(0.0, |d| d.get(e)))
    }))
}

/// Per-edge cost `w(e) + delta(e)`. This is the single place edge costs are
/// formed, so that every length in the crate is summed identically.
pub(crate) fn edge_costs(g: &Graph, delta: Option<&PerturbationVector>) -> Result<Vec<f64>> {
    match delta {
        None => Ok(g.weights()),
        Some(d) => {
            check_delta_len(g, d)?;
            g.edges
                .iter()
                .zip(d.as_slice())
                .enumerate()
                .map(|(i, (e, &x))| {
                    let c = e.weight + x;
                    if c >= 0.0 && c.is_finite() {
                        Ok(c)
                    } else {
                        Err(Error::arg(format!("perturbed weight of e{i} is {c}")))
                    }
                })
                .collect()
        }
    }
}

/// Length of a node sequence under precomputed costs, traversal order.
pub(crate) fn seq_length(g: &Graph, costs: &[f64], nodes: &[NodeId]) -> f64 {
    nodes.windows(2).fold(0.0, |acc, w| {
        let e = g.edge_between(w[0], w[1]).expect("non-adjacent nodes in path");
        acc + costs[e.0]
    })
}
