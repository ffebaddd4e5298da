use std::collections::VecDeque;

use super::{Graph, GraphBuilder, NodeId};
use crate::error::{Error, Result};

/// A derived graph plus, for each of its nodes, the node id it had in the
/// parent graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Subgraph {
    pub graph: Graph,
    pub original: Vec<NodeId>,
}

impl Subgraph {
    pub fn to_original(&self, u: NodeId) -> NodeId {
        self.original[u.0]
    }

    /// Inverse of [`Subgraph::to_original`].
    pub fn from_original(&self, u: NodeId) -> Option<NodeId> {
        self.original.binary_search(&u).ok().map(NodeId)
    }
}

/// Unweighted hop distance from `s` to every node.
pub fn bfs_hops(g: &Graph, s: NodeId) -> Result<Vec<Option<usize>>> {
    g.check_node(s)?;
    let mut hops = vec![None; g.n_nodes()];
    hops[s.0] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let next = hops[u.0].unwrap() + 1;
        for &(v, _) in g.neighbors(u) {
            if hops[v.0].is_none() {
                hops[v.0] = Some(next);
                queue.push_back(v);
            }
        }
    }
    Ok(hops)
}

/// Induced subgraph on `keep`. Nodes are renumbered in increasing original id
/// order and edges keep their relative id order.
pub fn induced_subgraph(g: &Graph, keep: &[bool]) -> Subgraph {
    let original: Vec<NodeId> = g.nodes().filter(|u| keep[u.0]).collect();
    let mut new_id = vec![usize::MAX; g.n_nodes()];
    for (i, u) in original.iter().enumerate() {
        new_id[u.0] = i;
    }
    let mut b = GraphBuilder::new(original.len());
    for (_, e) in g.edges() {
        if keep[e.u.0] && keep[e.v.0] {
            b.add_edge(NodeId(new_id[e.u.0]), NodeId(new_id[e.v.0]), e.weight)
                .expect("induced edge is valid in parent");
        }
    }
    Subgraph {
        graph: b.build(),
        original,
    }
}

/// Connected components as node lists, ordered by their smallest node id.
fn components(g: &Graph) -> Vec<Vec<NodeId>> {
    let mut label = vec![false; g.n_nodes()];
    let mut out = Vec::new();
    for start in g.nodes() {
        if label[start.0] {
            continue;
        }
        label[start.0] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.neighbors(u) {
                if !label[v.0] {
                    label[v.0] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

pub fn is_connected(g: &Graph) -> bool {
    g.n_nodes() == 0 || components(g).len() == 1
}

/// Induced subgraph on the largest connected component. Equal-sized
/// components are resolved in favour of the one holding the lowest node id.
pub fn largest_connected_component(g: &Graph) -> Result<Subgraph> {
    if g.n_nodes() == 0 {
        return Err(Error::arg("graph has no nodes"));
    }
    let comps = components(g);
    let mut best = &comps[0];
    for c in &comps[1..] {
        if c.len() > best.len() {
            best = c;
        }
    }
    let mut keep = vec![false; g.n_nodes()];
    for u in best {
        keep[u.0] = true;
    }
    Ok(induced_subgraph(g, &keep))
}

/// Nodes whose hop distance from `s` is exactly `h`, in increasing id order.
pub fn nodes_at_hop_distance(g: &Graph, s: NodeId, h: usize) -> Result<Vec<NodeId>> {
    let hops = bfs_hops(g, s)?;
    Ok(g.nodes().filter(|u| hops[u.0] == Some(h)).collect())
}

/// Induced subgraph on nodes within `h` hops of `s`.
pub fn induced_subgraph_within_hops(g: &Graph, s: NodeId, h: usize) -> Result<Subgraph> {
    let hops = bfs_hops(g, s)?;
    let keep: Vec<bool> = hops.iter().map(|d| d.is_some_and(|d| d <= h)).collect();
    Ok(induced_subgraph(g, &keep))
}
