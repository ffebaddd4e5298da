//! Shortest and k-shortest simple paths.
//!
//! Ties are resolved deterministically: among paths of equal length the one
//! with the lexicographically smallest node sequence wins, and the priority
//! queue breaks equal distances by smaller node id. Lengths are compared
//! exactly as computed (left-to-right sums of `w + delta`), with no epsilon.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet, VecDeque};

use super::{edge_costs, seq_length, Graph, NodeId, Path, PerturbationVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
struct Scored(f64, NodeId);

impl Eq for Scored {}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Nodes and edges a search may not use.
struct Restrictions {
    nodes: Vec<bool>,
    edges: Vec<bool>,
}

impl Restrictions {
    fn none(g: &Graph) -> Self {
        Restrictions {
            nodes: vec![false; g.n_nodes()],
            edges: vec![false; g.n_edges()],
        }
    }

    fn clear(&mut self) {
        self.nodes.fill(false);
        self.edges.fill(false);
    }
}

/// Lexicographically smallest minimum-cost simple path from `s` to `t`
/// avoiding the restricted nodes and edges.
fn lexmin_shortest(
    g: &Graph,
    costs: &[f64],
    s: NodeId,
    t: NodeId,
    banned: &Restrictions,
) -> Option<Vec<NodeId>> {
    if s == t {
        return Some(vec![s]);
    }
    let n = g.n_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut bound = f64::INFINITY;

    dist[s.0] = 0.0;
    heap.push(Reverse(Scored(0.0, s)));
    while let Some(Reverse(Scored(d, u))) = heap.pop() {
        if settled[u.0] {
            continue;
        }
        if d > bound {
            break;
        }
        settled[u.0] = true;
        if u == t {
            bound = d;
            continue;
        }
        for &(v, e) in g.neighbors(u) {
            if banned.nodes[v.0] || banned.edges[e.0] || settled[v.0] {
                continue;
            }
            let nd = d + costs[e.0];
            if nd < dist[v.0] {
                dist[v.0] = nd;
                heap.push(Reverse(Scored(nd, v)));
            }
        }
    }
    if !settled[t.0] {
        return None;
    }

    // Every node with dist <= dist[t] is settled, so tightness of an edge is
    // exact on the subgraph that can carry a shortest path.
    let tight = |u: NodeId, v: NodeId, c: f64| settled[u.0] && settled[v.0] && dist[u.0] + c == dist[v.0];

    let mut reaches_t = vec![false; n];
    let mut zero_tight = false;
    let mut queue = VecDeque::from([t]);
    reaches_t[t.0] = true;
    while let Some(v) = queue.pop_front() {
        for &(u, e) in g.neighbors(v) {
            if banned.nodes[u.0] || banned.edges[e.0] {
                continue;
            }
            let c = costs[e.0];
            if tight(u, v, c) {
                zero_tight |= c == 0.0;
                if !reaches_t[u.0] {
                    reaches_t[u.0] = true;
                    queue.push_back(u);
                }
            }
        }
    }

    // Greedy walk picking the smallest next node that still completes to t.
    // Without zero-cost tight edges the tight subgraph is acyclic and any tight
    // walk is simple; otherwise completion is rechecked avoiding visited nodes.
    let mut visited = vec![false; n];
    let mut path = vec![s];
    visited[s.0] = true;
    let mut cur = s;
    while cur != t {
        let next = g.neighbors(cur).iter().find_map(|&(v, e)| {
            let usable = !banned.nodes[v.0]
                && !banned.edges[e.0]
                && !visited[v.0]
                && reaches_t[v.0]
                && tight(cur, v, costs[e.0]);
            if !usable {
                return None;
            }
            if zero_tight && !tight_reachable(g, costs, &tight, banned, &visited, v, t) {
                return None;
            }
            Some(v)
        })?;
        visited[next.0] = true;
        path.push(next);
        cur = next;
    }
    Some(path)
}

fn tight_reachable<F>(
    g: &Graph,
    costs: &[f64],
    tight: &F,
    banned: &Restrictions,
    visited: &[bool],
    from: NodeId,
    t: NodeId,
) -> bool
where
    F: Fn(NodeId, NodeId, f64) -> bool,
{
    let mut seen = visited.to_vec();
    seen[from.0] = true;
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        if u == t {
            return true;
        }
        for &(v, e) in g.neighbors(u) {
            if !seen[v.0] && !banned.nodes[v.0] && !banned.edges[e.0] && tight(u, v, costs[e.0]) {
                seen[v.0] = true;
                stack.push(v);
            }
        }
    }
    false
}

/// Minimum-length `s`→`t` path under `w + delta`, or `None` when `t` is
/// unreachable. Among equal-length paths the lexicographically smallest
/// node sequence is returned.
pub fn dijkstra(
    g: &Graph,
    s: NodeId,
    t: NodeId,
    delta: Option<&PerturbationVector>,
) -> Result<Option<Path>> {
    g.check_node(s)?;
    g.check_node(t)?;
    let costs = edge_costs(g, delta)?;
    let banned = Restrictions::none(g);
    Ok(lexmin_shortest(g, &costs, s, t, &banned).map(|nodes| Path::from_search(g, nodes)))
}

#[derive(Clone, PartialEq)]
struct Candidate {
    length: f64,
    nodes: Vec<NodeId>,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.length
            .total_cmp(&other.length)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// State of a Yen enumeration: accepted paths, the candidate pool, and the
/// set of every node sequence ever produced.
struct Yen<'g> {
    g: &'g Graph,
    costs: Vec<f64>,
    t: NodeId,
    accepted: Vec<Candidate>,
    pool: BinaryHeap<Reverse<Candidate>>,
    seen: HashSet<Vec<NodeId>>,
    banned: Restrictions,
}

impl<'g> Yen<'g> {
    fn new(g: &'g Graph, costs: Vec<f64>, t: NodeId) -> Self {
        Yen {
            g,
            costs,
            t,
            accepted: Vec::new(),
            pool: BinaryHeap::new(),
            seen: HashSet::new(),
            banned: Restrictions::none(g),
        }
    }

    fn accept(&mut self, c: Candidate) {
        self.seen.insert(c.nodes.clone());
        self.accepted.push(c);
    }

    /// Pushes the spur candidates of the most recently accepted path.
    fn expand_last(&mut self) {
        let prev = self.accepted.last().expect("nothing accepted").nodes.clone();
        for i in 0..prev.len().saturating_sub(1) {
            let root = &prev[..=i];
            self.banned.clear();
            for node in &root[..i] {
                self.banned.nodes[node.0] = true;
            }
            for a in &self.accepted {
                if a.nodes.len() > i + 1 && &a.nodes[..=i] == root {
                    let e = self.g.edge_between(a.nodes[i], a.nodes[i + 1]).unwrap();
                    self.banned.edges[e.0] = true;
                }
            }
            let Some(spur) = lexmin_shortest(self.g, &self.costs, prev[i], self.t, &self.banned)
            else {
                continue;
            };
            let mut nodes = root[..i].to_vec();
            nodes.extend(spur);
            if self.seen.insert(nodes.clone()) {
                let length = seq_length(self.g, &self.costs, &nodes);
                self.pool.push(Reverse(Candidate { length, nodes }));
            }
        }
    }

    fn pop_best(&mut self) -> Option<Candidate> {
        self.pool.pop().map(|Reverse(c)| c)
    }
}

/// Up to `k` shortest simple `s`→`t` paths in nondecreasing length order,
/// ties by lexicographic node sequence.
pub fn yen_k_shortest(
    g: &Graph,
    s: NodeId,
    t: NodeId,
    k: usize,
    delta: Option<&PerturbationVector>,
) -> Result<Vec<Path>> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    g.check_node(s)?;
    g.check_node(t)?;
    let costs = edge_costs(g, delta)?;
    let Some(first) = lexmin_shortest(g, &costs, s, t, &Restrictions::none(g)) else {
        return Ok(Vec::new());
    };
    let mut yen = Yen::new(g, costs, t);
    let length = seq_length(g, &yen.costs, &first);
    yen.accept(Candidate { length, nodes: first });
    while yen.accepted.len() < k {
        yen.expand_last();
        match yen.pop_best() {
            Some(c) => yen.accept(c),
            None => break,
        }
    }
    Ok(yen
        .accepted
        .into_iter()
        .map(|c| Path::from_search(g, c.nodes))
        .collect())
}

/// Shortest simple `s`→`t` path other than `pstar` under `w + delta`, or
/// `None` when `pstar` is the only one.
///
/// One round of spur deviations from `pstar` covers every other simple path,
/// so this does not require `pstar` to be shortest.
pub fn second_shortest_excluding(
    g: &Graph,
    pstar: &Path,
    delta: Option<&PerturbationVector>,
) -> Result<Option<Path>> {
    pstar.check_in(g)?;
    let costs = edge_costs(g, delta)?;
    let mut yen = Yen::new(g, costs, pstar.target());
    let length = seq_length(g, &yen.costs, pstar.nodes());
    yen.accept(Candidate {
        length,
        nodes: pstar.nodes().to_vec(),
    });
    yen.expand_last();
    Ok(yen.pop_best().map(|c| Path::from_search(g, c.nodes)))
}
