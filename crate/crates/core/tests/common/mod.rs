//! Independent oracles shared by the integration tests: exhaustive path
//! enumeration, brute-force LP vertex enumeration, an external LP solver,
//! and a random small-instance generator.
#![allow(dead_code)]

use forcepath::graph::{yen_k_shortest, EdgeId, Graph, NodeId, Path};
use forcepath::graphgen::{apply_weights, generate, GenSpec, GraphModel, WeightKind, WeightScheme};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every simple `s`→`t` path as `(length, nodes)`, lengths summed left to
/// right in traversal order. With `below`, only paths shorter than it
/// (costs are nonnegative, so prefixes are pruned). Sorted by
/// `(length, nodes)`.
pub fn enumerate_paths(g: &Graph, s: usize, t: usize, costs: &[f64], below: Option<f64>) -> Vec<(f64, Vec<usize>)> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.n_nodes()];
    for (id, e) in g.edges() {
        adj[e.u.0].push((e.v.0, id.0));
        adj[e.v.0].push((e.u.0, id.0));
    }
    let mut out = Vec::new();
    let mut on = vec![false; g.n_nodes()];
    let mut stack = vec![s];
    on[s] = true;
    dfs(&adj, costs, t, below, 0.0, &mut on, &mut stack, &mut out);
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    adj: &[Vec<(usize, usize)>],
    costs: &[f64],
    t: usize,
    below: Option<f64>,
    len: f64,
    on: &mut [bool],
    stack: &mut Vec<usize>,
    out: &mut Vec<(f64, Vec<usize>)>,
) {
    let u = *stack.last().unwrap();
    if u == t {
        out.push((len, stack.clone()));
        return;
    }
    for &(v, e) in &adj[u] {
        if on[v] {
            continue;
        }
        let next = len + costs[e];
        if below.is_some_and(|b| next >= b) {
            continue;
        }
        on[v] = true;
        stack.push(v);
        dfs(adj, costs, t, below, next, on, stack, out);
        stack.pop();
        on[v] = false;
    }
}

pub fn costs(g: &Graph, delta: Option<&[f64]>) -> Vec<f64> {
    g.edges()
        .map(|(id, e)| e.weight + delta.map_or(0.0, |d| d[id.0]))
        .collect()
}

pub fn node_ids(p: &Path) -> Vec<usize> {
    p.nodes().iter().map(|u| u.0).collect()
}

pub fn edge_of(g: &Graph, a: usize, b: usize) -> usize {
    g.edge_between(NodeId(a), NodeId(b)).expect("consecutive nodes are adjacent").0
}

/// Covering rows `sum_{e in S} x_e >= rhs` for every non-`pstar` path with
/// `w(p) < ell + buffer`, over edges not on `pstar`.
pub fn all_path_rows(g: &Graph, pstar: &Path, buffer: f64) -> Vec<(Vec<usize>, f64)> {
    let w = costs(g, None);
    let star = node_ids(pstar);
    let ell: f64 = star.windows(2).fold(0.0, |acc, p| acc + w[edge_of(g, p[0], p[1])]);
    let on_star: Vec<usize> = star.windows(2).map(|p| edge_of(g, p[0], p[1])).collect();
    let threshold = ell + buffer;
    enumerate_paths(g, star[0], *star.last().unwrap(), &w, Some(threshold))
        .into_iter()
        .filter(|(_, nodes)| *nodes != star)
        .map(|(len, nodes)| {
            let mut support: Vec<usize> = nodes
                .windows(2)
                .map(|p| edge_of(g, p[0], p[1]))
                .filter(|e| !on_star.contains(e))
                .collect();
            support.sort_unstable();
            (support, threshold - len)
        })
        .collect()
}

/// `min sum x` over the rows with an LP solver that shares no code with
/// this crate. `None` if infeasible.
pub fn external_lp(n_vars: usize, rows: &[(Vec<usize>, f64)]) -> Option<f64> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};
    if rows.is_empty() {
        return Some(0.0);
    }
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n_vars).map(|_| problem.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for (support, rhs) in rows {
        problem.add_constraint(support.iter().map(|&e| (vars[e], 1.0)).collect::<Vec<_>>().as_slice(), ComparisonOp::Ge, *rhs);
    }
    match problem.solve() {
        Ok(SolveOutcome::Solution(sol)) => Some(sol.objective()),
        _ => None,
    }
}

/// Optimal budget of the full path-enumeration LP.
pub fn exhaustive_optimum(g: &Graph, pstar: &Path, buffer: f64) -> f64 {
    let rows = all_path_rows(g, pstar, buffer);
    external_lp(g.n_edges(), &rows).expect("covering LP with nonempty supports is feasible")
}

/// `min sum x, A x >= b, x >= 0` by enumerating every basic solution: pick
/// `n` of the `m + n` constraints as equalities and solve. Rows are 0/1
/// coefficient supports.
pub fn vertex_lp(n: usize, rows: &[(Vec<usize>, f64)]) -> Option<f64> {
    let mut cons: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|(s, b)| {
            let mut a = vec![0.0; n];
            for &j in s {
                a[j] = 1.0;
            }
            (a, *b)
        })
        .collect();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        cons.push((a, 0.0));
    }
    if n == 0 {
        return cons.iter().all(|(_, b)| *b <= 0.0).then_some(0.0);
    }
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    choose(&cons, n, 0, &mut pick, &mut best);
    best
}

fn choose(cons: &[(Vec<f64>, f64)], n: usize, from: usize, pick: &mut Vec<usize>, best: &mut Option<f64>) {
    if pick.len() == n {
        if let Some(x) = solve_square(cons, pick, n) {
            let feasible = cons
                .iter()
                .all(|(a, b)| a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum::<f64>() >= b - 1e-9);
            if feasible {
                let obj: f64 = x.iter().sum();
                if best.is_none_or(|b| obj < b) {
                    *best = Some(obj);
                }
            }
        }
        return;
    }
    for i in from..cons.len() {
        pick.push(i);
        choose(cons, n, i + 1, pick, best);
        pick.pop();
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_square(cons: &[(Vec<f64>, f64)], pick: &[usize], n: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = pick
        .iter()
        .map(|&i| {
            let mut r = cons[i].0.clone();
            r.push(cons[i].1);
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[p][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// A small random attack instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub g: Graph,
    pub pstar: Path,
    pub rank: usize,
}

pub fn random_scheme(rng: &mut ChaCha8Rng) -> WeightKind {
    match rng.gen_range(0..3) {
        0 => WeightKind::Unit,
        1 => WeightKind::PoissonPlusOne { rate: 20.0 },
        _ => WeightKind::UniformInt { lo: 1, hi: 41 },
    }
}

pub fn random_small_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> (String, Graph) {
    loop {
        let model = match rng.gen_range(0..3) {
            0 => GraphModel::Er {
                n: rng.gen_range(6..=max_nodes),
                p: rng.gen_range(0.3..0.8),
            },
            1 => GraphModel::Complete {
                n: rng.gen_range(6..=max_nodes),
            },
            _ => {
                let shapes: Vec<(usize, usize)> =
                    [(2, 3), (2, 4), (2, 5), (3, 3), (3, 2), (4, 2)].into_iter().filter(|(r, c)| r * c <= max_nodes).collect();
                let (rows, cols) = shapes[rng.gen_range(0..shapes.len())];
                GraphModel::Lattice { rows, cols }
            }
        };
        let g = generate(&GenSpec {
            model: model.clone(),
            seed: rng.gen(),
        })
        .unwrap();
        if !forcepath::graph::is_connected(&g) {
            continue;
        }
        let kind = random_scheme(rng);
        let g = apply_weights(&g, &WeightScheme { kind, seed: rng.gen() }).unwrap();
        return (format!("{model} {kind}"), g);
    }
}

/// Random connected 6..=`max_nodes` graph with a target path of rank 2..=5.
pub fn random_instance(rng: &mut ChaCha8Rng, max_nodes: usize) -> Instance {
    loop {
        let (label, g) = random_small_graph(rng, max_nodes);
        let n = g.n_nodes();
        let s = rng.gen_range(0..n);
        let t = (s + rng.gen_range(1..n)) % n;
        let rank = rng.gen_range(2..=5);
        let mut paths = yen_k_shortest(&g, NodeId(s), NodeId(t), rank, None).unwrap();
        if paths.len() < rank {
            continue;
        }
        return Instance {
            label: format!("{label} s={s} t={t} rank={rank}"),
            pstar: paths.swap_remove(rank - 1),
            g,
            rank,
        };
    }
}

/// Exhaustive validity check: zero on `pstar` (exactly), nonnegative, and
/// every other simple path at least `ell + buffer - tol` under `w + delta`.
pub fn exhaustively_valid(g: &Graph, pstar: &Path, delta: &[f64], buffer: f64, tol: f64) -> Result<(), String> {
    for e in pstar.edge_ids() {
        if delta[e.0] != 0.0 {
            return Err(format!("pstar edge {e} perturbed by {}", delta[e.0]));
        }
    }
    if let Some((i, v)) = delta.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(format!("negative delta {v} on e{i}"));
    }
    let w = costs(g, None);
    let star = node_ids(pstar);
    let ell: f64 = star.windows(2).fold(0.0, |acc, p| acc + w[edge_of(g, p[0], p[1])]);
    let perturbed = costs(g, Some(delta));
    let bad: Vec<_> = enumerate_paths(g, star[0], *star.last().unwrap(), &perturbed, Some(ell + buffer - tol))
        .into_iter()
        .filter(|(_, nodes)| *nodes != star)
        .collect();
    match bad.first() {
        None => Ok(()),
        Some((len, nodes)) => Err(format!("path {nodes:?} has length {len} < {} - {tol}", ell + buffer)),
    }
}

pub fn edge_id(i: usize) -> EdgeId {
    EdgeId(i)
}
