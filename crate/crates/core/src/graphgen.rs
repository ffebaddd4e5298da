//! Seeded synthetic graph generators and edge-weight schemes.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with `seed_from_u64`,
//! so outputs are identical across platforms for the same spec. Weight
//! schemes use one ChaCha stream per edge id (`set_stream(edge_id)`), so an
//! edge's weight does not depend on how many edges precede it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_connected, Graph, GraphBuilder, NodeId};

/// Default initiator entries for the stochastic Kronecker model.
pub const KRON_A: f64 = 0.9;
pub const KRON_B: f64 = 0.6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    /// G(n, p).
    Er { n: usize, p: f64 },
    /// Preferential attachment from a star on `m_attach + 1` nodes.
    Ba { n: usize, m_attach: usize },
    /// Ring lattice of even degree `k_degree`, each edge rewired with `p_rewire`.
    Ws { n: usize, k_degree: usize, p_rewire: f64 },
    /// Stochastic Kronecker with initiator `[[a, b], [b, c]]`; `c` is chosen
    /// so the expected edge count is `density * n^2 / 2`.
    Kron {
        log2_n: u32,
        density: f64,
        #[serde(default = "default_kron_a")]
        a: f64,
        #[serde(default = "default_kron_b")]
        b: f64,
    },
    Lattice { rows: usize, cols: usize },
    Complete { n: usize },
}

fn default_kron_a() -> f64 {
    KRON_A
}

fn default_kron_b() -> f64 {
    KRON_B
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub model: GraphModel,
    pub seed: u64,
}

impl GraphModel {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::arg(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        match *self {
            GraphModel::Er { p, .. } => prob("p", p),
            GraphModel::Ba { n, m_attach } => {
                if m_attach == 0 || m_attach >= n {
                    return Err(Error::arg(format!("BA needs 1 <= m_attach < n, got m_attach={m_attach}, n={n}")));
                }
                Ok(())
            }
            GraphModel::Ws { n, k_degree, p_rewire } => {
                if k_degree % 2 != 0 || k_degree == 0 || k_degree >= n {
                    return Err(Error::arg(format!("WS needs an even 0 < k_degree < n, got {k_degree} with n={n}")));
                }
                prob("p_rewire", p_rewire)
            }
            GraphModel::Kron { log2_n, density, a, b } => {
                if log2_n == 0 || log2_n > 24 {
                    return Err(Error::arg(format!("log2_n must be in 1..=24, got {log2_n}")));
                }
                prob("density", density)?;
                prob("a", a)?;
                prob("b", b)?;
                kron_c(log2_n, density, a, b).map(|_| ())
            }
            GraphModel::Lattice { rows, cols } => {
                if rows == 0 || cols == 0 {
                    return Err(Error::arg("lattice needs rows, cols >= 1"));
                }
                Ok(())
            }
            GraphModel::Complete { .. } => Ok(()),
        }
    }

    pub fn n_nodes(&self) -> usize {
        match *self {
            GraphModel::Er { n, .. } | GraphModel::Ba { n, .. } | GraphModel::Ws { n, .. } => n,
            GraphModel::Complete { n } => n,
            GraphModel::Kron { log2_n, .. } => 1 << log2_n,
            GraphModel::Lattice { rows, cols } => rows * cols,
        }
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphModel::Er { n, p } => write!(f, "er(n={n},p={p})"),
            GraphModel::Ba { n, m_attach } => write!(f, "ba(n={n},m={m_attach})"),
            GraphModel::Ws { n, k_degree, p_rewire } => write!(f, "ws(n={n},k={k_degree},p={p_rewire})"),
            GraphModel::Kron { log2_n, density, a, b } => {
                write!(f, "kron(log2_n={log2_n},density={density},a={a},b={b})")
            }
            GraphModel::Lattice { rows, cols } => write!(f, "lattice({rows}x{cols})"),
            GraphModel::Complete { n } => write!(f, "complete(n={n})"),
        }
    }
}

/// The `c` entry making `(a + 2b + c)^k = density * 4^k`, i.e. expected
/// total probability mass `density * n^2`.
pub fn kron_c(log2_n: u32, density: f64, a: f64, b: f64) -> Result<f64> {
    let c = 4.0 * density.powf(1.0 / log2_n as f64) - a - 2.0 * b;
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::arg(format!(
            "no valid Kronecker initiator: density {density} at log2_n={log2_n} needs c={c:.4} with a={a}, b={b}"
        )));
    }
    Ok(c)
}

/// Expected number of undirected edges of the Kronecker model (self-pairs excluded).
pub fn kron_expected_edges(log2_n: u32, density: f64, a: f64, b: f64) -> Result<f64> {
    let c = kron_c(log2_n, density, a, b)?;
    let k = log2_n as i32;
    Ok(((a + 2.0 * b + c).powi(k) - (a + c).powi(k)) / 2.0)
}

/// Generates the unweighted (all weights 1) graph described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<Graph> {
    spec.model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.model {
        GraphModel::Er { n, p } => Ok(erdos_renyi(n, p, &mut rng)),
        GraphModel::Ba { n, m_attach } => Ok(barabasi_albert(n, m_attach, &mut rng)),
        GraphModel::Ws { n, k_degree, p_rewire } => {
            // Regenerate from seed+1, seed+2, ... if rewiring disconnects the ring.
            for attempt in 0..=10u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt));
                let g = watts_strogatz(n, k_degree, p_rewire, &mut rng);
                if is_connected(&g) {
                    return Ok(g);
                }
            }
            Err(Error::arg(format!(
                "WS graph still disconnected after 10 regenerations from seed {}",
                spec.seed
            )))
        }
        GraphModel::Kron { log2_n, density, a, b } => {
            let c = kron_c(log2_n, density, a, b)?;
            Ok(kronecker(log2_n, [a, b, c], &mut rng))
        }
        GraphModel::Lattice { rows, cols } => Ok(lattice(rows, cols)),
        GraphModel::Complete { n } => Ok(complete(n)),
    }
}

/// Geometric skipping over the `n(n-1)/2` pairs in `(v, w)` with `w < v` order.
fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut b = GraphBuilder::new(n);
    if p <= 0.0 || n < 2 {
        return b.build();
    }
    if p >= 1.0 {
        return complete(n);
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.gen();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            b.add_edge(NodeId(w as usize), NodeId(v), 1.0).unwrap();
        }
    }
    b.build()
}

fn barabasi_albert(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut b = GraphBuilder::with_capacity(n, (n - m) * m);
    // Each node appears once per incident edge.
    let mut ends: Vec<usize> = Vec::with_capacity(2 * (n - m) * m);
    for leaf in 1..=m {
        b.add_edge(NodeId(0), NodeId(leaf), 1.0).unwrap();
        ends.extend([0, leaf]);
    }
    let mut targets = Vec::with_capacity(m);
    for new in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = ends[rng.gen_range(0..ends.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            b.add_edge(NodeId(new), NodeId(t), 1.0).unwrap();
            ends.extend([new, t]);
        }
    }
    b.build()
}

fn watts_strogatz(n: usize, k: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let half = k / 2;
    let mut adj = vec![std::collections::BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=half {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    // Rewire (u, u+j) to (u, w) in the same sweep order as the classic model.
    for j in 1..=half {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.gen::<f64>() >= p {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            if adj[u].contains(&v) {
                adj[u].remove(&v);
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
    }
    let mut b = GraphBuilder::new(n);
    for (u, list) in adj.iter().enumerate() {
        for &v in list.range(u + 1..) {
            b.add_edge(NodeId(u), NodeId(v), 1.0).unwrap();
        }
    }
    b.build()
}

/// Exact per-pair Bernoulli sampling. With initiator `[[a, b], [b, c]]` the
/// pair probability is `a^{#bits both 0} * b^{#bits differing} * c^{#bits both 1}`.
fn kronecker(log2_n: u32, [a, b, c]: [f64; 3], rng: &mut ChaCha8Rng) -> Graph {
    let n = 1usize << log2_n;
    let k = log2_n as usize;
    let pow = |x: f64| (0..=k).map(|i| x.powi(i as i32)).collect::<Vec<_>>();
    let (pa, pb, pc) = (pow(a), pow(b), pow(c));
    let mut builder = GraphBuilder::new(n);
    for u in 0..n {
        for v in u + 1..n {
            let ones = (u & v).count_ones() as usize;
            let diff = (u ^ v).count_ones() as usize;
            let zeros = k - ones - diff;
            let p = pa[zeros] * pb[diff] * pc[ones];
            if rng.gen::<f64>() < p {
                builder.add_edge(NodeId(u), NodeId(v), 1.0).unwrap();
            }
        }
    }
    builder.build()
}

/// Row-major grid with edges to the right and down neighbors.
fn lattice(rows: usize, cols: usize) -> Graph {
    let mut b = GraphBuilder::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let u = r * cols + c;
            if c + 1 < cols {
                b.add_edge(NodeId(u), NodeId(u + 1), 1.0).unwrap();
            }
            if r + 1 < rows {
                b.add_edge(NodeId(u), NodeId(u + cols), 1.0).unwrap();
            }
        }
    }
    b.build()
}

fn complete(n: usize) -> Graph {
    let mut b = GraphBuilder::with_capacity(n, n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            b.add_edge(NodeId(u), NodeId(v), 1.0).unwrap();
        }
    }
    b.build()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Unit,
    PoissonPlusOne { rate: f64 },
    UniformInt { lo: u32, hi: u32 },
}

impl WeightKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightKind::Unit => Ok(()),
            WeightKind::PoissonPlusOne { rate } => {
                if rate > 0.0 && rate <= 500.0 {
                    Ok(())
                } else {
                    Err(Error::arg(format!("Poisson rate must lie in (0, 500], got {rate}")))
                }
            }
            WeightKind::UniformInt { lo, hi } => {
                if 1 <= lo && lo <= hi {
                    Ok(())
                } else {
                    Err(Error::arg(format!("uniform weights need 1 <= lo <= hi, got {lo}..{hi}")))
                }
            }
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Unit => f.write_str("unit"),
            WeightKind::PoissonPlusOne { rate } => write!(f, "poisson:{rate}"),
            WeightKind::UniformInt { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

/// Parses `unit`, `poisson:RATE`, `uniform:LO:HI`.
impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::arg(format!("bad weight scheme `{s}`; expected unit, poisson:RATE or uniform:LO:HI"));
        let kind = match parts.as_slice() {
            ["unit"] => WeightKind::Unit,
            ["poisson", rate] => WeightKind::PoissonPlusOne {
                rate: rate.parse().map_err(|_| bad())?,
            },
            ["uniform", lo, hi] => WeightKind::UniformInt {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    #[serde(flatten)]
    pub kind: WeightKind,
    pub seed: u64,
}

/// Poisson(rate) by sequential search on the CDF.
fn poisson_inversion(rate: f64, rng: &mut ChaCha8Rng) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-rate).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= rate / k as f64;
        let next = cdf + p;
        if next == cdf {
            // Tail mass below f64 resolution.
            break;
        }
        cdf = next;
    }
    k
}

/// Replaces every weight according to `scheme`.
pub fn apply_weights(g: &Graph, scheme: &WeightScheme) -> Result<Graph> {
    scheme.kind.validate()?;
    let base = ChaCha8Rng::seed_from_u64(scheme.seed);
    let weights = (0..g.n_edges())
        .map(|i| {
            let mut rng = base.clone();
            rng.set_stream(i as u64);
            match scheme.kind {
                WeightKind::Unit => 1.0,
                WeightKind::PoissonPlusOne { rate } => (poisson_inversion(rate, &mut rng) + 1) as f64,
                WeightKind::UniformInt { lo, hi } => rng.gen_range(lo..=hi) as f64,
            }
        })
        .collect();
    g.with_weights(weights)
}

/// `w' = 1 / w`, for similarity-weighted inputs.
pub fn invert_weights(g: &Graph) -> Result<Graph> {
    let weights = g
        .edges()
        .map(|(id, e)| {
            if e.weight > 0.0 {
                Ok(1.0 / e.weight)
            } else {
                Err(Error::arg(format!("cannot invert zero weight on {id}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    g.with_weights(weights)
}
