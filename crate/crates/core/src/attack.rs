//! Attack algorithms: constraint-generation LP (`pathperturb`) and the two
//! greedy baselines.
//!
//! All three keep the protected path's edges at exactly zero perturbation
//! and stop once every other simple `s`→`t` path is at least `ℓ + δ`
//! (up to the oracle slack `eps`).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_delta_len, path_length, EdgeId, Graph, Path, PerturbationVector};
use crate::lp::{self, LpStatus};
use crate::oracle::{check_protected, constraint_oracle, DEFAULT_EPS};

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pathperturb,
    GreedyFirst,
    GreedyMin,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Pathperturb, Algorithm::GreedyFirst, Algorithm::GreedyMin];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Pathperturb => "pathperturb",
            Algorithm::GreedyFirst => "greedy_first",
            Algorithm::GreedyMin => "greedy_min",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pathperturb" => Ok(Algorithm::Pathperturb),
            "greedy_first" | "greedy-first" => Ok(Algorithm::GreedyFirst),
            "greedy_min" | "greedy-min" => Ok(Algorithm::GreedyMin),
            other => Err(Error::arg(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    /// Required margin `δ` between `pstar` and every other path.
    pub buffer: f64,
    pub eps: f64,
    /// Budget the adversary can afford; checked after minimization.
    pub budget_cap: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl AttackConfig {
    pub fn with_buffer(buffer: f64) -> Self {
        AttackConfig {
            buffer,
            ..AttackConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.buffer >= 0.0 && self.buffer.is_finite()) {
            return Err(Error::arg(format!("buffer must be >= 0, got {}", self.buffer)));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::arg(format!("eps must be >= 0, got {}", self.eps)));
        }
        Ok(())
    }

    fn iteration_limit(&self) -> usize {
        self.max_iterations.unwrap_or(DEFAULT_MAX_ITERATIONS)
    }
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            buffer: 1.0,
            eps: DEFAULT_EPS,
            budget_cap: None,
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackResult {
    pub delta: PerturbationVector,
    pub budget: f64,
    /// LP solves for `pathperturb`; edge raises for the greedy baselines.
    pub iterations: usize,
    /// Rows added by constraint generation; zero for the baselines.
    pub constraints_generated: usize,
    pub wall_time: Duration,
    pub algorithm: Algorithm,
    /// Converged within the iteration limit and, if a cap is set, within budget.
    pub success: bool,
    /// LP objective after each solve (`pathperturb` only).
    pub objective_trace: Vec<f64>,
}

/// Runs `algo` on `(g, pstar)`.
pub fn run(algo: Algorithm, g: &Graph, pstar: &Path, cfg: &AttackConfig) -> Result<AttackResult> {
    match algo {
        Algorithm::Pathperturb => pathperturb(g, pstar, cfg),
        Algorithm::GreedyFirst => greedy_first(g, pstar, cfg),
        Algorithm::GreedyMin => greedy_min(g, pstar, cfg),
    }
}

fn within_cap(cfg: &AttackConfig, budget: f64) -> bool {
    cfg.budget_cap.is_none_or(|b| budget <= b)
}

/// Constraint generation: solve the LP over the rows found so far, apply the
/// solution, ask the oracle for the most violated path, repeat until none.
///
/// `pstar` itself is never added as a row: with its edges eliminated it
/// carries no variables, so the first solve is over zero rows (`Δ = 0`) and
/// the first oracle call yields the first real constraint.
pub fn pathperturb(g: &Graph, pstar: &Path, cfg: &AttackConfig) -> Result<AttackResult> {
    cfg.validate()?;
    pstar.check_in(g)?;
    let start = Instant::now();
    let limit = cfg.iteration_limit();

    let mut paths: Vec<Path> = Vec::new();
    let mut seen: HashSet<Path> = HashSet::new();
    let mut trace = Vec::new();
    let mut delta;
    let converged;
    loop {
        let model = lp::build_model(g, pstar, &paths, cfg.buffer)?;
        let sol = lp::solve_default(&model)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Internal(format!(
                "perturbation LP reported {:?} with {} rows",
                sol.status,
                model.rows().len()
            )));
        }
        delta = sol.delta;
        trace.push(sol.objective_value);
        if trace.len() >= limit {
            // Final answer still has to be checked below.
            let r = constraint_oracle(g, &delta, pstar, cfg.buffer, cfg.eps)?;
            converged = r.is_empty();
            break;
        }
        let r = constraint_oracle(g, &delta, pstar, cfg.buffer, cfg.eps)?;
        let Some(p) = r.path else {
            converged = true;
            break;
        };
        if !seen.insert(p.clone()) {
            return Err(Error::Internal(format!(
                "oracle returned {p} again (length {}) after it was already a row",
                r.perturbed_length
            )));
        }
        paths.push(p);
    }
    let budget = delta.total();
    Ok(AttackResult {
        budget,
        iterations: trace.len(),
        constraints_generated: paths.len(),
        wall_time: start.elapsed(),
        algorithm: Algorithm::Pathperturb,
        success: converged && within_cap(cfg, budget),
        objective_trace: trace,
        delta,
    })
}

/// Raises the first edge of the violating path that is not on `pstar`.
pub fn greedy_first(g: &Graph, pstar: &Path, cfg: &AttackConfig) -> Result<AttackResult> {
    greedy(g, pstar, cfg, Algorithm::GreedyFirst, |p, _, protected| {
        p.edge_ids().iter().copied().find(|e| !protected.contains(e))
    })
}

/// Raises the lightest (current perturbed weight) edge of the violating path
/// that is not on `pstar`; ties go to the smaller edge id.
pub fn greedy_min(g: &Graph, pstar: &Path, cfg: &AttackConfig) -> Result<AttackResult> {
    greedy(g, pstar, cfg, Algorithm::GreedyMin, |p, cost, protected| {
        p.edge_ids()
            .iter()
            .copied()
            .filter(|e| !protected.contains(e))
            .min_by(|&a, &b| cost(a).total_cmp(&cost(b)).then(a.cmp(&b)))
    })
}

fn greedy<F>(g: &Graph, pstar: &Path, cfg: &AttackConfig, algorithm: Algorithm, select: F) -> Result<AttackResult>
where
    F: Fn(&Path, &dyn Fn(EdgeId) -> f64, &HashSet<EdgeId>) -> Option<EdgeId>,
{
    cfg.validate()?;
    pstar.check_in(g)?;
    let start = Instant::now();
    let limit = cfg.iteration_limit();
    let ell = path_length(g, pstar, None)?;
    let target = ell + cfg.buffer;
    let protected: HashSet<EdgeId> = pstar.edge_ids().iter().copied().collect();

    let mut delta = PerturbationVector::zeros(g.n_edges());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < limit {
        let r = constraint_oracle(g, &delta, pstar, cfg.buffer, cfg.eps)?;
        let Some(p) = r.path else {
            converged = true;
            break;
        };
        let current = &delta;
        let cost = |e: EdgeId| g.weight(e) + current.get(e);
        let e = select(&p, &cost, &protected).ok_or_else(|| {
            Error::Internal(format!("violating path {p} lies entirely on the protected path"))
        })?;
        let before = r.perturbed_length;
        delta.add(e, target - before);
        iterations += 1;

        let after = path_length(g, &p, Some(&delta))?;
        if !(after > before && (after - target).abs() <= 1e-9 * target.abs().max(1.0)) {
            return Err(Error::Internal(format!(
                "raising {e} moved {p} from {before} to {after}, expected {target}"
            )));
        }
    }
    if !converged {
        converged = constraint_oracle(g, &delta, pstar, cfg.buffer, cfg.eps)?.is_empty();
    }
    let budget = delta.total();
    Ok(AttackResult {
        budget,
        iterations,
        constraints_generated: 0,
        wall_time: start.elapsed(),
        algorithm,
        success: converged && within_cap(cfg, budget),
        objective_trace: Vec::new(),
        delta,
    })
}

/// `w' = w + delta` on a copy of `g`.
pub fn apply_perturbation(g: &Graph, delta: &PerturbationVector) -> Result<Graph> {
    check_delta_len(g, delta)?;
    if let Some((i, v)) = delta.as_slice().iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::arg(format!("perturbation on e{i} is {v}; must be >= 0")));
    }
    let weights = g
        .weights()
        .into_iter()
        .zip(delta.as_slice())
        .map(|(w, d)| w + d)
        .collect();
    g.with_weights(weights)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    NegativePerturbation { edge: EdgeId, value: f64 },
    PerturbedProtectedEdge { edge: EdgeId, value: f64 },
    ViolatingPath { path: Path, length: f64, threshold: f64 },
    Malformed(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NegativePerturbation { edge, value } => {
                write!(f, "negative perturbation {value} on {edge}")
            }
            Diagnostic::PerturbedProtectedEdge { edge, value } => {
                write!(f, "perturbed protected edge {edge} by {value}")
            }
            Diagnostic::ViolatingPath { path, length, threshold } => {
                write!(f, "path {path} has length {length} < {threshold}")
            }
            Diagnostic::Malformed(msg) => f.write_str(msg),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Checks that `delta` is a valid attack: nonnegative, zero on `pstar`, and
/// leaving no other simple path shorter than `ℓ + buffer - eps`.
pub fn verify_attack(g: &Graph, pstar: &Path, delta: &PerturbationVector, buffer: f64, eps: f64) -> Verification {
    let mut diagnostics = Vec::new();
    if let Err(e) = pstar.check_in(g) {
        diagnostics.push(Diagnostic::Malformed(e.to_string()));
    } else if let Err(e) = check_delta_len(g, delta) {
        diagnostics.push(Diagnostic::Malformed(e.to_string()));
    }
    if !diagnostics.is_empty() {
        return Verification { ok: false, diagnostics };
    }
    for (i, &v) in delta.as_slice().iter().enumerate() {
        if !(v >= 0.0) {
            diagnostics.push(Diagnostic::NegativePerturbation { edge: EdgeId(i), value: v });
        }
    }
    if let Err(Error::ProtectedEdgePerturbed { edge, value }) = check_protected(pstar, delta) {
        diagnostics.push(Diagnostic::PerturbedProtectedEdge { edge, value });
    }
    if diagnostics.is_empty() {
        match constraint_oracle(g, delta, pstar, buffer, eps) {
            Ok(r) => {
                if let Some(path) = r.path {
                    let ell = path_length(g, pstar, None).unwrap_or(f64::NAN);
                    diagnostics.push(Diagnostic::ViolatingPath {
                        path,
                        length: r.perturbed_length,
                        threshold: ell + buffer,
                    });
                }
            }
            Err(e) => diagnostics.push(Diagnostic::Malformed(e.to_string())),
        }
    }
    Verification {
        ok: diagnostics.is_empty(),
        diagnostics,
    }
}
