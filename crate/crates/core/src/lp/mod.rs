//! The minimum-budget perturbation LP.
//!
//! For a protected path `pstar` of unperturbed length `ℓ`, buffer `δ`, and a
//! set of other `s`→`t` paths, the model is
//!
//! ```text
//! minimize   Σ Δ(e)
//! subject to Σ_{e ∈ p} Δ(e) >= ℓ + δ - w(p)   for each constraint path p
//!            Δ >= 0,  Δ(e) = 0 for e on pstar
//! ```
//!
//! Edges of `pstar` are eliminated from the model rather than pinned by an
//! equality row, so the returned perturbation is exactly zero on them.

pub mod simplex;

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::graph::{path_length, EdgeId, Graph, Path, PerturbationVector};
use simplex::{minimize, SimplexOptions, SimplexStatus};

pub const DEFAULT_EPS_FEAS: f64 = 1e-9;
pub const DEFAULT_EPS_PIVOT: f64 = 1e-10;

/// `Σ_{e ∈ support} Δ(e) >= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub support: Vec<EdgeId>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    n_vars: usize,
    fixed_zero: BTreeSet<EdgeId>,
    rows: Vec<LpRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub delta: PerturbationVector,
    pub objective_value: f64,
    pub pivots: usize,
}

/// The row a single constraint path contributes, before trivially satisfied
/// rows are discarded.
pub fn path_row(g: &Graph, pstar: &Path, path: &Path, buffer: f64) -> Result<LpRow> {
    if path == pstar {
        return Err(Error::arg("constraint path equals the protected path"));
    }
    if path.source() != pstar.source() || path.target() != pstar.target() {
        return Err(Error::arg(format!(
            "constraint path {path} does not share endpoints with {pstar}"
        )));
    }
    let ell = path_length(g, pstar, None)?;
    let w = path_length(g, path, None)?;
    let mut support: Vec<EdgeId> = path
        .edge_ids()
        .iter()
        .copied()
        .filter(|e| !pstar.contains_edge(*e))
        .collect();
    support.sort_unstable();
    Ok(LpRow {
        support,
        rhs: (ell + buffer) - w,
    })
}

/// Builds the model for `constraint_paths`. Rows with `rhs <= 0` hold at
/// `Δ = 0` and are left out.
pub fn build_model(g: &Graph, pstar: &Path, constraint_paths: &[Path], buffer: f64) -> Result<LpModel> {
    if !(buffer >= 0.0 && buffer.is_finite()) {
        return Err(Error::arg(format!("buffer must be >= 0, got {buffer}")));
    }
    pstar.check_in(g)?;
    let mut rows = Vec::with_capacity(constraint_paths.len());
    for p in constraint_paths {
        let row = path_row(g, pstar, p, buffer)?;
        if row.rhs > 0.0 {
            rows.push(row);
        }
    }
    Ok(LpModel {
        n_vars: g.n_edges(),
        fixed_zero: pstar.edge_ids().iter().copied().collect(),
        rows,
    })
}

impl LpModel {
    /// Assembles a model directly from rows. Fixed variables are removed from
    /// each row's support.
    pub fn from_rows(n_vars: usize, fixed_zero: impl IntoIterator<Item = EdgeId>, rows: Vec<LpRow>) -> Result<Self> {
        let fixed_zero: BTreeSet<EdgeId> = fixed_zero.into_iter().collect();
        let mut clean = Vec::with_capacity(rows.len());
        for mut row in rows {
            if !row.rhs.is_finite() {
                return Err(Error::arg("row rhs must be finite"));
            }
            if let Some(e) = row.support.iter().find(|e| e.0 >= n_vars) {
                return Err(Error::arg(format!("row references {e} but model has {n_vars} variables")));
            }
            row.support.retain(|e| !fixed_zero.contains(e));
            row.support.sort_unstable();
            row.support.dedup();
            clean.push(row);
        }
        Ok(LpModel {
            n_vars,
            fixed_zero,
            rows: clean,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn fixed_zero(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.fixed_zero.iter().copied()
    }

    pub fn push_row(&mut self, mut row: LpRow) {
        row.support.retain(|e| !self.fixed_zero.contains(e));
        row.support.sort_unstable();
        row.support.dedup();
        self.rows.push(row);
    }

    /// Largest shortfall of `delta` over all rows (0 when all hold).
    pub fn max_violation(&self, delta: &PerturbationVector) -> f64 {
        self.rows
            .iter()
            .map(|r| r.rhs - r.support.iter().map(|&e| delta.get(e)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Plain-text dump for cross-checking with external tools:
    ///
    /// ```text
    /// min : e0 e1 ...
    /// ge <rhs> : e<i> e<j> ...
    /// fix0 : e<k> ...
    /// ```
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for LpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut line = String::from("min :");
        for i in (0..self.n_vars).map(EdgeId).filter(|e| !self.fixed_zero.contains(e)) {
            write!(line, " {i}")?;
        }
        writeln!(f, "{line}")?;
        for row in &self.rows {
            write!(f, "ge {} :", row.rhs)?;
            for e in &row.support {
                write!(f, " {e}")?;
            }
            writeln!(f)?;
        }
        write!(f, "fix0 :")?;
        for e in &self.fixed_zero {
            write!(f, " {e}")?;
        }
        writeln!(f)
    }
}

/// Solves the model. Only variables that occur in some row enter the
/// tableau; every other variable is zero at any optimum.
pub fn solve(model: &LpModel, eps_feas: f64, eps_pivot: f64) -> Result<LpSolution> {
    let mut active: Vec<EdgeId> = model.rows.iter().flat_map(|r| r.support.iter().copied()).collect();
    active.sort_unstable();
    active.dedup();
    let column = |e: EdgeId| active.binary_search(&e).expect("support variable is active");

    let a: Vec<Vec<f64>> = model
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![0.0; active.len()];
            for &e in &r.support {
                row[column(e)] = 1.0;
            }
            row
        })
        .collect();
    let b: Vec<f64> = model.rows.iter().map(|r| r.rhs).collect();
    let c = vec![1.0; active.len()];
    let opts = SimplexOptions {
        eps_feas,
        eps_pivot,
        ..SimplexOptions::default()
    };
    let out = minimize(&c, &a, &b, opts)?;

    let mut delta = vec![0.0; model.n_vars];
    for (x, e) in out.x.iter().zip(&active) {
        delta[e.0] = *x;
    }
    let delta = PerturbationVector::from_vec(delta)?;
    let status = match out.status {
        SimplexStatus::Optimal => LpStatus::Optimal,
        SimplexStatus::Infeasible => LpStatus::Infeasible,
        SimplexStatus::Unbounded => LpStatus::Unbounded,
    };
    let objective_value = if status == LpStatus::Optimal {
        delta.total()
    } else {
        out.objective
    };
    Ok(LpSolution {
        status,
        delta,
        objective_value,
        pivots: out.pivots,
    })
}

/// [`solve`] with the default tolerances.
pub fn solve_default(model: &LpModel) -> Result<LpSolution> {
    solve(model, DEFAULT_EPS_FEAS, DEFAULT_EPS_PIVOT)
}
