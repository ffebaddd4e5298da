//! Dense-tableau two-phase primal simplex for
//!
//! ```text
//! minimize  c^T x   subject to  A x >= b,  x >= 0
//! ```
//!
//! Pricing is Dantzig's most negative reduced cost with ties to the lowest
//! column. After a run of degenerate pivots the solver switches permanently
//! to Bland's rule, which cannot cycle.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Phase-one objective above this means infeasible.
    pub eps_feas: f64,
    /// Smallest pivot magnitude and most negative reduced cost treated as nonzero.
    pub eps_pivot: f64,
    /// Degenerate pivots tolerated before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            eps_feas: 1e-9,
            eps_pivot: 1e-10,
            bland_after: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOutcome {
    pub status: SimplexStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    /// Row-major, `rows + 1` rows of `cols + 1` entries; the last row holds
    /// reduced costs and the last column the right-hand side.
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let w = self.cols + 1;
        &mut self.data[r * w..(r + 1) * w]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for x in self.row_mut(pr) {
            *x /= p;
        }
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f == 0.0 {
                continue;
            }
            for (x, &y) in self.row_mut(r).iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
            // Keep the pivot column an exact unit vector.
            self.data[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Overwrites the reduced-cost row for costs `c` (length `cols`).
    fn price(&mut self, c: &[f64]) {
        let w = self.cols + 1;
        let mut obj = vec![0.0; w];
        obj[..self.cols].copy_from_slice(c);
        for r in 0..self.rows {
            let cb = c[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for (o, &a) in obj.iter_mut().zip(&self.data[r * w..(r + 1) * w]) {
                *o -= cb * a;
            }
        }
        let m = self.rows;
        self.row_mut(m).copy_from_slice(&obj);
    }

    /// Current objective value, `c_B^T x_B`.
    fn objective(&self) -> f64 {
        -self.rhs(self.rows)
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Driver {
    opts: SimplexOptions,
    pivots: usize,
    cap: usize,
    degenerate: usize,
    bland: bool,
}

impl Driver {
    fn entering(&self, t: &Tableau, allowed: usize) -> Option<usize> {
        let obj = t.rows;
        let mut best: Option<(usize, f64)> = None;
        for c in 0..allowed {
            let d = t.at(obj, c);
            if d < -self.opts.eps_pivot {
                if self.bland {
                    return Some(c);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((c, d));
                }
            }
        }
        best.map(|(c, _)| c)
    }

    fn leaving(&self, t: &Tableau, pc: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..t.rows {
            let a = t.at(r, pc);
            if a > self.opts.eps_pivot {
                let ratio = t.rhs(r) / a;
                let better = match best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < bratio || (ratio == bratio && t.basis[r] < t.basis[br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
        }
        best.map(|(r, _)| r)
    }

    /// Pivots until no column below `allowed` prices out.
    fn run(&mut self, t: &mut Tableau, allowed: usize) -> Result<Phase> {
        loop {
            let Some(pc) = self.entering(t, allowed) else {
                return Ok(Phase::Optimal);
            };
            let Some(pr) = self.leaving(t, pc) else {
                return Ok(Phase::Unbounded);
            };
            if self.pivots >= self.cap {
                return Err(Error::Solver(format!(
                    "no convergence within {} pivots",
                    self.cap
                )));
            }
            if t.rhs(pr).abs() <= self.opts.eps_pivot {
                self.degenerate += 1;
                if self.degenerate >= self.opts.bland_after {
                    self.bland = true;
                }
            }
            t.pivot(pr, pc);
            self.pivots += 1;
        }
    }
}

/// Solves `min c^T x, A x >= b, x >= 0` where `a` is row-major `b.len()` rows
/// by `c.len()` columns.
pub fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64], opts: SimplexOptions) -> Result<SimplexOutcome> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::arg("constraint matrix shape does not match c and b"));
    }
    if m == 0 {
        // Every x >= 0 is feasible; the origin is optimal unless some cost is negative.
        if c.iter().any(|&ci| ci < 0.0) {
            return Ok(SimplexOutcome {
                status: SimplexStatus::Unbounded,
                x: vec![0.0; n],
                objective: f64::NEG_INFINITY,
                pivots: 0,
            });
        }
        return Ok(SimplexOutcome {
            status: SimplexStatus::Optimal,
            x: vec![0.0; n],
            objective: 0.0,
            pivots: 0,
        });
    }

    // Columns: structural [0, n), surplus [n, n+m), artificial [n+m, n+2m).
    let cols = n + 2 * m;
    let w = cols + 1;
    let mut data = vec![0.0; (m + 1) * w];
    for r in 0..m {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut data[r * w..(r + 1) * w];
        for j in 0..n {
            row[j] = sign * a[r][j];
        }
        row[n + r] = -sign;
        row[n + m + r] = 1.0;
        row[cols] = sign * b[r];
    }
    let mut t = Tableau {
        data,
        rows: m,
        cols,
        basis: (n + m..n + 2 * m).collect(),
    };
    let mut driver = Driver {
        opts,
        pivots: 0,
        cap: 50 * (n + m),
        degenerate: 0,
        bland: false,
    };

    let mut phase1_cost = vec![0.0; cols];
    phase1_cost[n + m..].fill(1.0);
    t.price(&phase1_cost);
    driver.run(&mut t, n + m)?;
    let scale = b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    if t.objective() > opts.eps_feas * scale {
        return Ok(SimplexOutcome {
            status: SimplexStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::NAN,
            pivots: driver.pivots,
        });
    }

    // Drive zero-level artificials out of the basis where a non-artificial
    // column can replace them; rows where none can are redundant and stay put.
    for r in 0..m {
        if t.basis[r] >= n + m {
            if let Some(pc) = (0..n + m).find(|&c| t.at(r, c).abs() > opts.eps_pivot) {
                t.pivot(r, pc);
                driver.pivots += 1;
            }
        }
    }

    let mut phase2_cost = vec![0.0; cols];
    phase2_cost[..n].copy_from_slice(c);
    t.price(&phase2_cost);
    if let Phase::Unbounded = driver.run(&mut t, n + m)? {
        return Ok(SimplexOutcome {
            status: SimplexStatus::Unbounded,
            x: vec![0.0; n],
            objective: f64::NEG_INFINITY,
            pivots: driver.pivots,
        });
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        let j = t.basis[r];
        if j < n {
            x[j] = t.rhs(r).max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(SimplexOutcome {
        status: SimplexStatus::Optimal,
        x,
        objective,
        pivots: driver.pivots,
    })
}
