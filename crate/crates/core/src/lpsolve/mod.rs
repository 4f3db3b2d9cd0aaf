//! Linear and mixed-integer programming.
//!
//! [`LinearProgram`] is a sparse column-major LP with bounded variables and
//! row senses. [`SimplexSolver`] solves it with a bounded-variable primal
//! simplex ([`simplex`]) and solves 0/1 MIPs with depth-first
//! branch-and-bound ([`branch`]). Anything implementing [`Solver`] can stand
//! in for it.
//!
//! Dual sign convention: duals `y` are such that reduced costs are
//! `d = c - A^T y` for the objective as stated. For a minimization, rows of
//! sense `>=` have `y >= 0`, rows of sense `<=` have `y <= 0` and equality
//! rows are free.

mod branch;
mod simplex;

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use thiserror::Error;

pub use branch::{MipOptions, MipResult, MipStatus};
pub use simplex::{Basis, LpSolution, SimplexOptions, VarStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("time limit reached")]
    TimeLimit,
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error("invalid warm start: {0}")]
    InvalidWarmStart(String),
    #[error("malformed model: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: ObjectiveSense,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    columns: Vec<Vec<(usize, f64)>>,
    row_sense: Vec<RowSense>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: ObjectiveSense) -> Self {
        Self {
            sense,
            cost: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            columns: Vec::new(),
            row_sense: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_row(&mut self, sense: RowSense, rhs: f64) -> usize {
        self.row_sense.push(sense);
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    /// Adds a column; `entries` are `(row, coefficient)` pairs on existing rows.
    pub fn add_column(&mut self, cost: f64, lower: f64, upper: f64, entries: Vec<(usize, f64)>) -> usize {
        debug_assert!(entries.iter().all(|&(r, _)| r < self.rhs.len()));
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.columns.push(entries);
        self.columns.len() - 1
    }

    pub fn sense(&self) -> ObjectiveSense {
        self.sense
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    pub fn column(&self, col: usize) -> &[(usize, f64)] {
        &self.columns[col]
    }

    pub fn row_sense(&self) -> &[RowSense] {
        &self.row_sense
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.num_rows()];
        for (col, &v) in self.columns.iter().zip(x) {
            if v != 0.0 {
                for &(r, a) in col {
                    act[r] += a * v;
                }
            }
        }
        act
    }

    /// Checks bounds, rows and (optionally) integrality of `x` within `tol`.
    pub fn check_feasibility(&self, x: &[f64], integer: Option<&[bool]>, tol: f64) -> Result<(), String> {
        if x.len() != self.num_cols() {
            return Err(format!("expected {} values, got {}", self.num_cols(), x.len()));
        }
        for (j, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(format!("x[{j}] is not finite"));
            }
            if v < self.lower[j] - tol || v > self.upper[j] + tol {
                return Err(format!(
                    "x[{j}] = {v} outside [{}, {}]",
                    self.lower[j], self.upper[j]
                ));
            }
            if let Some(mask) = integer {
                if mask[j] && (v - v.round()).abs() > tol {
                    return Err(format!("x[{j}] = {v} is not integral"));
                }
            }
        }
        let act = self.activities(x);
        for (i, (&a, (&b, &s))) in act.iter().zip(self.rhs.iter().zip(&self.row_sense)).enumerate() {
            let scaled = tol * (1.0 + b.abs());
            let ok = match s {
                RowSense::Le => a <= b + scaled,
                RowSense::Ge => a >= b - scaled,
                RowSense::Eq => (a - b).abs() <= scaled,
            };
            if !ok {
                return Err(format!("row {i}: activity {a} violates {s:?} {b}"));
            }
        }
        Ok(())
    }

    /// Writes the problem in CPLEX LP text format.
    pub fn write_lp_format<W: io::Write>(&self, mut out: W, integer: Option<&[bool]>) -> io::Result<()> {
        let term = |buf: &mut String, coef: f64, name: &str| {
            if coef >= 0.0 {
                let _ = write!(buf, " + {coef} {name}");
            } else {
                let _ = write!(buf, " - {} {name}", -coef);
            }
        };
        let mut obj = String::new();
        for (j, &c) in self.cost.iter().enumerate() {
            if c != 0.0 {
                term(&mut obj, c, &format!("x{j}"));
            }
        }
        let header = match self.sense {
            ObjectiveSense::Minimize => "Minimize",
            ObjectiveSense::Maximize => "Maximize",
        };
        writeln!(out, "{header}\n obj:{}", if obj.is_empty() { " 0 x0".to_string() } else { obj })?;
        writeln!(out, "Subject To")?;
        let mut rows = vec![String::new(); self.num_rows()];
        for (j, col) in self.columns.iter().enumerate() {
            for &(r, a) in col {
                term(&mut rows[r], a, &format!("x{j}"));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            let op = match self.row_sense[i] {
                RowSense::Le => "<=",
                RowSense::Ge => ">=",
                RowSense::Eq => "=",
            };
            let body = if row.is_empty() { " 0 x0" } else { row.as_str() };
            writeln!(out, " r{i}:{body} {op} {}", self.rhs[i])?;
        }
        writeln!(out, "Bounds")?;
        for j in 0..self.num_cols() {
            let lo = if self.lower[j].is_finite() { self.lower[j].to_string() } else { "-inf".into() };
            let up = if self.upper[j].is_finite() { self.upper[j].to_string() } else { "+inf".into() };
            writeln!(out, " {lo} <= x{j} <= {up}")?;
        }
        if let Some(mask) = integer {
            let ints: Vec<String> = (0..self.num_cols())
                .filter(|&j| mask[j])
                .map(|j| format!("x{j}"))
                .collect();
            if !ints.is_empty() {
                writeln!(out, "General\n {}", ints.join(" "))?;
            }
        }
        writeln!(out, "End")
    }
}

/// Running certificate counters collected while solving.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LpStats {
    pub lps_solved: u64,
    /// Largest `|primal - dual| / (1 + |primal|)` over all optimal LPs.
    pub max_duality_gap: f64,
    pub incumbents_checked: u64,
    pub incumbent_violations: u64,
}

impl LpStats {
    pub fn record_lp(&mut self, lp: &LinearProgram, sol: &LpSolution) {
        self.lps_solved += 1;
        self.max_duality_gap = self.max_duality_gap.max(sol.duality_gap(lp));
    }

    pub fn merge(&mut self, other: &LpStats) {
        self.lps_solved += other.lps_solved;
        self.max_duality_gap = self.max_duality_gap.max(other.max_duality_gap);
        self.incumbents_checked += other.incumbents_checked;
        self.incumbent_violations += other.incumbent_violations;
    }
}

/// Contract shared by the built-in solver and any external adapter.
pub trait Solver: Send + Sync {
    fn solve_lp(&self, lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpSolution, LpError>;

    fn solve_mip(
        &self,
        lp: &LinearProgram,
        integer: &[bool],
        warm_start: Option<&[f64]>,
        options: &MipOptions,
    ) -> Result<MipResult, LpError>;
}

#[derive(Debug, Clone, Default)]
pub struct SimplexSolver {
    pub options: SimplexOptions,
}

impl Solver for SimplexSolver {
    fn solve_lp(&self, lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
        simplex::solve(lp, lp.lower(), lp.upper(), warm, &self.options, None)
    }

    fn solve_mip(
        &self,
        lp: &LinearProgram,
        integer: &[bool],
        warm_start: Option<&[f64]>,
        options: &MipOptions,
    ) -> Result<MipResult, LpError> {
        branch::branch_and_bound(lp, integer, warm_start, options, &self.options, Instant::now())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver() -> SimplexSolver {
        SimplexSolver::default()
    }

    #[test]
    fn single_bound_row() {
        // min x : x >= 3, 0 <= x <= 10
        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        let r = lp.add_row(RowSense::Ge, 3.0);
        lp.add_column(1.0, 0.0, 10.0, vec![(r, 1.0)]);
        let sol = solver().solve_lp(&lp, None).unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
        assert!(sol.duality_gap(&lp) < 1e-9);
    }

    #[test]
    fn small_production_lp() {
        // max 3x + 5y : x <= 4, 2y <= 12, 3x + 2y <= 18 ; opt 36 at (2, 6)
        let mut lp = LinearProgram::new(ObjectiveSense::Maximize);
        let r0 = lp.add_row(RowSense::Le, 4.0);
        let r1 = lp.add_row(RowSense::Le, 12.0);
        let r2 = lp.add_row(RowSense::Le, 18.0);
        lp.add_column(3.0, 0.0, f64::INFINITY, vec![(r0, 1.0), (r2, 3.0)]);
        lp.add_column(5.0, 0.0, f64::INFINITY, vec![(r1, 2.0), (r2, 2.0)]);
        let sol = solver().solve_lp(&lp, None).unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
        assert!(sol.duality_gap(&lp) < 1e-9);
        // shadow prices (0, 1.5, 1)
        assert!((sol.duals[1] - 1.5).abs() < 1e-9);
        assert!((sol.duals[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        let r0 = lp.add_row(RowSense::Ge, 5.0);
        lp.add_column(1.0, 0.0, 2.0, vec![(r0, 1.0)]);
        assert_eq!(solver().solve_lp(&lp, None).unwrap_err(), LpError::Infeasible);

        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        let r0 = lp.add_row(RowSense::Ge, 1.0);
        lp.add_column(-1.0, 0.0, f64::INFINITY, vec![(r0, 1.0)]);
        assert_eq!(solver().solve_lp(&lp, None).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn degenerate_redundant_rows_terminate() {
        // Beale's cycling example with both degenerate rows duplicated.
        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        let rows: Vec<usize> = (0..4).map(|_| lp.add_row(RowSense::Le, 0.0)).collect();
        let r_last = lp.add_row(RowSense::Le, 1.0);
        let coefs = [
            (-0.75, [0.25, 0.5, 0.25, 0.5], 0.0),
            (150.0, [-60.0, -90.0, -60.0, -90.0], 0.0),
            (-0.02, [-0.04, -0.02, -0.04, -0.02], 1.0),
            (6.0, [9.0, 3.0, 9.0, 3.0], 0.0),
        ];
        for (c, col, last) in coefs {
            let mut entries: Vec<(usize, f64)> = rows.iter().copied().zip(col).collect();
            if last != 0.0 {
                entries.push((r_last, last));
            }
            lp.add_column(c, 0.0, f64::INFINITY, entries);
        }
        let sol = solver().solve_lp(&lp, None).unwrap();
        assert!((sol.objective - (-0.05)).abs() < 1e-9, "{}", sol.objective);
        assert!(sol.duality_gap(&lp) < 1e-9);
    }

    #[test]
    fn equality_and_free_rows() {
        // min x + y : x + y = 2, x - y >= 0, y in [0.5, 1]
        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        let r0 = lp.add_row(RowSense::Eq, 2.0);
        let r1 = lp.add_row(RowSense::Ge, 0.0);
        lp.add_column(1.0, f64::NEG_INFINITY, f64::INFINITY, vec![(r0, 1.0), (r1, 1.0)]);
        lp.add_column(2.0, 0.5, 1.0, vec![(r0, 1.0), (r1, -1.0)]);
        let sol = solver().solve_lp(&lp, None).unwrap();
        assert!((sol.objective - 2.5).abs() < 1e-9);
        assert!(lp.check_feasibility(&sol.x, None, 1e-9).is_ok());
        assert!(sol.duality_gap(&lp) < 1e-9);
    }

    #[test]
    fn warm_start_after_bound_change() {
        let mut lp = LinearProgram::new(ObjectiveSense::Maximize);
        let r0 = lp.add_row(RowSense::Le, 4.0);
        let r1 = lp.add_row(RowSense::Le, 12.0);
        let r2 = lp.add_row(RowSense::Le, 18.0);
        lp.add_column(3.0, 0.0, f64::INFINITY, vec![(r0, 1.0), (r2, 3.0)]);
        lp.add_column(5.0, 0.0, f64::INFINITY, vec![(r1, 2.0), (r2, 2.0)]);
        let first = solver().solve_lp(&lp, None).unwrap();
        lp.set_bounds(1, 0.0, 5.0);
        let warm = solver().solve_lp(&lp, Some(&first.basis)).unwrap();
        let cold = solver().solve_lp(&lp, None).unwrap();
        assert!((warm.objective - cold.objective).abs() < 1e-9);
        assert!((warm.objective - 33.0).abs() < 1e-9);
    }

    #[test]
    fn lp_format_export() {
        let mut lp = LinearProgram::new(ObjectiveSense::Minimize);
        let r = lp.add_row(RowSense::Ge, 3.0);
        lp.add_column(1.0, 0.0, 10.0, vec![(r, 1.0)]);
        let mut buf = Vec::new();
        lp.write_lp_format(&mut buf, Some(&[true])).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("Minimize"));
        assert!(text.contains("r0: + 1 x0 >= 3"));
        assert!(text.contains("General"));
        assert!(text.trim_end().ends_with("End"));
    }
}
