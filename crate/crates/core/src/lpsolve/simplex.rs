//! Bounded-variable primal simplex on a dense explicit basis inverse.
//!
//! Every row `i` gets a slack `s_i` with `A x + s = b`; the row sense becomes
//! the slack's bounds (`<=`: `s >= 0`, `>=`: `s <= 0`, `=`: `s = 0`). Phase 1
//! minimizes the total bound violation of the basic variables starting from
//! any basis, so warm starts after bound changes or column additions need no
//! artificial variables. Pricing is Dantzig's rule; after a run of
//! non-improving pivots it falls back to Bland's rule until progress resumes.

use std::time::Instant;

use super::{LinearProgram, LpError, ObjectiveSense, RowSense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Basis statuses of structural columns and row slacks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub structural: Vec<VarStatus>,
    pub slack: Vec<VarStatus>,
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub refactor_interval: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    /// Non-improving pivots tolerated before switching to Bland's rule.
    pub stall_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            refactor_interval: 64,
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            pivot_tol: 1e-9,
            stall_limit: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Structural values.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals.
    pub duals: Vec<f64>,
    /// Structural reduced costs `c - A^T y`.
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

impl LpSolution {
    /// Objective of the bounded dual built from `duals`: `b^T y` plus, for every
    /// variable (slacks included), its reduced cost times the bound that the
    /// reduced cost's sign selects. Returns `-inf` when a reduced cost of the
    /// wrong sign would need an infinite bound.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        self.dual_objective_with_bounds(lp, lp.lower(), lp.upper())
    }

    /// As [`LpSolution::dual_objective`] with the structural bounds overridden.
    pub fn dual_objective_with_bounds(&self, lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> f64 {
        let sign = match lp.sense() {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let tol = 1e-7;
        let mut total: f64 = lp.rhs().iter().zip(&self.duals).map(|(b, y)| b * y).sum::<f64>() * sign;
        let mut add = |d: f64, lo: f64, up: f64| -> bool {
            if d > tol {
                if !lo.is_finite() {
                    return false;
                }
                total += d * lo;
            } else if d < -tol {
                if !up.is_finite() {
                    return false;
                }
                total += d * up;
            }
            true
        };
        for j in 0..lp.num_cols() {
            if !add(sign * self.reduced_costs[j], lower[j], upper[j]) {
                return f64::NEG_INFINITY;
            }
        }
        for (i, &s) in lp.row_sense().iter().enumerate() {
            let (lo, up) = slack_bounds(s);
            if !add(-sign * self.duals[i], lo, up) {
                return f64::NEG_INFINITY;
            }
        }
        total * sign
    }

    /// Relative primal-dual gap `|primal - dual| / (1 + |primal|)`.
    pub fn duality_gap(&self, lp: &LinearProgram) -> f64 {
        self.duality_gap_with_bounds(lp, lp.lower(), lp.upper())
    }

    pub fn duality_gap_with_bounds(&self, lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> f64 {
        let dual = self.dual_objective_with_bounds(lp, lower, upper);
        (self.objective - dual).abs() / (1.0 + self.objective.abs())
    }
}

fn slack_bounds(sense: RowSense) -> (f64, f64) {
    match sense {
        RowSense::Le => (0.0, f64::INFINITY),
        RowSense::Ge => (f64::NEG_INFINITY, 0.0),
        RowSense::Eq => (0.0, 0.0),
    }
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    opts: &'a SimplexOptions,
    rows: usize,
    cols: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    head: Vec<usize>,
    status: Vec<VarStatus>,
    x: Vec<f64>,
    binv: Vec<f64>,
    since_refactor: usize,
}

enum Step {
    Optimal,
    Infeasible,
    Unbounded,
    Progress,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a LinearProgram, lower: &[f64], upper: &[f64], opts: &'a SimplexOptions) -> Self {
        let rows = lp.num_rows();
        let cols = lp.num_cols();
        let sign = match lp.sense() {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let mut lo = lower.to_vec();
        let mut up = upper.to_vec();
        let mut cost: Vec<f64> = lp.cost().iter().map(|c| c * sign).collect();
        for &s in lp.row_sense() {
            let (l, u) = slack_bounds(s);
            lo.push(l);
            up.push(u);
            cost.push(0.0);
        }
        Self {
            lp,
            opts,
            rows,
            cols,
            lower: lo,
            upper: up,
            cost,
            head: Vec::new(),
            status: Vec::new(),
            x: vec![0.0; cols + rows],
            binv: Vec::new(),
            since_refactor: 0,
        }
    }

    fn nonbasic_status(&self, v: usize, hint: VarStatus) -> VarStatus {
        let (lo, up) = (self.lower[v], self.upper[v]);
        match hint {
            VarStatus::AtUpper if up.is_finite() => VarStatus::AtUpper,
            _ if lo.is_finite() => VarStatus::AtLower,
            _ if up.is_finite() => VarStatus::AtUpper,
            _ => VarStatus::Free,
        }
    }

    fn slack_basis(&mut self) {
        let total = self.cols + self.rows;
        self.status = (0..total)
            .map(|v| {
                if v >= self.cols {
                    VarStatus::Basic
                } else {
                    self.nonbasic_status(v, VarStatus::AtLower)
                }
            })
            .collect();
        self.head = (self.cols..total).collect();
    }

    fn load_basis(&mut self, basis: &Basis) -> bool {
        let total = self.cols + self.rows;
        if basis.slack.len() != self.rows || basis.structural.len() > self.cols {
            return false;
        }
        let mut status = Vec::with_capacity(total);
        for v in 0..total {
            let hint = if v < self.cols {
                basis.structural.get(v).copied().unwrap_or(VarStatus::AtLower)
            } else {
                basis.slack[v - self.cols]
            };
            status.push(hint);
        }
        let head: Vec<usize> = (0..total).filter(|&v| status[v] == VarStatus::Basic).collect();
        if head.len() != self.rows {
            return false;
        }
        for v in 0..total {
            if status[v] != VarStatus::Basic {
                status[v] = self.nonbasic_status(v, status[v]);
            }
        }
        self.status = status;
        self.head = head;
        true
    }

    fn nonbasic_value(&self, v: usize) -> f64 {
        match self.status[v] {
            VarStatus::AtLower => self.lower[v],
            VarStatus::AtUpper => self.upper[v],
            _ => 0.0,
        }
    }

    /// Calls `f(row, coef)` for every nonzero of variable `v`'s column.
    #[inline]
    fn for_column(&self, v: usize, mut f: impl FnMut(usize, f64)) {
        if v < self.cols {
            for &(r, a) in self.lp.column(v) {
                f(r, a);
            }
        } else {
            f(v - self.cols, 1.0);
        }
    }

    /// Inverts the basis matrix by Gauss-Jordan with partial pivoting.
    fn refactor(&mut self) -> bool {
        let m = self.rows;
        let mut mat = vec![0.0; m * m];
        for (pos, &v) in self.head.iter().enumerate() {
            self.for_column(v, |r, a| mat[r * m + pos] = a);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = mat[col * m + col].abs();
            for r in col + 1..m {
                let v = mat[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-11 {
                return false;
            }
            if piv != col {
                for c in 0..m {
                    mat.swap(piv * m + c, col * m + c);
                    inv.swap(piv * m + c, col * m + c);
                }
            }
            let d = mat[col * m + col];
            for c in 0..m {
                mat[col * m + c] /= d;
                inv[col * m + c] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = mat[r * m + col];
                    if f != 0.0 {
                        for c in 0..m {
                            mat[r * m + c] -= f * mat[col * m + c];
                            inv[r * m + c] -= f * inv[col * m + c];
                        }
                    }
                }
            }
        }
        // Row `pos` of inv corresponds to basic position `pos` (B e_pos = column of head[pos]).
        self.binv = inv;
        self.since_refactor = 0;
        true
    }

    fn compute_primal(&mut self) {
        let m = self.rows;
        let mut rhs = self.lp.rhs().to_vec();
        for v in 0..self.cols + self.rows {
            if self.status[v] != VarStatus::Basic {
                let val = self.nonbasic_value(v);
                self.x[v] = val;
                if val != 0.0 {
                    self.for_column(v, |r, a| rhs[r] -= a * val);
                }
            }
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            let val: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.head[pos]] = val;
        }
    }

    fn infeasibility(&self, v: usize) -> f64 {
        let tol = self.opts.primal_tol * (1.0 + self.x[v].abs().min(1e6));
        if self.x[v] < self.lower[v] - tol {
            self.lower[v] - self.x[v]
        } else if self.x[v] > self.upper[v] + tol {
            self.x[v] - self.upper[v]
        } else {
            0.0
        }
    }

    fn phase_costs(&self) -> (bool, Vec<f64>, f64) {
        let mut cb = vec![0.0; self.rows];
        let mut total = 0.0;
        for (pos, &v) in self.head.iter().enumerate() {
            let inf = self.infeasibility(v);
            if inf > 0.0 {
                total += inf;
                cb[pos] = if self.x[v] < self.lower[v] { -1.0 } else { 1.0 };
            }
        }
        if total > 0.0 {
            (true, cb, total)
        } else {
            for (pos, &v) in self.head.iter().enumerate() {
                cb[pos] = self.cost[v];
            }
            let obj = (0..self.cols).map(|v| self.cost[v] * self.x[v]).sum();
            (false, cb, obj)
        }
    }

    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.rows;
        let mut y = vec![0.0; m];
        for (pos, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for (yi, a) in y.iter_mut().zip(row) {
                    *yi += c * a;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, v: usize, y: &[f64], phase1: bool) -> f64 {
        let mut d = if phase1 { 0.0 } else { self.cost[v] };
        self.for_column(v, |r, a| d -= y[r] * a);
        d
    }

    fn ftran(&self, v: usize) -> Vec<f64> {
        let m = self.rows;
        let mut alpha = vec![0.0; m];
        self.for_column(v, |r, a| {
            for pos in 0..m {
                alpha[pos] += self.binv[pos * m + r] * a;
            }
        });
        alpha
    }

    fn step(&mut self, bland: bool) -> Result<(Step, f64), LpError> {
        let (phase1, cb, measure) = self.phase_costs();
        let y = self.duals(&cb);
        let tol = self.opts.dual_tol;

        let mut entering: Option<(usize, f64)> = None;
        for v in 0..self.cols + self.rows {
            let st = self.status[v];
            if st == VarStatus::Basic || self.lower[v] == self.upper[v] {
                continue;
            }
            let d = self.reduced_cost(v, &y, phase1);
            let eligible = match st {
                VarStatus::AtLower => d < -tol,
                VarStatus::AtUpper => d > tol,
                VarStatus::Free => d.abs() > tol,
                VarStatus::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                entering = Some((v, d));
                break;
            }
            if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                entering = Some((v, d));
            }
        }
        let Some((q, dq)) = entering else {
            return Ok((if phase1 { Step::Infeasible } else { Step::Optimal }, measure));
        };

        let dir = if dq < 0.0 { 1.0 } else { -1.0 };
        let alpha = self.ftran(q);
        let ptol = self.opts.pivot_tol;
        let ftol = self.opts.primal_tol;

        // Ratio test: one breakpoint per basic variable, then among the
        // near-minimal ones prefer the largest pivot (or lowest index under Bland).
        let range = self.upper[q] - self.lower[q];
        let mut t_min = if range.is_finite() { range } else { f64::INFINITY };
        let mut ratios: Vec<(usize, f64, f64)> = Vec::new();
        for pos in 0..self.rows {
            let a = alpha[pos];
            if a.abs() < ptol {
                continue;
            }
            let rate = -dir * a;
            let v = self.head[pos];
            let (xi, lo, up) = (self.x[v], self.lower[v], self.upper[v]);
            let target = if rate < 0.0 {
                if xi > up + ftol {
                    Some(up)
                } else if lo.is_finite() && xi >= lo - ftol {
                    Some(lo)
                } else {
                    None
                }
            } else if xi < lo - ftol {
                Some(lo)
            } else if up.is_finite() && xi <= up + ftol {
                Some(up)
            } else {
                None
            };
            if let Some(b) = target {
                let t = ((b - xi) / rate).max(0.0);
                t_min = t_min.min(t);
                ratios.push((pos, t, b));
            }
        }
        if !t_min.is_finite() {
            if phase1 {
                return Err(LpError::Numerical("unbounded phase-1 ray".into()));
            }
            return Ok((Step::Unbounded, measure));
        }
        let slack = 1e-12 * (1.0 + t_min);
        let mut leave: Option<(usize, f64, f64)> = None;
        for &(pos, t, b) in &ratios {
            if t > t_min + slack {
                continue;
            }
            let better = match leave {
                None => true,
                Some((lp, _, _)) => {
                    if bland {
                        self.head[pos] < self.head[lp]
                    } else {
                        alpha[pos].abs() > alpha[lp].abs()
                    }
                }
            };
            if better {
                leave = Some((pos, t, b));
            }
        }
        let bound_flip = range.is_finite() && range <= t_min + slack && leave.is_none_or(|(_, t, _)| range <= t);

        let t = if bound_flip { range } else { leave.map(|l| l.1).unwrap_or(range) };
        if t != 0.0 {
            self.x[q] += dir * t;
            for pos in 0..self.rows {
                let a = alpha[pos];
                if a != 0.0 {
                    self.x[self.head[pos]] -= dir * a * t;
                }
            }
        }
        if bound_flip {
            self.status[q] = match self.status[q] {
                VarStatus::AtLower => VarStatus::AtUpper,
                _ => VarStatus::AtLower,
            };
            self.x[q] = self.nonbasic_value(q);
            return Ok((Step::Progress, measure));
        }
        let (r, _, b) = leave.expect("finite ratio without leaving row");
        let out = self.head[r];
        self.status[out] = if b == self.lower[out] { VarStatus::AtLower } else { VarStatus::AtUpper };
        self.x[out] = b;
        self.status[q] = VarStatus::Basic;
        self.head[r] = q;

        let m = self.rows;
        let piv = alpha[r];
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v / piv).collect();
        for pos in 0..m {
            if pos == r {
                continue;
            }
            let f = alpha[pos];
            if f != 0.0 {
                let row = &mut self.binv[pos * m..(pos + 1) * m];
                for (e, p) in row.iter_mut().zip(&pivot_row) {
                    *e -= f * p;
                }
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
        self.since_refactor += 1;
        Ok((Step::Progress, measure))
    }

    fn fresh_start(&mut self) -> Result<(), LpError> {
        if !self.refactor() {
            self.slack_basis();
            if !self.refactor() {
                return Err(LpError::Numerical("slack basis is singular".into()));
            }
        }
        self.compute_primal();
        Ok(())
    }

    fn run(&mut self, deadline: Option<Instant>) -> Result<usize, LpError> {
        self.fresh_start()?;
        let mut iterations = 0usize;
        let mut best = (true, f64::INFINITY);
        let mut stalled = 0usize;
        let mut bland = false;
        let mut verified = false;
        loop {
            if iterations >= self.opts.max_iterations {
                return Err(LpError::IterationLimit);
            }
            if iterations % 64 == 63 && deadline.is_some_and(|d| Instant::now() >= d) {
                return Err(LpError::TimeLimit);
            }
            if self.since_refactor >= self.opts.refactor_interval {
                self.fresh_start()?;
            }
            let (step, measure) = self.step(bland)?;
            match step {
                Step::Optimal | Step::Infeasible => {
                    if !verified && self.since_refactor > 0 {
                        // Confirm on a freshly factored basis before reporting.
                        self.fresh_start()?;
                        verified = true;
                        continue;
                    }
                    return match step {
                        Step::Optimal => Ok(iterations),
                        _ => Err(LpError::Infeasible),
                    };
                }
                Step::Unbounded => return Err(LpError::Unbounded),
                Step::Progress => {}
            }
            verified = false;
            iterations += 1;
            let phase1 = self.head.iter().any(|&v| self.infeasibility(v) > 0.0);
            let improved = match (best.0, phase1) {
                (true, false) => true,
                (a, b) if a == b => measure < best.1 - 1e-12 * (1.0 + best.1.abs()),
                _ => false,
            };
            if improved || best.1.is_infinite() {
                best = (phase1, measure);
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled > self.opts.stall_limit {
                    bland = true;
                }
            }
        }
    }

    fn into_solution(self, iterations: usize) -> LpSolution {
        let sign = match self.lp.sense() {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let cb: Vec<f64> = self.head.iter().map(|&v| self.cost[v]).collect();
        let y_min = self.duals(&cb);
        let x: Vec<f64> = self.x[..self.cols].to_vec();
        let reduced_costs: Vec<f64> = (0..self.cols)
            .map(|v| sign * self.reduced_cost(v, &y_min, false))
            .collect();
        let duals: Vec<f64> = y_min.iter().map(|y| sign * y).collect();
        let objective = self.lp.objective_value(&x);
        let basis = Basis {
            structural: self.status[..self.cols].to_vec(),
            slack: self.status[self.cols..].to_vec(),
        };
        LpSolution { x, objective, duals, reduced_costs, basis, iterations }
    }
}

/// Solves `lp` with the structural bounds replaced by `lower`/`upper`.
pub(crate) fn solve(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    warm: Option<&Basis>,
    opts: &SimplexOptions,
    deadline: Option<Instant>,
) -> Result<LpSolution, LpError> {
    for j in 0..lp.num_cols() {
        if lower[j] > upper[j] {
            return Err(LpError::Infeasible);
        }
    }
    let mut tab = Tableau::new(lp, lower, upper, opts);
    if !warm.is_some_and(|b| tab.load_basis(b)) {
        tab.slack_basis();
    }
    let iterations = tab.run(deadline)?;
    Ok(tab.into_solution(iterations))
}
