//! Exact linear programming.
//!
//! A dense-tableau, bounded-variable simplex over [`Rational`]. Every
//! structural variable has a finite lower bound and an optional upper bound;
//! bounds are handled implicitly rather than as rows. Rows are turned into
//! equalities with one slack each (`a·x + s = b` for `≤`, `a·x - s = b` for
//! `≥`, a fixed slack for `=`). A first phase drives artificial variables to
//! zero; they are then pinned to `[0, 0]` and never re-enter.
//!
//! The solver keeps its tableau between calls so cutting-plane loops and
//! branch-and-bound can append rows ([`Simplex::add_row`]) or tighten bounds
//! ([`Simplex::set_bounds`]) and re-optimize with the dual simplex.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

pub const DEFAULT_PIVOT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// A sparse constraint row `Σ coeff·x {≤,≥,=} rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        Row { coeffs, relation, rhs }
    }

    pub fn activity(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, cost: Rational, lower: Rational, upper: Option<Rational>) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match variable count".into()));
        }
        for (j, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if let Some(u) = u {
                if u < l {
                    return Err(LpError::Malformed(format!("variable {j} has upper < lower")));
                }
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some((j, _)) = row.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(LpError::Malformed(format!("row {i} references variable {j}")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Exact primal feasibility of `x` (bounds and every row).
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(&self.lower).all(|(v, l)| v >= l)
            && x.iter().zip(&self.upper).all(|(v, u)| u.as_ref().is_none_or(|u| v <= u))
            && self.rows.iter().all(|r| r.is_satisfied(x))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("pivot budget of {0} exhausted")]
    PivotBudget(usize),
    #[error("operation requires an optimal basis, solver status is {0:?}")]
    NotOptimal(Status),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    #[default]
    Bland,
    /// Dantzig's largest reduced cost; faster but without the anti-cycling guarantee.
    LargestCoefficient,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub rule: PivotRule,
    pub pivot_budget: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { rule: PivotRule::Bland, pivot_budget: DEFAULT_PIVOT_BUDGET }
    }
}

/// Identifies a basic column of the tableau.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisMember {
    Var(usize),
    Slack(usize),
    Artificial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Var(usize),
    Slack(usize),
    Artificial(usize),
}

#[derive(Clone)]
pub struct Simplex {
    opts: SimplexOptions,
    sense: Sense,
    nvars: usize,
    /// Original (user-sense) objective coefficients of the structurals.
    user_cost: Vec<Rational>,
    /// Rows as given, kept for dual recovery and certificate checks.
    rows: Vec<Row>,
    /// Per-column data.
    cols: Vec<Column>,
    cost: Vec<Rational>,
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    val: Vec<Rational>,
    at_upper: Vec<bool>,
    /// `pos[j]` is the tableau row where column `j` is basic.
    pos: Vec<Option<usize>>,
    /// Reduced costs of the internal minimization.
    d: Vec<Rational>,
    tab: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    slack_col: Vec<usize>,
    slack_sign: Vec<i64>,
    status: Option<Status>,
    pivots: usize,
}

impl std::fmt::Debug for Simplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simplex")
            .field("vars", &self.nvars)
            .field("rows", &self.rows.len())
            .field("status", &self.status)
            .field("pivots", &self.pivots)
            .finish()
    }
}

enum Step {
    Pivoted,
    Done,
    Unbounded,
}

impl Simplex {
    pub fn new(lp: &LinearProgram, opts: SimplexOptions) -> Result<Self, LpError> {
        lp.validate()?;
        let n = lp.num_vars();
        let mut s = Simplex {
            opts,
            sense: lp.sense,
            nvars: n,
            user_cost: lp.objective.clone(),
            rows: Vec::new(),
            cols: (0..n).map(Column::Var).collect(),
            cost: vec![Rational::zero(); n],
            lower: lp.lower.clone(),
            upper: lp.upper.clone(),
            val: lp.lower.clone(),
            at_upper: vec![false; n],
            pos: vec![None; n],
            d: vec![Rational::zero(); n],
            tab: Vec::new(),
            basis: Vec::new(),
            slack_col: Vec::new(),
            slack_sign: Vec::new(),
            status: None,
            pivots: 0,
        };
        // Fixed variables sit at their single value.
        for j in 0..n {
            if s.upper[j].as_ref() == Some(&s.lower[j]) {
                s.at_upper[j] = false;
            }
        }
        for row in &lp.rows {
            s.push_row_phase1(row);
        }
        Ok(s)
    }

    pub fn status(&self) -> Option<Status> {
        self.status
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_vars(&self) -> usize {
        self.nvars
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn new_column(&mut self, kind: Column, lower: Rational, upper: Option<Rational>) -> usize {
        let j = self.cols.len();
        self.cols.push(kind);
        self.cost.push(Rational::zero());
        self.val.push(lower.clone());
        self.lower.push(lower);
        self.upper.push(upper);
        self.at_upper.push(false);
        self.pos.push(None);
        self.d.push(Rational::zero());
        for r in &mut self.tab {
            r.push(Rational::zero());
        }
        j
    }

    fn slack_bounds(rel: Relation) -> Option<Rational> {
        match rel {
            Relation::Eq => Some(Rational::zero()),
            _ => None,
        }
    }

    /// Appends a row during construction: the slack is basic when it can absorb
    /// the residual, otherwise an artificial variable is.
    fn push_row_phase1(&mut self, row: &Row) {
        let i = self.rows.len();
        let sign = if row.relation == Relation::Ge { -1 } else { 1 };
        let s = self.new_column(Column::Slack(i), Rational::zero(), Self::slack_bounds(row.relation));
        let mut line = vec![Rational::zero(); self.ncols()];
        for (j, a) in &row.coeffs {
            line[*j] += a;
        }
        line[s] = Rational::from_int(sign);
        let residual = &row.rhs - &row.activity(&self.val[..self.nvars]);
        let slack_value = &residual * sign;
        let fits = !slack_value.is_negative()
            && self.upper[s].as_ref().is_none_or(|u| &slack_value <= u);
        let basic = if fits {
            self.val[s] = slack_value;
            s
        } else {
            let tau = residual.signum() as i64;
            let a = self.new_column(Column::Artificial(i), Rational::zero(), None);
            line.push(Rational::zero());
            line[a] = Rational::from_int(tau);
            self.val[a] = residual.abs();
            a
        };
        let piv = line[basic].clone();
        if !piv.is_one() {
            for v in line.iter_mut() {
                *v = &*v / &piv;
            }
        }
        self.tab.push(line);
        self.basis.push(basic);
        self.pos[basic] = Some(i);
        self.slack_col.push(s);
        self.slack_sign.push(sign);
        self.rows.push(row.clone());
    }

    fn set_costs(&mut self, phase_one: bool) {
        for j in 0..self.ncols() {
            self.cost[j] = match (phase_one, self.cols[j]) {
                (true, Column::Artificial(_)) => Rational::one(),
                (true, _) => Rational::zero(),
                (false, Column::Var(v)) => match self.sense {
                    Sense::Minimize => self.user_cost[v].clone(),
                    Sense::Maximize => -&self.user_cost[v],
                },
                (false, _) => Rational::zero(),
            };
        }
        self.recompute_reduced_costs();
    }

    fn recompute_reduced_costs(&mut self) {
        let mut d = self.cost.clone();
        for (i, row) in self.tab.iter().enumerate() {
            let cb = &self.cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                dj.sub_mul(cb, a);
            }
        }
        self.d = d;
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j].as_ref() == Some(&self.lower[j])
    }

    fn internal_objective(&self) -> Rational {
        self.cost.iter().zip(&self.val).map(|(c, v)| c * v).sum()
    }

    fn charge_pivot(&mut self) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > self.opts.pivot_budget {
            return Err(LpError::PivotBudget(self.opts.pivot_budget));
        }
        Ok(())
    }

    /// Moves nonbasic column `j` by `delta` and updates the basic values.
    fn shift_nonbasic(&mut self, j: usize, delta: &Rational) {
        if delta.is_zero() {
            return;
        }
        self.val[j] += delta;
        for i in 0..self.tab.len() {
            let a = &self.tab[i][j];
            if a.is_zero() {
                continue;
            }
            let b = self.basis[i];
            let change = a * delta;
            self.val[b] -= change;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.tab[r][j].clone();
        if !piv.is_one() {
            for v in self.tab[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &piv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.tab[r]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&k| !pivot_row[k].is_zero()).collect();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j].clone();
            if f.is_zero() {
                continue;
            }
            for &k in &nz {
                row[k].sub_mul(&f, &pivot_row[k]);
            }
        }
        let f = self.d[j].clone();
        if !f.is_zero() {
            for &k in &nz {
                self.d[k].sub_mul(&f, &pivot_row[k]);
            }
        }
        self.tab[r] = pivot_row;
        let leaving = self.basis[r];
        self.pos[leaving] = None;
        self.pos[j] = Some(r);
        self.basis[r] = j;
    }

    fn primal_step(&mut self) -> Result<Step, LpError> {
        // Entering column.
        let mut entering: Option<(usize, i64)> = None;
        let mut best_mag = Rational::zero();
        for j in 0..self.ncols() {
            if self.pos[j].is_some() || self.is_fixed(j) {
                continue;
            }
            let dj = &self.d[j];
            let dir = if !self.at_upper[j] && dj.is_negative() {
                1
            } else if self.at_upper[j] && dj.is_positive() {
                -1
            } else {
                continue;
            };
            match self.opts.rule {
                PivotRule::Bland => {
                    entering = Some((j, dir));
                    break;
                }
                PivotRule::LargestCoefficient => {
                    let mag = dj.abs();
                    if entering.is_none() || mag > best_mag {
                        best_mag = mag;
                        entering = Some((j, dir));
                    }
                }
            }
        }
        let Some((j, dir)) = entering else {
            return Ok(Step::Done);
        };
        self.charge_pivot()?;
        // Ratio test. Basic variable in row i moves by -tab[i][j]*dir per unit.
        let mut best: Option<(Rational, usize, usize)> = None; // (theta, column index, row)
        for i in 0..self.tab.len() {
            let a = &self.tab[i][j];
            if a.is_zero() {
                continue;
            }
            let b = self.basis[i];
            let rate = if dir > 0 { -a } else { a.clone() };
            let limit = if rate.is_negative() {
                (&self.val[b] - &self.lower[b]) / (-&rate)
            } else if let Some(u) = &self.upper[b] {
                (u - &self.val[b]) / &rate
            } else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((t, col, _)) => limit < *t || (limit == *t && b < *col),
            };
            if better {
                best = Some((limit, b, i));
            }
        }
        let flip = self.upper[j].as_ref().map(|u| u - &self.lower[j]);
        let take_flip = match (&flip, &best) {
            (Some(f), Some((t, _, _))) => f <= t,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if take_flip {
            let f = flip.unwrap();
            let delta = if dir > 0 { f } else { -f };
            self.shift_nonbasic(j, &delta);
            self.at_upper[j] = dir > 0;
            return Ok(Step::Pivoted);
        }
        let Some((theta, leaving, r)) = best else {
            return Ok(Step::Unbounded);
        };
        let delta = if dir > 0 { theta } else { -theta };
        self.shift_nonbasic(j, &delta);
        // Snap the leaving variable exactly onto the bound it reached.
        let rate_sign = -self.tab[r][j].signum() as i64 * dir;
        if rate_sign < 0 {
            self.val[leaving] = self.lower[leaving].clone();
            self.at_upper[leaving] = false;
        } else {
            self.val[leaving] = self.upper[leaving].clone().expect("bounded leaving variable");
            self.at_upper[leaving] = true;
        }
        self.pivot(r, j);
        Ok(Step::Pivoted)
    }

    fn run_primal(&mut self) -> Result<Status, LpError> {
        loop {
            match self.primal_step()? {
                Step::Pivoted => continue,
                Step::Done => return Ok(Status::Optimal),
                Step::Unbounded => return Ok(Status::Unbounded),
            }
        }
    }

    /// Dual simplex from a dual-feasible basis. Returns `Infeasible` when a
    /// violated row admits no entering column.
    fn run_dual(&mut self) -> Result<Status, LpError> {
        loop {
            // Leaving: smallest column index among bound violators.
            let mut leave: Option<(usize, usize, bool)> = None; // (col, row, below_lower)
            for (i, &b) in self.basis.iter().enumerate() {
                let below = self.val[b] < self.lower[b];
                let above = self.upper[b].as_ref().is_some_and(|u| &self.val[b] > u);
                if (below || above) && leave.is_none_or(|(c, _, _)| b < c) {
                    leave = Some((b, i, below));
                }
            }
            let Some((b, r, below)) = leave else {
                return Ok(Status::Optimal);
            };
            self.charge_pivot()?;
            // x_b = const - Σ tab[r][j] x_j; we need x_b to rise (below) or fall.
            let mut enter: Option<(Rational, usize, i64)> = None;
            for j in 0..self.ncols() {
                if self.pos[j].is_some() || self.is_fixed(j) {
                    continue;
                }
                let a = &self.tab[r][j];
                if a.is_zero() {
                    continue;
                }
                let dir: i64 = if self.at_upper[j] { -1 } else { 1 };
                // Rate of change of x_b per unit move of x_j in direction dir.
                let rising = (a.is_negative() && dir > 0) || (a.is_positive() && dir < 0);
                if rising != below {
                    continue;
                }
                let ratio = (&self.d[j] / a).abs();
                if enter.as_ref().is_none_or(|(t, _, _)| ratio < *t) {
                    enter = Some((ratio, j, dir));
                }
            }
            let Some((_, j, dir)) = enter else {
                return Ok(Status::Infeasible);
            };
            let target = if below {
                self.lower[b].clone()
            } else {
                self.upper[b].clone().unwrap()
            };
            // x_b changes by -a * delta when x_j changes by delta.
            let a = self.tab[r][j].clone();
            let delta = -(&target - &self.val[b]) / &a;
            debug_assert!(delta.signum() as i64 * dir >= 0);
            self.shift_nonbasic(j, &delta);
            self.val[b] = target;
            self.at_upper[b] = !below;
            self.pivot(r, j);
        }
    }

    /// Solves from the construction basis (two-phase primal simplex).
    pub fn solve(&mut self) -> Result<Status, LpError> {
        let has_art = self.cols.iter().any(|c| matches!(c, Column::Artificial(_)));
        if has_art {
            self.set_costs(true);
            let st = self.run_primal()?;
            debug_assert_eq!(st, Status::Optimal);
            if self.internal_objective().is_positive() {
                self.status = Some(Status::Infeasible);
                return Ok(Status::Infeasible);
            }
            for j in 0..self.ncols() {
                if matches!(self.cols[j], Column::Artificial(_)) {
                    self.upper[j] = Some(Rational::zero());
                    self.at_upper[j] = false;
                }
            }
        }
        self.set_costs(false);
        let st = self.run_primal()?;
        self.status = Some(st);
        Ok(st)
    }

    /// Re-optimizes after rows were added or bounds changed, starting from the
    /// current (dual-feasible) basis.
    pub fn reoptimize(&mut self) -> Result<Status, LpError> {
        match self.status {
            None => return self.solve(),
            Some(Status::Infeasible) => return Ok(Status::Infeasible),
            Some(Status::Unbounded) => return Err(LpError::NotOptimal(Status::Unbounded)),
            Some(Status::Optimal) => {}
        }
        let st = self.run_dual()?;
        if st == Status::Infeasible {
            self.status = Some(st);
            return Ok(st);
        }
        let st = self.run_primal()?;
        self.status = Some(st);
        Ok(st)
    }

    /// Appends a row to an optimally solved tableau with its slack basic. Call
    /// [`Simplex::reoptimize`] afterwards.
    pub fn add_row(&mut self, row: Row) -> Result<(), LpError> {
        if let Some((j, _)) = row.coeffs.iter().find(|(j, _)| *j >= self.nvars) {
            return Err(LpError::Malformed(format!("row references variable {j}")));
        }
        let i = self.rows.len();
        let sign = if row.relation == Relation::Ge { -1 } else { 1 };
        let s = self.new_column(Column::Slack(i), Rational::zero(), Self::slack_bounds(row.relation));
        let mut line = vec![Rational::zero(); self.ncols()];
        for (j, a) in &row.coeffs {
            line[*j] += a;
        }
        line[s] = Rational::from_int(sign);
        // Eliminate basic columns; tableau rows are zero on every other basic
        // column, so each elimination is independent.
        for &(j, _) in &row.coeffs {
            let Some(r) = self.pos[j] else { continue };
            let coef = line[j].clone();
            if coef.is_zero() {
                continue;
            }
            for (k, v) in self.tab[r].iter().enumerate() {
                if !v.is_zero() {
                    line[k].sub_mul(&coef, v);
                }
            }
        }
        if sign < 0 {
            for v in line.iter_mut() {
                *v = -&*v;
            }
        }
        debug_assert!(line[s].is_one());
        let activity = row.activity(&self.val[..self.nvars]);
        self.val[s] = (&row.rhs - &activity) * sign;
        self.tab.push(line);
        self.basis.push(s);
        self.pos[s] = Some(i);
        self.slack_col.push(s);
        self.slack_sign.push(sign);
        self.rows.push(row);
        Ok(())
    }

    /// Changes a structural variable's bounds in place, keeping the basis
    /// dual feasible. Call [`Simplex::reoptimize`] afterwards.
    pub fn set_bounds(&mut self, var: usize, lower: Rational, upper: Option<Rational>) {
        assert!(var < self.nvars);
        self.lower[var] = lower;
        self.upper[var] = upper;
        if self.pos[var].is_some() {
            return;
        }
        let use_upper = match &self.upper[var] {
            Some(u) if *u == self.lower[var] => false,
            Some(_) => self.d[var].is_negative() || (self.d[var].is_zero() && self.at_upper[var]),
            None => false,
        };
        let target = if use_upper {
            self.upper[var].clone().unwrap()
        } else {
            self.lower[var].clone()
        };
        self.at_upper[var] = use_upper;
        let delta = &target - &self.val[var];
        self.shift_nonbasic(var, &delta);
    }

    pub fn bounds(&self, var: usize) -> (&Rational, Option<&Rational>) {
        (&self.lower[var], self.upper[var].as_ref())
    }

    pub fn values(&self) -> &[Rational] {
        &self.val[..self.nvars]
    }

    pub fn value(&self, var: usize) -> &Rational {
        &self.val[var]
    }

    pub fn objective(&self) -> Rational {
        self.user_cost.iter().zip(&self.val).map(|(c, v)| c * v).sum()
    }

    /// Row duals in the user's sense: for a minimization they satisfy
    /// `c - Aᵀy = reduced cost`.
    pub fn row_duals(&self) -> Vec<Rational> {
        let flip = if self.sense == Sense::Maximize { -1 } else { 1 };
        (0..self.rows.len())
            .map(|i| {
                let s = self.slack_col[i];
                -(&self.d[s] / Rational::from_int(self.slack_sign[i])) * flip
            })
            .collect()
    }

    pub fn reduced_costs(&self) -> Vec<Rational> {
        let flip = if self.sense == Sense::Maximize { -1 } else { 1 };
        self.d[..self.nvars].iter().map(|d| d * flip).collect()
    }

    pub fn basis_members(&self) -> Vec<BasisMember> {
        let mut out: Vec<BasisMember> = self
            .basis
            .iter()
            .map(|&j| match self.cols[j] {
                Column::Var(v) => BasisMember::Var(v),
                Column::Slack(r) => BasisMember::Slack(r),
                Column::Artificial(r) => BasisMember::Artificial(r),
            })
            .collect();
        out.sort();
        out
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// The current model as a standalone [`LinearProgram`].
    pub fn program(&self) -> LinearProgram {
        LinearProgram {
            sense: self.sense,
            objective: self.user_cost.clone(),
            lower: self.lower[..self.nvars].to_vec(),
            upper: self.upper[..self.nvars].to_vec(),
            rows: self.rows.clone(),
        }
    }

    pub fn snapshot(&self) -> BasicSolution {
        let status = self.status.unwrap_or(Status::Infeasible);
        BasicSolution {
            status,
            values: self.values().to_vec(),
            objective: self.objective(),
            basis: self.basis_members(),
            row_duals: self.row_duals(),
            reduced_costs: self.reduced_costs(),
            state: Arc::new(self.clone()),
        }
    }
}

/// A solved LP: the vertex, its basis and the dual information that
/// certifies optimality. Holds the solver state so rows can be appended.
#[derive(Debug, Clone)]
pub struct BasicSolution {
    pub status: Status,
    pub values: Vec<Rational>,
    pub objective: Rational,
    pub basis: Vec<BasisMember>,
    pub row_duals: Vec<Rational>,
    pub reduced_costs: Vec<Rational>,
    state: Arc<Simplex>,
}

impl BasicSolution {
    pub fn solver(&self) -> &Simplex {
        &self.state
    }

    pub fn program(&self) -> LinearProgram {
        self.state.program()
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<BasicSolution, LpError> {
    simplex_solve_with(lp, SimplexOptions::default())
}

pub fn simplex_solve_with(lp: &LinearProgram, opts: SimplexOptions) -> Result<BasicSolution, LpError> {
    let mut s = Simplex::new(lp, opts)?;
    s.solve()?;
    Ok(s.snapshot())
}

/// Appends `row` to the LP behind an optimal `sol` and re-solves warm.
pub fn add_row_and_resolve(sol: &BasicSolution, row: Row) -> Result<BasicSolution, LpError> {
    if sol.status != Status::Optimal {
        return Err(LpError::NotOptimal(sol.status));
    }
    let mut s = (*sol.state).clone();
    s.add_row(row)?;
    s.reoptimize()?;
    Ok(s.snapshot())
}

/// Independent optimality check of a claimed optimal solution: primal
/// feasibility, dual sign conditions, complementary slackness and equal
/// objectives, all exact. Returns a description of the first failure.
pub fn verify_optimality(lp: &LinearProgram, sol: &BasicSolution) -> Result<(), String> {
    if sol.status != Status::Optimal {
        return Err(format!("status is {:?}", sol.status));
    }
    let x = &sol.values;
    if !lp.is_feasible(x) {
        return Err("solution is not primal feasible".into());
    }
    if lp.objective_value(x) != sol.objective {
        return Err("reported objective differs from c·x".into());
    }
    let y = &sol.row_duals;
    if y.len() != lp.rows.len() {
        return Err("dual vector length mismatch".into());
    }
    // Work in minimization form.
    let flip = if lp.sense == Sense::Maximize { -1 } else { 1 };
    let mut reduced: Vec<Rational> = lp.objective.iter().map(|c| c * flip).collect();
    for (row, yi) in lp.rows.iter().zip(y) {
        let yi = yi * flip;
        let tight = row.activity(x) == row.rhs;
        let ok = match row.relation {
            Relation::Eq => true,
            Relation::Le => !yi.is_positive(),
            Relation::Ge => !yi.is_negative(),
        };
        if !ok {
            return Err("row dual has the wrong sign".into());
        }
        if !tight && !yi.is_zero() {
            return Err("complementary slackness fails on a slack row".into());
        }
        for (j, a) in &row.coeffs {
            reduced[*j].sub_mul(&yi, a);
        }
    }
    let mut dual_obj: Rational = lp.rows.iter().zip(y).map(|(r, yi)| &r.rhs * &(yi * flip)).sum();
    for j in 0..lp.num_vars() {
        let rj = &reduced[j];
        let at_lower = x[j] == lp.lower[j];
        let at_upper = lp.upper[j].as_ref() == Some(&x[j]);
        let ok = if at_lower && at_upper {
            true
        } else if at_lower {
            !rj.is_negative()
        } else if at_upper {
            !rj.is_positive()
        } else {
            rj.is_zero()
        };
        if !ok {
            return Err(format!("reduced cost of variable {j} has the wrong sign"));
        }
        dual_obj += rj * &x[j];
    }
    if dual_obj != sol.objective.clone() * flip {
        return Err("dual objective differs from primal objective".into());
    }
    Ok(())
}

/// Rank of a dense rational matrix by exact Gaussian elimination.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let piv = m[rank][c].clone();
        let prow = m[rank].clone();
        for r in 0..m.len() {
            if r == rank || m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &piv;
            for k in c..ncols {
                if !prow[k].is_zero() {
                    m[r][k].sub_mul(&f, &prow[k]);
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}
