//! Exact rational two-phase simplex with Bland's smallest-index rule.
//!
//! Desk-scale by design: dense tableau, arbitrary-precision rationals, no
//! presolve, no floats. Bland's rule makes every run deterministic and
//! cycle-free, which the brute-force oracles rely on for reproducible ground
//! truth. Variables are free unless flagged nonnegative.

use std::cmp::Ordering;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat, Rational};

pub const MAX_LP_VARS: usize = 4096;
pub const MAX_LP_ROWS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// A linear program over real variables (free by default, nonnegative when
/// flagged).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub maximize: bool,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    /// `nonneg[j]` restricts variable `j` to `x_j ≥ 0`.
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            maximize: true,
            objective,
            constraints: Vec::new(),
            nonneg: vec![false; n],
        }
    }

    pub fn minimize(objective: Vec<Rational>) -> Self {
        LinearProgram {
            maximize: false,
            ..LinearProgram::maximize(objective)
        }
    }

    pub fn le(mut self, coeffs: Vec<Rational>, rhs: Rational) -> Self {
        self.constraints.push(Constraint {
            coeffs,
            sense: Sense::Le,
            rhs,
        });
        self
    }

    pub fn ge(mut self, coeffs: Vec<Rational>, rhs: Rational) -> Self {
        self.constraints.push(Constraint {
            coeffs,
            sense: Sense::Ge,
            rhs,
        });
        self
    }

    pub fn eq(mut self, coeffs: Vec<Rational>, rhs: Rational) -> Self {
        self.constraints.push(Constraint {
            coeffs,
            sense: Sense::Eq,
            rhs,
        });
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if n > MAX_LP_VARS {
            return Err(Error::Size {
                what: "linear program variables",
                limit: MAX_LP_VARS,
                got: n,
            });
        }
        if self.constraints.len() > MAX_LP_ROWS {
            return Err(Error::Size {
                what: "linear program rows",
                limit: MAX_LP_ROWS,
                got: self.constraints.len(),
            });
        }
        if self.nonneg.len() != n {
            return Err(Error::input("nonneg flags must match variable count".to_string()));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::input(format!(
                    "constraint {r} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
        }
        Ok(())
    }

    /// Exact feasibility check of a candidate point.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.n_vars() {
            return false;
        }
        if self.nonneg.iter().zip(x).any(|(&nn, v)| nn && v.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            match c.sense {
                Sense::Le => lhs <= c.rhs,
                Sense::Ge => lhs >= c.rhs,
                Sense::Eq => lhs == c.rhs,
            }
        })
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Solves by primal two-phase simplex. Deterministic; the returned optimum is
/// a basic solution of the standard-form tableau.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    Ok(solve_with_prices(lp)?.0)
}

/// Like [`lp_solve`], additionally returning the dual prices of the rows
/// (as duals of the minimization form of the problem, sign-corrected for
/// internal row normalization). Only meaningful at `Optimal`.
pub(crate) fn solve_with_prices(lp: &LinearProgram) -> Result<(LpOutcome, Option<Vec<Rational>>)> {
    lp.validate()?;
    let mut t = Tableau::build(lp);
    if !t.phase1() {
        return Ok((LpOutcome::Infeasible, None));
    }
    if !t.phase2() {
        return Ok((LpOutcome::Unbounded, None));
    }
    let point = t.extract_point();
    let value = lp.objective_at(&point);
    let prices = t.extract_prices();
    Ok((LpOutcome::Optimal { value, point }, Some(prices)))
}

#[derive(Clone, Copy)]
enum ColKind {
    /// Positive part of variable `j` (or the whole variable if nonnegative).
    Plus(usize),
    /// Negative part of a free variable `j`.
    Minus(usize),
    Slack,
    Artificial(usize),
}

struct Tableau {
    /// `rows[r]` is the constraint matrix under the current basis inverse.
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    /// Reduced costs of the minimized objective.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    cols: Vec<ColKind>,
    /// Columns allowed to enter the basis (artificials are not).
    eligible: Vec<bool>,
    /// −1 where the original row was negated during normalization.
    row_sign: Vec<i8>,
    /// Minimization objective per column (phase 2).
    phase2_cost: Vec<Rational>,
    n_vars: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.n_vars();
        let m = lp.constraints.len();

        // Minimization objective over structural columns.
        let min_obj: Vec<Rational> = if lp.maximize {
            lp.objective.iter().map(|c| -c).collect()
        } else {
            lp.objective.clone()
        };

        let mut cols: Vec<ColKind> = Vec::new();
        let mut col_of_plus = vec![0usize; n];
        let mut col_of_minus = vec![usize::MAX; n];
        for j in 0..n {
            col_of_plus[j] = cols.len();
            cols.push(ColKind::Plus(j));
            if !lp.nonneg[j] {
                col_of_minus[j] = cols.len();
                cols.push(ColKind::Minus(j));
            }
        }
        // One slack per inequality row, one artificial per row.
        let mut slack_col = vec![usize::MAX; m];
        for (r, c) in lp.constraints.iter().enumerate() {
            if c.sense != Sense::Eq {
                slack_col[r] = cols.len();
                cols.push(ColKind::Slack);
            }
        }
        let art_base = cols.len();
        for r in 0..m {
            cols.push(ColKind::Artificial(r));
        }
        let ncols = cols.len();

        let mut rows = vec![vec![rat(0); ncols]; m];
        let mut rhs = vec![rat(0); m];
        let mut row_sign = vec![1i8; m];
        for (r, c) in lp.constraints.iter().enumerate() {
            // Flip Ge to Le so every slack enters with +1.
            let flip_sense = c.sense == Sense::Ge;
            let mut b = if flip_sense { -c.rhs.clone() } else { c.rhs.clone() };
            let mut sign = if flip_sense { -1i8 } else { 1 };
            // Normalize to b ≥ 0.
            let flip_rhs = b.is_negative();
            if flip_rhs {
                b = -b;
                sign = -sign;
            }
            let scale = rat(if flip_sense != flip_rhs { -1 } else { 1 });
            for j in 0..n {
                let a = &c.coeffs[j] * &scale;
                rows[r][col_of_plus[j]] = a.clone();
                if col_of_minus[j] != usize::MAX {
                    rows[r][col_of_minus[j]] = -a;
                }
            }
            if slack_col[r] != usize::MAX {
                // Slack was +1 in the Le form; row negation flips it.
                rows[r][slack_col[r]] = if flip_rhs { rat(-1) } else { rat(1) };
            }
            rows[r][art_base + r] = rat(1);
            rhs[r] = b;
            row_sign[r] = sign;
        }

        // Initial basis: slack where it sits at +1, artificial otherwise.
        let mut basis = vec![0usize; m];
        for r in 0..m {
            basis[r] = if slack_col[r] != usize::MAX && rows[r][slack_col[r]] == rat(1) {
                slack_col[r]
            } else {
                art_base + r
            };
        }

        let mut phase2_cost = vec![rat(0); ncols];
        for (j, kind) in cols.iter().enumerate() {
            match kind {
                ColKind::Plus(v) => phase2_cost[j] = min_obj[*v].clone(),
                ColKind::Minus(v) => phase2_cost[j] = -min_obj[*v].clone(),
                _ => {}
            }
        }

        let eligible = cols
            .iter()
            .map(|k| !matches!(k, ColKind::Artificial(_)))
            .collect();

        Tableau {
            rows,
            rhs,
            cost: vec![rat(0); ncols],
            basis,
            cols,
            eligible,
            row_sign,
            phase2_cost,
            n_vars: n,
        }
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Installs an objective and prices out the current basis.
    fn load_cost(&mut self, raw: &[Rational]) {
        self.cost = raw.to_vec();
        for r in 0..self.rows.len() {
            let cb = self.cost[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            let row = self.rows[r].clone();
            for (cost, entry) in self.cost.iter_mut().zip(&row) {
                if !entry.is_zero() {
                    *cost -= &cb * entry;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        debug_assert!(!p.is_zero());
        for e in self.rows[r].iter_mut() {
            if !e.is_zero() {
                *e /= &p;
            }
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for rr in 0..self.rows.len() {
            if rr == r {
                continue;
            }
            let f = self.rows[rr][j].clone();
            if f.is_zero() {
                continue;
            }
            for (e, pe) in self.rows[rr].iter_mut().zip(&pivot_row) {
                if !pe.is_zero() {
                    *e -= &f * pe;
                }
            }
            if !pivot_rhs.is_zero() {
                self.rhs[rr] -= &f * &pivot_rhs;
            }
        }
        let f = self.cost[j].clone();
        if !f.is_zero() {
            for (e, pe) in self.cost.iter_mut().zip(&pivot_row) {
                if !pe.is_zero() {
                    *e -= &f * pe;
                }
            }
        }
        self.basis[r] = j;
    }

    /// Bland pivoting until optimal; `false` means unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            // Entering: smallest-index eligible column with negative reduced
            // cost.
            let entering = (0..self.ncols())
                .find(|&j| self.eligible[j] && self.cost[j].is_negative());
            let Some(j) = entering else {
                return true;
            };
            // Leaving: lexicographically by (ratio, basic variable index).
            let mut leave: Option<usize> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][j].is_positive() {
                    continue;
                }
                leave = Some(match leave {
                    None => r,
                    Some(lr) => {
                        // rhs[r]/a[r][j] vs rhs[lr]/a[lr][j], cross-multiplied
                        // (both pivots positive).
                        let left = &self.rhs[r] * &self.rows[lr][j];
                        let right = &self.rhs[lr] * &self.rows[r][j];
                        match left.cmp(&right) {
                            Ordering::Less => r,
                            Ordering::Greater => lr,
                            Ordering::Equal => {
                                if self.basis[r] < self.basis[lr] {
                                    r
                                } else {
                                    lr
                                }
                            }
                        }
                    }
                });
            }
            match leave {
                Some(r) => self.pivot(r, j),
                None => return false,
            }
        }
    }

    /// Returns false when infeasible.
    fn phase1(&mut self) -> bool {
        let raw: Vec<Rational> = self
            .cols
            .iter()
            .map(|k| {
                if matches!(k, ColKind::Artificial(_)) {
                    rat(1)
                } else {
                    rat(0)
                }
            })
            .collect();
        self.load_cost(&raw);
        let bounded = self.optimize();
        debug_assert!(bounded, "phase 1 objective is bounded below by zero");

        let residue: Rational = (0..self.rows.len())
            .filter(|&r| matches!(self.cols[self.basis[r]], ColKind::Artificial(_)))
            .map(|r| self.rhs[r].clone())
            .sum();
        if !residue.is_zero() {
            return false;
        }

        // Drive surviving artificials out of the basis with degenerate
        // pivots; rows with no eligible nonzero entry are redundant and stay
        // parked on their zero-valued artificial.
        for r in 0..self.rows.len() {
            if !matches!(self.cols[self.basis[r]], ColKind::Artificial(_)) {
                continue;
            }
            debug_assert!(self.rhs[r].is_zero());
            let j = (0..self.ncols()).find(|&j| self.eligible[j] && !self.rows[r][j].is_zero());
            if let Some(j) = j {
                self.pivot(r, j);
            }
        }
        true
    }

    /// Returns false when unbounded.
    fn phase2(&mut self) -> bool {
        let raw = self.phase2_cost.clone();
        self.load_cost(&raw);
        self.optimize()
    }

    fn extract_point(&self) -> Vec<Rational> {
        let mut x = vec![rat(0); self.n_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            match self.cols[b] {
                ColKind::Plus(v) => x[v] += &self.rhs[r],
                ColKind::Minus(v) => x[v] -= &self.rhs[r],
                _ => {}
            }
        }
        x
    }

    /// Duals of the minimized problem, one per original row: read off the
    /// reduced costs of the artificial columns and undo row normalization.
    fn extract_prices(&self) -> Vec<Rational> {
        let mut out = vec![rat(0); self.rows.len()];
        for (j, kind) in self.cols.iter().enumerate() {
            if let ColKind::Artificial(r) = kind {
                let pi = -self.cost[j].clone();
                out[*r] = if self.row_sign[*r] < 0 { -pi } else { pi };
            }
        }
        out
    }
}

/// Solves `lp` through its dual: for programs with many rows and few
/// variables the dual tableau is far smaller. The primal point is recovered
/// from the dual prices and re-verified exactly; any ambiguity falls back to
/// the direct primal solve.
pub fn lp_solve_dualized(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;

    // Normalize to a maximization with Le/Eq rows.
    let n = lp.n_vars();
    let obj: Vec<Rational> = if lp.maximize {
        lp.objective.clone()
    } else {
        lp.objective.iter().map(|c| -c).collect()
    };
    let mut rows: Vec<(Vec<Rational>, Rational, bool)> = Vec::new(); // (coeffs, rhs, is_eq)
    for c in &lp.constraints {
        match c.sense {
            Sense::Le => rows.push((c.coeffs.clone(), c.rhs.clone(), false)),
            Sense::Ge => rows.push((
                c.coeffs.iter().map(|a| -a).collect(),
                -c.rhs.clone(),
                false,
            )),
            Sense::Eq => rows.push((c.coeffs.clone(), c.rhs.clone(), true)),
        }
    }

    // Dual: minimize bᵀy, s.t. for each primal variable j:
    //   Σ_i A_ij y_i  (= obj_j when x_j free, ≥ obj_j when x_j ≥ 0),
    // y_i ≥ 0 on inequality rows, free on equality rows.
    let m = rows.len();
    let mut dual = LinearProgram::minimize(rows.iter().map(|(_, b, _)| b.clone()).collect());
    dual.nonneg = rows.iter().map(|(_, _, is_eq)| !is_eq).collect();
    for j in 0..n {
        let col: Vec<Rational> = rows.iter().map(|(a, _, _)| a[j].clone()).collect();
        if lp.nonneg[j] {
            dual = dual.ge(col, obj[j].clone());
        } else {
            dual = dual.eq(col, obj[j].clone());
        }
    }
    debug_assert_eq!(dual.constraints.len(), n);
    debug_assert_eq!(dual.n_vars(), m);

    let (outcome, prices) = solve_with_prices(&dual)?;
    match outcome {
        LpOutcome::Unbounded => Ok(LpOutcome::Infeasible),
        LpOutcome::Infeasible => lp_solve(lp),
        LpOutcome::Optimal { value, .. } => {
            let x = prices.expect("prices accompany optimal outcomes");
            let candidate_value = if lp.maximize { value } else { -value };
            if lp.is_feasible(&x) && lp.objective_at(&x) == candidate_value {
                Ok(LpOutcome::Optimal {
                    value: candidate_value,
                    point: x,
                })
            } else {
                // Degenerate price recovery; certify via the direct route.
                lp_solve(lp)
            }
        }
    }
}
