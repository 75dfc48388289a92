//! Two-phase primal simplex over exact scalars with Bland's rule.

use std::collections::BTreeMap;

use super::{LpProblem, Relation};
use crate::scalar::Scalar;

/// Result of an optimization run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome<S> {
    /// An optimal (or, without objective, feasible) assignment, one entry per variable.
    Optimal(Vec<S>),
    Infeasible,
    Unbounded,
}

/// How a problem variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum Split {
    NonNeg(usize),
    Free(usize, usize),
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    obj: Vec<S>,
    obj_rhs: S,
    allowed: Vec<bool>,
}

impl<S: Scalar> Tableau<S> {
    fn width(&self) -> usize {
        self.allowed.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.clone() / p.clone();
                }
            }
            self.rhs[r] = self.rhs[r].clone() / p;
        }
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            eliminate(&mut self.rows[i], &mut self.rhs[i], &pivot_row, &pivot_rhs, &f);
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            eliminate(&mut self.obj, &mut self.obj_rhs, &pivot_row, &pivot_rhs, &f);
        }
        self.basis[r] = c;
    }

    /// Installs `cost` (to be maximized) as the objective row.
    fn set_objective(&mut self, cost: &[S]) {
        self.obj = cost.iter().map(|c| -c.clone()).collect();
        self.obj_rhs = S::zero();
        for i in 0..self.rows.len() {
            let cb = cost[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            let (row, rhs) = (self.rows[i].clone(), self.rhs[i].clone());
            let neg = -cb;
            eliminate(&mut self.obj, &mut self.obj_rhs, &row, &rhs, &neg);
        }
    }

    /// Runs primal simplex; returns false if the objective is unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let entering =
                (0..self.width()).find(|&j| self.allowed[j] && self.obj[j].is_negative() && !self.basis.contains(&j));
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].clone() / a.clone();
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }
}

fn eliminate<S: Scalar>(row: &mut [S], rhs: &mut S, pivot_row: &[S], pivot_rhs: &S, f: &S) {
    for (v, p) in row.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *v = v.clone() - f.clone() * p.clone();
        }
    }
    if !pivot_rhs.is_zero() {
        *rhs = rhs.clone() - f.clone() * pivot_rhs.clone();
    }
}

/// Variables pinned nonnegative by a single-variable row `a·x ≥ 0` (a > 0) or
/// `a·x ≤ 0` (a < 0). Such rows become column bounds instead of tableau rows.
fn sign_rows<S: Scalar>(p: &LpProblem<S>) -> (Vec<bool>, Vec<bool>) {
    let mut nonneg = vec![false; p.variables.len()];
    let mut is_bound = vec![false; p.constraints.len()];
    for (k, c) in p.constraints.iter().enumerate() {
        let mut nz = c.coefficients.iter().filter(|(_, a)| !a.is_zero());
        let (Some((&v, a)), None) = (nz.next(), nz.next()) else { continue };
        let pinned = c.rhs.is_zero()
            && match c.relation {
                Relation::Geq => a.is_positive(),
                Relation::Leq => a.is_negative(),
                Relation::Eq => false,
            };
        if pinned {
            nonneg[v] = true;
            is_bound[k] = true;
        }
    }
    (nonneg, is_bound)
}

/// Maximizes `objective · x` subject to the base constraints of `p`.
///
/// Candidates are ignored. An empty objective turns this into a pure
/// feasibility check.
pub fn optimize<S: Scalar>(p: &LpProblem<S>, objective: &BTreeMap<usize, S>) -> LpOutcome<S> {
    let nvars = p.variables.len();
    let (nonneg, is_bound) = sign_rows(p);
    let mut splits = Vec::with_capacity(nvars);
    let mut ncols = 0;
    for &nn in &nonneg {
        if nn {
            splits.push(Split::NonNeg(ncols));
            ncols += 1;
        } else {
            splits.push(Split::Free(ncols, ncols + 1));
            ncols += 2;
        }
    }
    let structural = ncols;
    let rows_src: Vec<_> = p.constraints.iter().zip(&is_bound).filter(|(_, &b)| !b).map(|(c, _)| c).collect();
    let slack_count = rows_src.iter().filter(|c| c.relation != Relation::Eq).count();
    let m = rows_src.len();
    let width_before_art = structural + slack_count;

    let mut rows: Vec<Vec<S>> = Vec::with_capacity(m);
    let mut rhs: Vec<S> = Vec::with_capacity(m);
    let mut slack_of_row: Vec<Option<usize>> = Vec::with_capacity(m);
    let mut next_slack = structural;
    for c in &rows_src {
        let mut row = vec![S::zero(); width_before_art];
        for (&v, a) in &c.coefficients {
            match splits[v] {
                Split::NonNeg(j) => row[j] = row[j].clone() + a.clone(),
                Split::Free(j, k) => {
                    row[j] = row[j].clone() + a.clone();
                    row[k] = row[k].clone() - a.clone();
                }
            }
        }
        let slack = match c.relation {
            Relation::Eq => None,
            Relation::Leq => {
                row[next_slack] = S::one();
                next_slack += 1;
                Some(next_slack - 1)
            }
            Relation::Geq => {
                row[next_slack] = -S::one();
                next_slack += 1;
                Some(next_slack - 1)
            }
        };
        let mut b = c.rhs.clone();
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        rows.push(row);
        rhs.push(b);
        slack_of_row.push(slack);
    }

    // Rows whose slack has coefficient +1 start with the slack basic; the rest get an artificial.
    let mut basis = vec![0; m];
    let mut art_rows = Vec::new();
    for i in 0..m {
        match slack_of_row[i] {
            Some(s) if rows[i][s].is_one() => basis[i] = s,
            _ => art_rows.push(i),
        }
    }
    let width = width_before_art + art_rows.len();
    for row in rows.iter_mut() {
        row.resize(width, S::zero());
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][width_before_art + k] = S::one();
        basis[i] = width_before_art + k;
    }

    let mut t =
        Tableau { rows, rhs, basis, obj: vec![S::zero(); width], obj_rhs: S::zero(), allowed: vec![true; width] };

    if !art_rows.is_empty() {
        let mut cost = vec![S::zero(); width];
        for c in cost.iter_mut().skip(width_before_art) {
            *c = -S::one();
        }
        t.set_objective(&cost);
        t.optimize();
        if !t.obj_rhs.is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= width_before_art {
                match (0..width_before_art).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for a in t.allowed.iter_mut().skip(width_before_art) {
            *a = false;
        }
    }

    let mut cost = vec![S::zero(); width];
    for (&v, c) in objective {
        match splits[v] {
            Split::NonNeg(j) => cost[j] = c.clone(),
            Split::Free(j, k) => {
                cost[j] = c.clone();
                cost[k] = -c.clone();
            }
        }
    }
    t.set_objective(&cost);
    if !t.optimize() {
        return LpOutcome::Unbounded;
    }

    let mut col = vec![S::zero(); width];
    for (i, &b) in t.basis.iter().enumerate() {
        col[b] = t.rhs[i].clone();
    }
    let assignment = splits
        .iter()
        .map(|s| match *s {
            Split::NonNeg(j) => col[j].clone(),
            Split::Free(j, k) => col[j].clone() - col[k].clone(),
        })
        .collect();
    LpOutcome::Optimal(assignment)
}
