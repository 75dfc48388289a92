//! Exact rational linear programming.
//!
//! Problems are systems of linear (in)equalities over free variables, plus an
//! optional list of *candidates*: homogeneous inequalities we would like to
//! hold strictly. For homogeneous systems the solution set is a convex cone,
//! so a candidate is achievable iff `candidate ≥ 1` is feasible, and summing
//! one witness per achievable candidate yields a single solution that makes
//! all of them strict at once.

pub mod linalg;
mod simplex;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::scalar::{denominator_lcm, Scalar};

pub use simplex::{optimize, LpOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Geq,
    Leq,
}

/// `Σ coefficients[v]·x_v  relation  rhs`; variables are indices into
/// [`LpProblem::variables`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint<S> {
    pub coefficients: BTreeMap<usize, S>,
    pub relation: Relation,
    pub rhs: S,
}

impl<S: Scalar> LinearConstraint<S> {
    pub fn new(relation: Relation, rhs: S) -> Self {
        LinearConstraint { coefficients: BTreeMap::new(), relation, rhs }
    }

    /// Adds `coeff` to the coefficient of `var`, dropping exact zeros.
    pub fn add(&mut self, var: usize, coeff: S) -> &mut Self {
        let e = self.coefficients.entry(var).or_insert_with(S::zero);
        *e = e.clone() + coeff;
        if e.is_zero() {
            self.coefficients.remove(&var);
        }
        self
    }

    pub fn with(mut self, var: usize, coeff: S) -> Self {
        self.add(var, coeff);
        self
    }

    pub fn lhs(&self, x: &[S]) -> S {
        self.coefficients.iter().fold(S::zero(), |acc, (&v, a)| acc + a.clone() * x[v].clone())
    }

    pub fn holds(&self, x: &[S]) -> bool {
        let l = self.lhs(x);
        match self.relation {
            Relation::Eq => l == self.rhs,
            Relation::Geq => l >= self.rhs,
            Relation::Leq => l <= self.rhs,
        }
    }

    /// For a `Geq 0` / `Leq 0` candidate: does `x` satisfy it strictly?
    pub fn strict_at(&self, x: &[S]) -> bool {
        let l = self.lhs(x);
        match self.relation {
            Relation::Geq => l > self.rhs,
            Relation::Leq => l < self.rhs,
            Relation::Eq => false,
        }
    }

    /// Signed slack in the candidate's strict direction (positive means strict).
    fn margin(&self, x: &[S]) -> S {
        let l = self.lhs(x) - self.rhs.clone();
        match self.relation {
            Relation::Leq => -l,
            _ => l,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem<S> {
    pub variables: Vec<String>,
    pub constraints: Vec<LinearConstraint<S>>,
    /// Desired strict inequalities, each `Geq 0` or `Leq 0`.
    pub candidates: Vec<LinearConstraint<S>>,
}

impl<S: Scalar> LpProblem<S> {
    pub fn new() -> Self {
        LpProblem { variables: Vec::new(), constraints: Vec::new(), candidates: Vec::new() }
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> usize {
        self.variables.push(name.into());
        self.variables.len() - 1
    }

    pub fn variable(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.constraints.iter().chain(&self.candidates).all(|c| c.rhs.is_zero())
    }

    /// Exact substitution check of every base constraint.
    pub fn satisfied_by(&self, x: &[S]) -> bool {
        x.len() == self.variables.len() && self.constraints.iter().all(|c| c.holds(x))
    }
}

impl<S: Scalar> Default for LpProblem<S> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution<S> {
    /// One value per variable, in declaration order.
    pub assignment: Vec<S>,
    /// Indices of candidates holding with value ≥ 1.
    pub achieved_strict: BTreeSet<usize>,
}

impl<S: Scalar> LpSolution<S> {
    pub fn value(&self, p: &LpProblem<S>, name: &str) -> Option<&S> {
        p.variable(name).map(|i| &self.assignment[i])
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("strict-count maximization needs a homogeneous system (all right-hand sides zero)")]
    NonHomogeneousSystem,
    #[error("candidate {0} must be a `>= 0` or `<= 0` inequality")]
    InvalidCandidate(usize),
}

/// Finds some assignment satisfying the base constraints, ignoring candidates.
pub fn solve_feasibility<S: Scalar>(p: &LpProblem<S>) -> Option<LpSolution<S>> {
    match optimize(p, &BTreeMap::new()) {
        LpOutcome::Optimal(assignment) => {
            debug_assert!(p.satisfied_by(&assignment));
            Some(LpSolution { assignment, achieved_strict: BTreeSet::new() })
        }
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// Computes a solution in which every individually achievable candidate
/// holds strictly (with value ≥ 1).
///
/// Each candidate is probed as `base ∧ every candidate non-strict ∧ this
/// candidate ≥ 1`. A candidate already strict in an earlier witness is not
/// probed again. The witnesses are summed and the sum rescaled so each
/// achieved candidate reaches 1.
pub fn maximize_strict_count<S: Scalar>(p: &LpProblem<S>) -> Result<LpSolution<S>, LpError> {
    if !p.is_homogeneous() {
        return Err(LpError::NonHomogeneousSystem);
    }
    if let Some(i) = p.candidates.iter().position(|c| c.relation == Relation::Eq) {
        return Err(LpError::InvalidCandidate(i));
    }
    let mut base = p.clone();
    base.candidates.clear();
    base.constraints.extend(p.candidates.iter().cloned());

    let mut sum = vec![S::zero(); p.variables.len()];
    let mut achieved = BTreeSet::new();
    for (i, cand) in p.candidates.iter().enumerate() {
        if achieved.contains(&i) {
            continue;
        }
        let mut probe = base.clone();
        let mut strict = cand.clone();
        strict.rhs = match cand.relation {
            Relation::Leq => -S::one(),
            _ => S::one(),
        };
        probe.constraints.push(strict);
        let Some(w) = solve_feasibility(&probe) else { continue };
        for (s, v) in sum.iter_mut().zip(&w.assignment) {
            *s = s.clone() + v.clone();
        }
        for (j, c) in p.candidates.iter().enumerate() {
            if c.strict_at(&w.assignment) {
                achieved.insert(j);
            }
        }
    }
    let min_margin = achieved.iter().map(|&j| p.candidates[j].margin(&sum)).min();
    if let Some(m) = min_margin {
        if m < S::one() {
            for s in sum.iter_mut() {
                *s = s.clone() / m.clone();
            }
        }
    }
    debug_assert!(p.satisfied_by(&sum));
    Ok(LpSolution { assignment: sum, achieved_strict: achieved })
}

/// Multiplies a homogeneous solution by the LCM of its denominators.
///
/// The result is integral, so every nonzero entry already has magnitude ≥ 1;
/// `min_nonzero_one` is accepted for symmetry with callers that require it.
pub fn scale_to_integers<S: Scalar>(s: &LpSolution<S>, min_nonzero_one: bool) -> LpSolution<S> {
    let l = denominator_lcm(&s.assignment);
    let factor = S::from_rational(&crate::Rational::from_integer(l)).expect("scaling factor exceeds the scalar range");
    let assignment: Vec<S> = s.assignment.iter().map(|v| v.clone() * factor.clone()).collect();
    if min_nonzero_one {
        debug_assert!(assignment.iter().all(|v| v.is_zero() || v.abs() >= S::one()));
    }
    LpSolution { assignment, achieved_strict: s.achieved_strict.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational64 as Q;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn one_var() -> LpProblem<Q> {
        let mut p = LpProblem::new();
        p.add_variable("x");
        p
    }

    #[test]
    fn feasible_lower_bound() {
        let mut p = one_var();
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(0)).with(0, q(1)));
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(1)).with(0, q(1)));
        let s = solve_feasibility(&p).unwrap();
        assert_eq!(s.assignment, vec![q(1)]);
    }

    #[test]
    fn infeasible_bounds() {
        let mut p = one_var();
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(0)).with(0, q(1)));
        p.constraints.push(LinearConstraint::new(Relation::Leq, q(-1)).with(0, q(1)));
        assert!(solve_feasibility(&p).is_none());
    }

    #[test]
    fn free_variable_goes_negative() {
        let mut p = one_var();
        p.constraints.push(LinearConstraint::new(Relation::Eq, q(-3)).with(0, q(2)));
        assert_eq!(solve_feasibility(&p).unwrap().assignment, vec![Q::new(-3, 2)]);
    }

    #[test]
    fn strict_count_simple() {
        let mut p = one_var();
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(0)).with(0, q(1)));
        p.candidates.push(LinearConstraint::new(Relation::Geq, q(0)).with(0, q(1)));
        let s = maximize_strict_count(&p).unwrap();
        assert_eq!(s.achieved_strict, BTreeSet::from([0]));
        assert_eq!(s.assignment, vec![q(1)]);
    }

    #[test]
    fn strict_count_blocked() {
        let mut p = one_var();
        p.constraints.push(LinearConstraint::new(Relation::Eq, q(0)).with(0, q(1)));
        p.candidates.push(LinearConstraint::new(Relation::Geq, q(0)).with(0, q(1)));
        let s = maximize_strict_count(&p).unwrap();
        assert!(s.achieved_strict.is_empty());
        assert_eq!(s.assignment, vec![q(0)]);
    }

    #[test]
    fn rejects_inhomogeneous() {
        let mut p = one_var();
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(1)).with(0, q(1)));
        assert_eq!(maximize_strict_count(&p), Err(LpError::NonHomogeneousSystem));
    }

    #[test]
    fn scaling_examples() {
        let s = LpSolution { assignment: vec![Q::new(1, 2)], achieved_strict: BTreeSet::new() };
        assert_eq!(scale_to_integers(&s, false).assignment, vec![q(1)]);
        let s = LpSolution { assignment: vec![Q::new(2, 3), Q::new(1, 6)], achieved_strict: BTreeSet::from([0]) };
        let t = scale_to_integers(&s, true);
        assert_eq!(t.assignment, vec![q(4), q(1)]);
        assert_eq!(t.achieved_strict, s.achieved_strict);
        let z = LpSolution { assignment: vec![q(0), q(0)], achieved_strict: BTreeSet::new() };
        assert_eq!(scale_to_integers(&z, true), z);
    }

    #[test]
    fn maximizes_objective() {
        // max x + y  s.t. x + 2y ≤ 4, 3x + y ≤ 6, x,y ≥ 0  → (8/5, 6/5)
        let mut p: LpProblem<Q> = LpProblem::new();
        p.add_variable("x");
        p.add_variable("y");
        for v in 0..2 {
            p.constraints.push(LinearConstraint::new(Relation::Geq, q(0)).with(v, q(1)));
        }
        p.constraints.push(LinearConstraint::new(Relation::Leq, q(4)).with(0, q(1)).with(1, q(2)));
        p.constraints.push(LinearConstraint::new(Relation::Leq, q(6)).with(0, q(3)).with(1, q(1)));
        let obj = BTreeMap::from([(0, q(1)), (1, q(1))]);
        assert_eq!(optimize(&p, &obj), LpOutcome::Optimal(vec![Q::new(8, 5), Q::new(6, 5)]));
    }

    #[test]
    fn detects_unbounded() {
        let mut p = one_var();
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(0)).with(0, q(1)));
        assert_eq!(optimize(&p, &BTreeMap::from([(0, q(1))])), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut p: LpProblem<Q> = LpProblem::new();
        p.add_variable("a");
        p.add_variable("b");
        p.constraints.push(LinearConstraint::new(Relation::Eq, q(2)).with(0, q(1)).with(1, q(1)));
        p.constraints.push(LinearConstraint::new(Relation::Eq, q(4)).with(0, q(2)).with(1, q(2)));
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(0)).with(0, q(1)));
        p.constraints.push(LinearConstraint::new(Relation::Geq, q(0)).with(1, q(1)));
        let s = solve_feasibility(&p).unwrap();
        assert!(p.satisfied_by(&s.assignment));
    }
}
