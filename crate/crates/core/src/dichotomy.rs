//! Linear/quadratic dichotomy for strongly connected and DAG-like VASS MDPs.
//!
//! For a strongly connected model two homogeneous constraint systems are built:
//!
//! * system (I) over transition frequencies `x`: nonnegative, flow-conserving,
//!   proportional to the probabilities at probabilistic states, with
//!   nonnegative total effect `Σ x(t)·u_t` on every counter;
//! * system (II) over counter weights `y` and state potentials `z`: the linear
//!   ranking `z(p) + Σ v(i)·y(i)` never increases along nondeterministic
//!   transitions and never increases in expectation at probabilistic states.
//!
//! A counter with `y(c) > 0` in a maximal solution of (II) grows at most
//! linearly; every other counter can be pumped to a quadratic value. DAG-like
//! models are handled MEC by MEC along a type, treating already pumped
//! counters as unbounded by zeroing their updates.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{decompose, is_dag_like_with, type_indices, Decomposition};
use crate::model::{augment_step_counter, ComplexityMeasure, ModelError, StepTarget, VassMdp};
use crate::ratlp::{maximize_strict_count, scale_to_integers, solve_feasibility, LinearConstraint, LpError, Relation};
use crate::{Problem, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DichotomyError {
    #[error("the MEC decomposition is not DAG-like")]
    NotDagLike,
    #[error("invalid type: {0}")]
    InvalidType(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub(crate) mod int_map {
    use num_bigint::BigInt;
    use serde::ser::SerializeMap;
    use serde::{Serialize, Serializer};
    use std::collections::BTreeMap;
    use std::str::FromStr;

    pub fn number(v: &BigInt) -> serde_json::Number {
        serde_json::Number::from_str(&v.to_string()).expect("integers are JSON numbers")
    }

    pub fn serialize<K: Serialize, S: Serializer>(m: &BTreeMap<K, BigInt>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &number(v))?;
        }
        map.end()
    }
}

/// Integral maximal solution of system (I).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemIWitness {
    #[serde(serialize_with = "int_map::serialize")]
    pub x: BTreeMap<String, BigInt>,
    /// 1-based counters with `Σ x(t)·u_t(c) > 0`.
    pub positive_counters: BTreeSet<usize>,
    pub positive_transitions: BTreeSet<String>,
}

/// Integral maximal solution of system (II).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankingFunction {
    /// Weight per 1-based counter.
    #[serde(serialize_with = "int_map::serialize")]
    pub y: BTreeMap<usize, BigInt>,
    #[serde(serialize_with = "int_map::serialize")]
    pub z: BTreeMap<String, BigInt>,
    pub strict_nondet: BTreeSet<String>,
    pub strict_prob: BTreeSet<String>,
}

impl RankingFunction {
    /// `z(p) + Σ v(i)·y(i)`.
    pub fn rank(&self, state: &str, v: &[BigInt]) -> BigInt {
        let z = self.z.get(state).cloned().unwrap_or_default();
        v.iter().enumerate().fold(z, |acc, (i, vi)| acc + vi * self.y.get(&(i + 1)).cloned().unwrap_or_default())
    }

    /// Rank change caused by transition `t` of `m`.
    pub fn effect(&self, m: &VassMdp, t: usize) -> BigInt {
        let tr = m.transition(t);
        self.rank(&tr.to, m.update(t)) - self.z.get(&tr.from).cloned().unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CounterClass {
    TightLinear,
    LowerQuadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CounterGrowth {
    LinearCap,
    PumpedQuadratic,
}

/// Growth regime of every counter while walking along a type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DagPipelineState {
    pub w: Vec<CounterGrowth>,
}

impl DagPipelineState {
    pub fn new(d: usize) -> Self {
        DagPipelineState { w: vec![CounterGrowth::LinearCap; d] }
    }

    /// Marks 1-based counter `c` as pumped; entries never move back.
    pub fn promote(&mut self, c: usize) {
        self.w[c - 1] = CounterGrowth::PumpedQuadratic;
    }

    pub fn is_pumped(&self, c: usize) -> bool {
        self.w[c - 1] == CounterGrowth::PumpedQuadratic
    }

    pub fn pumped(&self) -> BTreeSet<usize> {
        (1..=self.w.len()).filter(|&c| self.is_pumped(c)).collect()
    }
}

fn q(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

fn xvar(m: &VassMdp, t: usize) -> String {
    format!("x[{}]", m.transition(t).id)
}

/// Base rows of system (I) without candidates; variable `t` is transition `t`.
pub(crate) fn system_i_base(m: &VassMdp) -> Problem {
    let mut p = Problem::new();
    for t in 0..m.num_transitions() {
        p.add_variable(xvar(m, t));
        p.constraints
            .push(LinearConstraint::new(Relation::Geq, Rational::zero()).with(t, Rational::from_integer(1.into())));
    }
    for c in 0..m.dimension() {
        p.constraints.push(effect_row(m, c));
    }
    for s in 0..m.num_states() {
        let mut row = LinearConstraint::new(Relation::Eq, Rational::zero());
        for t in 0..m.num_transitions() {
            if m.src(t) == s {
                row.add(t, Rational::from_integer(1.into()));
            }
            if m.dst(t) == s {
                row.add(t, -Rational::from_integer(1.into()));
            }
        }
        if !row.coefficients.is_empty() {
            p.constraints.push(row);
        }
        if m.is_prob(s) {
            for &t in m.out(s) {
                let pt = m.prob(t).unwrap().clone();
                let mut row = LinearConstraint::new(Relation::Eq, Rational::zero());
                row.add(t, Rational::from_integer(1.into()));
                for &t2 in m.out(s) {
                    row.add(t2, -pt.clone());
                }
                if !row.coefficients.is_empty() {
                    p.constraints.push(row);
                }
            }
        }
    }
    p
}

pub(crate) fn effect_row(m: &VassMdp, c: usize) -> LinearConstraint<Rational> {
    let mut row = LinearConstraint::new(Relation::Geq, Rational::zero());
    for t in 0..m.num_transitions() {
        let u = &m.update(t)[c];
        if !u.is_zero() {
            row.add(t, q(u));
        }
    }
    row
}

/// System (I) for a strongly connected model. Candidates: one per counter
/// (`Σ x·u(c) > 0`), then one per transition (`x(t) > 0`).
pub fn build_system_i(m: &VassMdp) -> Problem {
    let mut p = system_i_base(m);
    for c in 0..m.dimension() {
        p.candidates.push(effect_row(m, c));
    }
    for t in 0..m.num_transitions() {
        p.candidates
            .push(LinearConstraint::new(Relation::Geq, Rational::zero()).with(t, Rational::from_integer(1.into())));
    }
    p
}

/// System (II). Variables: `y` per counter, then `z` per state. Candidates:
/// `y(c) > 0` per counter, strict decrease per nondeterministic transition (id
/// order), strict expected decrease per probabilistic state (name order).
pub fn build_system_ii(m: &VassMdp) -> Problem {
    let d = m.dimension();
    let mut p = Problem::new();
    let one = Rational::from_integer(1.into());
    for c in 0..d {
        p.add_variable(format!("y[{}]", c + 1));
    }
    for s in 0..m.num_states() {
        p.add_variable(format!("z[{}]", m.state(s).name));
    }
    for v in 0..d + m.num_states() {
        p.constraints.push(LinearConstraint::new(Relation::Geq, Rational::zero()).with(v, one.clone()));
    }
    let row_of = |t: usize, weight: &Rational, row: &mut LinearConstraint<Rational>| {
        row.add(d + m.dst(t), weight.clone());
        row.add(d + m.src(t), -weight.clone());
        for (c, u) in m.update(t).iter().enumerate() {
            if !u.is_zero() {
                row.add(c, weight.clone() * q(u));
            }
        }
    };
    let mut nondet_rows = Vec::new();
    let mut prob_rows = Vec::new();
    for t in 0..m.num_transitions() {
        if !m.is_prob(m.src(t)) {
            let mut row = LinearConstraint::new(Relation::Leq, Rational::zero());
            row_of(t, &one, &mut row);
            nondet_rows.push(row);
        }
    }
    for s in 0..m.num_states() {
        if m.is_prob(s) {
            let mut row = LinearConstraint::new(Relation::Leq, Rational::zero());
            for &t in m.out(s) {
                row_of(t, m.prob(t).unwrap(), &mut row);
            }
            prob_rows.push(row);
        }
    }
    p.constraints.extend(nondet_rows.iter().cloned());
    p.constraints.extend(prob_rows.iter().cloned());
    for c in 0..d {
        p.candidates.push(LinearConstraint::new(Relation::Geq, Rational::zero()).with(c, one.clone()));
    }
    p.candidates.extend(nondet_rows);
    p.candidates.extend(prob_rows);
    p
}

fn to_int(v: &Rational) -> BigInt {
    debug_assert!(v.is_integer());
    v.to_integer()
}

/// Builds the witness from an integral `x` (indexed by transition).
pub fn system_i_witness(m: &VassMdp, x: &[BigInt]) -> SystemIWitness {
    let positive_counters = (0..m.dimension())
        .filter(|&c| (0..m.num_transitions()).map(|t| &x[t] * &m.update(t)[c]).sum::<BigInt>().is_positive())
        .map(|c| c + 1)
        .collect();
    SystemIWitness {
        x: (0..m.num_transitions()).map(|t| (m.transition(t).id.clone(), x[t].clone())).collect(),
        positive_counters,
        positive_transitions: (0..m.num_transitions())
            .filter(|&t| x[t].is_positive())
            .map(|t| m.transition(t).id.clone())
            .collect(),
    }
}

/// Builds the ranking function from integral `y` (per counter) and `z` (per state).
pub fn ranking_function(m: &VassMdp, y: &[BigInt], z: &[BigInt]) -> RankingFunction {
    let d = m.dimension();
    let mut r = RankingFunction {
        y: (0..d).map(|c| (c + 1, y[c].clone())).collect(),
        z: (0..m.num_states()).map(|s| (m.state(s).name.clone(), z[s].clone())).collect(),
        strict_nondet: BTreeSet::new(),
        strict_prob: BTreeSet::new(),
    };
    for t in 0..m.num_transitions() {
        if !m.is_prob(m.src(t)) && r.effect(m, t).is_negative() {
            r.strict_nondet.insert(m.transition(t).id.clone());
        }
    }
    for s in 0..m.num_states() {
        if m.is_prob(s) {
            let e: Rational = m.out(s).iter().map(|&t| m.prob(t).unwrap() * q(&r.effect(m, t))).sum();
            if e.is_negative() {
                r.strict_prob.insert(m.state(s).name.clone());
            }
        }
    }
    r
}

/// Maximal integral solutions of (I) and (II); the smallest nonzero entry of `y, z` is at least 1.
pub fn compute_maximal_solutions(m: &VassMdp) -> Result<(SystemIWitness, RankingFunction), LpError> {
    let s1 = scale_to_integers(&maximize_strict_count(&build_system_i(m))?, false);
    let s2 = scale_to_integers(&maximize_strict_count(&build_system_ii(m))?, true);
    let x: Vec<BigInt> = s1.assignment.iter().map(to_int).collect();
    let yz: Vec<BigInt> = s2.assignment.iter().map(to_int).collect();
    let d = m.dimension();
    Ok((system_i_witness(m, &x), ranking_function(m, &yz[..d], &yz[d..])))
}

/// The complementarity check: every counter, nondeterministic transition and
/// probabilistic state is covered by `x` or made strict by the ranking.
pub fn verify_dichotomy(m: &VassMdp, w: &SystemIWitness, r: &RankingFunction) -> bool {
    let counters =
        (1..=m.dimension()).all(|c| r.y.get(&c).is_some_and(|y| y.is_positive()) || w.positive_counters.contains(&c));
    let nondet = (0..m.num_transitions()).filter(|&t| !m.is_prob(m.src(t))).all(|t| {
        let id = &m.transition(t).id;
        r.strict_nondet.contains(id) || w.positive_transitions.contains(id)
    });
    let prob = (0..m.num_states()).filter(|&s| m.is_prob(s)).all(|s| {
        r.strict_prob.contains(&m.state(s).name)
            || m.out(s).iter().all(|&t| w.positive_transitions.contains(&m.transition(t).id))
    });
    counters && nondet && prob
}

fn classes_from(r: &RankingFunction) -> BTreeMap<usize, CounterClass> {
    r.y.iter()
        .map(|(&c, y)| (c, if y.is_positive() { CounterClass::TightLinear } else { CounterClass::LowerQuadratic }))
        .collect()
}

/// Per-counter class of a strongly connected model.
pub fn classify_counters_mec(m: &VassMdp) -> Result<BTreeMap<usize, CounterClass>, LpError> {
    let s2 = maximize_strict_count(&build_system_ii(m))?;
    Ok((0..m.dimension())
        .map(|c| {
            let class =
                if s2.achieved_strict.contains(&c) { CounterClass::TightLinear } else { CounterClass::LowerQuadratic };
            (c + 1, class)
        })
        .collect())
}

/// One MEC of the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineStep {
    pub mec: String,
    pub before: DagPipelineState,
    pub classes: BTreeMap<usize, CounterClass>,
    pub promoted: BTreeSet<usize>,
    pub witness: SystemIWitness,
    pub ranking: RankingFunction,
}

/// Classification of one counter along one type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DagEstimate {
    pub measure: ComplexityMeasure,
    pub type_mecs: Vec<String>,
    /// 1-based counter analysed (the step counter for `L` and `T[t]`).
    pub counter: usize,
    pub class: CounterClass,
    /// Set when the counter is pumped in a MEC that can raise it while holding the
    /// already pumped counters steady in expectation: growth may exceed `n²`.
    pub beyond_quadratic: bool,
    pub steps: Vec<PipelineStep>,
}

/// The model in which `f` is a counter, and that counter.
pub fn measure_as_counter(m: &VassMdp, f: &ComplexityMeasure) -> Result<(VassMdp, usize), ModelError> {
    f.validate(m)?;
    Ok(match f {
        ComplexityMeasure::Counter(c) => (m.clone(), *c),
        ComplexityMeasure::Termination => (augment_step_counter(m, &StepTarget::EveryTransition)?, m.dimension() + 1),
        ComplexityMeasure::TransitionCount(t) => {
            (augment_step_counter(m, &StepTarget::Only(t.clone()))?, m.dimension() + 1)
        }
    })
}

/// Walks `beta` and classifies `f` by the pumping pipeline.
pub fn classify_dag(m: &VassMdp, beta: &[String], f: &ComplexityMeasure) -> Result<DagEstimate, DichotomyError> {
    let dec = decompose(m);
    if !is_dag_like_with(m, &dec) {
        return Err(DichotomyError::NotDagLike);
    }
    let idx = type_indices(m, &dec, beta).ok_or_else(|| {
        DichotomyError::InvalidType(format!("[{}] is not a realizable MEC sequence", beta.join(", ")))
    })?;
    let (am, c) = measure_as_counter(m, f)?;
    let mut e = pipeline(&am, &dec, &idx, c)?;
    e.measure = f.clone();
    Ok(e)
}

/// Pipeline over an already validated type; `dec` is shared by `m` and any augmentation of it.
pub(crate) fn pipeline(
    m: &VassMdp,
    dec: &Decomposition,
    idx: &[usize],
    c: usize,
) -> Result<DagEstimate, DichotomyError> {
    let d = m.dimension();
    let mut state = DagPipelineState::new(d);
    let mut steps = Vec::new();
    let mut beyond = false;
    for &k in idx {
        let sub = dec.sub_model(m, k);
        let pumped = state.pumped();
        let zeroed = sub.with_updates(d, |_, t| {
            t.update
                .iter()
                .enumerate()
                .map(|(i, u)| if pumped.contains(&(i + 1)) { BigInt::zero() } else { u.clone() })
                .collect()
        })?;
        let (witness, ranking) = compute_maximal_solutions(&zeroed)?;
        let classes = classes_from(&ranking);
        let promoted: BTreeSet<usize> = classes
            .iter()
            .filter(|(&i, &cl)| cl == CounterClass::LowerQuadratic && !state.is_pumped(i))
            .map(|(&i, _)| i)
            .collect();
        if promoted.contains(&c) && !pumped.is_empty() && grows_on_pumped_budget(&sub, &state, c) {
            beyond = true;
        }
        let before = state.clone();
        for &i in &promoted {
            state.promote(i);
        }
        steps.push(PipelineStep { mec: dec.mecs[k].id.clone(), before, classes, promoted, witness, ranking });
    }
    let class = if state.is_pumped(c) { CounterClass::LowerQuadratic } else { CounterClass::TightLinear };
    Ok(DagEstimate {
        measure: ComplexityMeasure::Counter(c),
        type_mecs: idx.iter().map(|&k| dec.mecs[k].id.clone()).collect(),
        counter: c,
        class,
        beyond_quadratic: beyond && class == CounterClass::LowerQuadratic,
        steps,
    })
}

/// Can the original (unzeroed) MEC raise counter `c` by a multicycle that leaves
/// every other linear counter untouched and is nonnegative on pumped counters?
fn grows_on_pumped_budget(sub: &VassMdp, state: &DagPipelineState, c: usize) -> bool {
    let mut p = system_i_base(sub);
    for t in 0..sub.num_transitions() {
        let touches_linear =
            (1..=sub.dimension()).any(|i| i != c && !state.is_pumped(i) && !sub.update(t)[i - 1].is_zero());
        if touches_linear {
            p.constraints
                .push(LinearConstraint::new(Relation::Eq, Rational::zero()).with(t, Rational::from_integer(1.into())));
        }
    }
    let mut strict = effect_row(sub, c - 1);
    strict.rhs = Rational::from_integer(1.into());
    p.constraints.push(strict);
    solve_feasibility(&p).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_vass, StateDef, StateKind, Transition};

    fn single(kind: StateKind, loops: &[(i64, Option<(i64, i64)>)]) -> VassMdp {
        let ts = loops
            .iter()
            .enumerate()
            .map(|(i, (u, p))| {
                Transition::new(format!("t{i}"), "p", vec![*u], "p", p.map(|(a, b)| Rational::new(a.into(), b.into())))
            })
            .collect();
        VassMdp::new(1, vec![StateDef::new("p", kind)], ts).unwrap()
    }

    fn walk() -> VassMdp {
        single(StateKind::Prob, &[(1, Some((1, 2))), (-1, Some((1, 2)))])
    }

    fn chain() -> VassMdp {
        parse_vass(include_str!("../../../models/pumping_chain.json")).unwrap()
    }

    #[test]
    fn walk_system_shapes() {
        let m = walk();
        let p1 = build_system_i(&m);
        assert_eq!(p1.variables.len(), 2);
        assert_eq!(p1.candidates.len(), 3);
        let s = maximize_strict_count(&p1).unwrap();
        assert_eq!(s.achieved_strict, BTreeSet::from([1, 2]));
        assert_eq!(s.assignment[0], s.assignment[1]);
        let (w, r) = compute_maximal_solutions(&m).unwrap();
        assert!(w.positive_counters.is_empty());
        assert_eq!(w.x["t0"], w.x["t1"]);
        assert!(r.y[&1] >= BigInt::from(1));
        assert!(verify_dichotomy(&m, &w, &r));
    }

    #[test]
    fn zero_pair_is_not_a_dichotomy() {
        let m = walk();
        let w = system_i_witness(&m, &[BigInt::zero(), BigInt::zero()]);
        let r = ranking_function(&m, &[BigInt::zero()], &[BigInt::zero()]);
        assert!(!verify_dichotomy(&m, &w, &r));
    }

    #[test]
    fn decreasing_loop() {
        let m = single(StateKind::Nondet, &[(-1, None)]);
        let (w, r) = compute_maximal_solutions(&m).unwrap();
        assert!(w.x.values().all(|v| v.is_zero()));
        assert!(r.y[&1] >= BigInt::from(1));
        assert!(r.strict_nondet.contains("t0"));
        assert_eq!(classify_counters_mec(&m).unwrap()[&1], CounterClass::TightLinear);
    }

    #[test]
    fn increasing_probabilistic_loop() {
        let m = single(StateKind::Prob, &[(1, Some((1, 1)))]);
        let (w, r) = compute_maximal_solutions(&m).unwrap();
        assert_eq!(w.x["t0"], BigInt::from(1));
        assert_eq!(w.positive_counters, BTreeSet::from([1]));
        assert!(r.y[&1].is_zero());
    }

    #[test]
    fn dimension_zero_has_only_z_rows() {
        let m = VassMdp::new(
            0,
            vec![StateDef::new("p", StateKind::Nondet)],
            vec![Transition::new("a", "p", vec![], "p", None)],
        )
        .unwrap();
        let p = build_system_ii(&m);
        assert_eq!(p.variables, vec!["z[p]".to_string()]);
        assert_eq!(classify_counters_mec(&m).unwrap().len(), 0);
    }

    #[test]
    fn first_mec_of_chain() {
        let m = chain();
        let dec = decompose(&m);
        let m1 = dec.sub_model(&m, 0);
        let s = maximize_strict_count(&build_system_i(&m1)).unwrap();
        assert!(s.achieved_strict.contains(&1));
        assert!(!s.achieved_strict.contains(&0) && !s.achieved_strict.contains(&2));
        let classes = classify_counters_mec(&m1).unwrap();
        assert_eq!(classes[&1], CounterClass::TightLinear);
        assert_eq!(classes[&2], CounterClass::LowerQuadratic);
        assert_eq!(classes[&3], CounterClass::TightLinear);
    }

    #[test]
    fn chain_pipeline_for_third_counter() {
        let m = chain();
        let c3 = ComplexityMeasure::Counter(3);
        let ty = |a: &str, b: &str| vec![a.to_string(), b.to_string()];
        let e = classify_dag(&m, &ty("M1", "M2"), &c3).unwrap();
        assert_eq!(e.class, CounterClass::LowerQuadratic);
        assert!(!e.beyond_quadratic);
        assert_eq!(classify_dag(&m, &ty("M1", "M3"), &c3).unwrap().class, CounterClass::TightLinear);
        let e = classify_dag(&m, &ty("M1", "M4"), &c3).unwrap();
        assert_eq!(e.class, CounterClass::LowerQuadratic);
        assert!(e.beyond_quadratic);
        assert!(matches!(classify_dag(&m, &ty("M2", "M1"), &c3), Err(DichotomyError::InvalidType(_))));
    }

    #[test]
    fn termination_matches_step_counter() {
        let m = chain();
        let beta = vec!["M1".to_string(), "M4".to_string()];
        let a = classify_dag(&m, &beta, &ComplexityMeasure::Termination).unwrap();
        let aug = augment_step_counter(&m, &StepTarget::EveryTransition).unwrap();
        let b = classify_dag(&aug, &beta, &ComplexityMeasure::Counter(4)).unwrap();
        assert_eq!((a.class, a.counter, &a.steps), (b.class, b.counter, &b.steps));
    }

    #[test]
    fn non_dag_is_rejected() {
        let m = parse_vass(include_str!("../../../models/non_dag.json")).unwrap();
        let r = classify_dag(&m, &["M1".to_string()], &ComplexityMeasure::Counter(1));
        assert_eq!(r, Err(DichotomyError::NotDagLike));
    }
}
