use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::bscc::{analyze_idx, bsccs_idx, potential_consistent, to_bscc, witness_idx};
use super::{require_1d, Bscc, BsccClass, BsccWitness, OneDimError};
use crate::dichotomy::{compute_maximal_solutions, effect_row, system_i_base, system_i_witness, SystemIWitness};
use crate::graph::{decompose, refine, sccs, Decomposition, Mec};
use crate::model::{MdStrategy, VassMdp};
use crate::ratlp::{optimize, scale_to_integers, solve_feasibility, LinearConstraint, LpOutcome, Relation};
use crate::{Problem, Rational};

/// A MEC admitting an increasing BSCC, with the (I)-solution proving it and an MD witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncreasingWitness {
    pub mec: Mec,
    pub witness: SystemIWitness,
    pub bscc: BsccWitness,
}

/// A zero-drift region of a MEC and, when found, an MD strategy realizing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroWitness {
    pub mec: Mec,
    pub region: Bscc,
    pub bscc: Option<BsccWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifiedBscc {
    pub strategy: MdStrategy,
    pub bscc: Bscc,
    pub class: BsccClass,
}

/// Which BSCC classes are realizable where.
///
/// Per MEC: increasing / bounded-zero / unbounded-zero. Per transition:
/// whether some bounded-zero BSCC, resp. some zero-drift BSCC, contains it.
/// `None` marks facts that are not decided (transitions outside every MEC,
/// and the zero-drift facts of MECs admitting an increasing BSCC in the
/// polynomial procedure).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inventory {
    pub mecs: Vec<String>,
    pub increasing: Vec<bool>,
    pub bounded_zero: Vec<Option<bool>>,
    pub unbounded_zero: Vec<Option<bool>>,
    pub bounded_zero_transition: Vec<Option<bool>>,
    pub zero_drift_transition: Vec<Option<bool>>,
}

/// Facts about one MEC, in full-model indices.
pub(crate) struct MecFacts {
    pub k: usize,
    pub sub: VassMdp,
    /// Full-model index of each transition of `sub`.
    pub tmap: Vec<usize>,
    pub increasing: Option<SystemIWitness>,
    /// End components left after removing rank-changing transitions (bounded-zero regions).
    pub bz_ecs: Vec<(Vec<usize>, Vec<usize>)>,
    /// Transitions positive in a maximal (I)-solution.
    pub support: BTreeSet<usize>,
    /// Support components containing a nonzero cycle.
    pub uz_components: Vec<(Vec<usize>, Vec<usize>)>,
}

impl MecFacts {
    pub fn bounded_zero(&self) -> bool {
        !self.bz_ecs.is_empty()
    }
    pub fn unbounded_zero(&self) -> bool {
        !self.uz_components.is_empty()
    }
    pub fn bz_transition(&self, t: usize) -> bool {
        self.bz_ecs.iter().any(|(_, ts)| ts.contains(&t))
    }
    pub fn zero_drift_transition(&self, t: usize) -> bool {
        self.support.contains(&t)
    }
}

pub(crate) fn analyze_mec(m: &VassMdp, dec: &Decomposition, k: usize) -> Result<MecFacts, OneDimError> {
    let sub = dec.sub_model(m, k);
    let tmap: Vec<usize> = (0..sub.num_transitions()).map(|i| m.trans_idx(&sub.transition(i).id).unwrap()).collect();
    let mut inc = system_i_base(&sub);
    let mut strict = effect_row(&sub, 0);
    strict.rhs = Rational::one();
    inc.constraints.push(strict);
    let increasing = solve_feasibility(&inc).map(|s| {
        let x = scale_to_integers(&s, false).assignment.iter().map(|v| v.to_integer()).collect::<Vec<_>>();
        system_i_witness(&sub, &x)
    });
    let mut facts =
        MecFacts { k, sub, tmap, increasing, bz_ecs: Vec::new(), support: BTreeSet::new(), uz_components: Vec::new() };
    if facts.increasing.is_some() {
        return Ok(facts);
    }
    let sub = &facts.sub;
    let (w, r) = compute_maximal_solutions(sub)?;

    // Bounded-zero regions: drop everything whose rank effect may be nonzero.
    let mut alive_s = vec![false; m.num_states()];
    let mut alive_t = vec![false; m.num_transitions()];
    for &s in &dec.mec_states[k] {
        alive_s[s] = true;
    }
    for (i, &t) in facts.tmap.iter().enumerate() {
        alive_t[t] = r.effect(sub, i).is_zero();
    }
    for s in 0..sub.num_states() {
        if sub.is_prob(s) {
            let noisy =
                r.strict_prob.contains(&sub.state(s).name) || sub.out(s).iter().any(|&i| !r.effect(sub, i).is_zero());
            if noisy {
                alive_s[m.state_idx(&sub.state(s).name).unwrap()] = false;
            }
        }
    }
    facts.bz_ecs = refine(m, alive_s, alive_t);

    // Zero-drift support and its components.
    facts.support = facts
        .tmap
        .iter()
        .enumerate()
        .filter(|(i, _)| w.positive_transitions.contains(&sub.transition(*i).id))
        .map(|(_, &t)| t)
        .collect();
    let support: Vec<usize> = facts.support.iter().copied().collect();
    for comp in sccs(m.num_states(), support.iter().map(|&t| (m.src(t), m.dst(t)))) {
        let ts: Vec<usize> = support.iter().copied().filter(|&t| comp.binary_search(&m.src(t)).is_ok()).collect();
        if !ts.is_empty() && !potential_consistent(m, &ts) {
            facts.uz_components.push((comp, ts));
        }
    }
    Ok(facts)
}

pub(crate) fn analyze_all(m: &VassMdp, dec: &Decomposition) -> Result<Vec<MecFacts>, OneDimError> {
    (0..dec.len()).map(|k| analyze_mec(m, dec, k)).collect()
}

/// Normalized (I)-polytope of MEC `f` with `Σ x = 1`, optionally drift-zero and
/// restricted to transitions in `allowed` (full-model indices).
fn normalized(f: &MecFacts, zero_drift: bool, allowed: Option<&[usize]>) -> Problem {
    let mut p = system_i_base(&f.sub);
    let mut sum = LinearConstraint::new(Relation::Eq, Rational::one());
    for i in 0..f.sub.num_transitions() {
        sum.add(i, Rational::one());
    }
    p.constraints.push(sum);
    if zero_drift {
        let mut e = effect_row(&f.sub, 0);
        e.relation = Relation::Eq;
        p.constraints.push(e);
    }
    if let Some(allowed) = allowed {
        for (i, t) in f.tmap.iter().enumerate() {
            if !allowed.contains(t) {
                p.constraints.push(LinearConstraint::new(Relation::Eq, Rational::zero()).with(i, Rational::one()));
            }
        }
    }
    p
}

/// Turns an optimal vertex of a normalized polytope into an MD strategy and its BSCC.
fn vertex_witness(m: &VassMdp, f: &MecFacts, p: &Problem, objective: BTreeMap<usize, Rational>) -> Option<BsccWitness> {
    let LpOutcome::Optimal(x) = optimize(p, &objective) else { return None };
    let positive: BTreeSet<usize> = (0..x.len()).filter(|&i| x[i].is_positive()).map(|i| f.tmap[i]).collect();
    let mut choice = least_id_choice(m);
    for &t in &positive {
        let s = m.src(t);
        if !m.is_prob(s) && !choice_is_positive(&choice, s, &positive) {
            choice[s] = Some(t);
        }
    }
    let (states, trans) = bsccs_idx(m, &choice).into_iter().find(|(_, ts)| ts.iter().all(|t| positive.contains(t)))?;
    Some(witness_idx(m, &choice, &states, &trans))
}

fn choice_is_positive(choice: &[Option<usize>], s: usize, positive: &BTreeSet<usize>) -> bool {
    choice[s].is_some_and(|t| positive.contains(&t))
}

pub(crate) fn least_id_choice(m: &VassMdp) -> Vec<Option<usize>> {
    (0..m.num_states()).map(|s| if m.is_prob(s) { None } else { Some(m.out(s)[0]) }).collect()
}

/// MD choice steering every state of the region toward `target`, with `fixed`
/// forced at its source. States outside the region take their least id.
fn attractor(
    m: &VassMdp,
    states: &[usize],
    trans: &[usize],
    target: usize,
    fixed: Option<usize>,
) -> Vec<Option<usize>> {
    let mut choice = least_id_choice(m);
    let in_region: BTreeSet<usize> = trans.iter().copied().collect();
    let mut dist: HashMap<usize, usize> = HashMap::from([(target, 0)]);
    if let Some(t) = fixed {
        choice[m.src(t)] = Some(t);
    }
    loop {
        let mut changed = false;
        for &s in states {
            if dist.contains_key(&s) {
                continue;
            }
            if fixed.is_some_and(|t| m.src(t) == s) {
                if let Some(&dd) = dist.get(&m.dst(fixed.unwrap())) {
                    dist.insert(s, dd + 1);
                    changed = true;
                }
                continue;
            }
            let best = m
                .out(s)
                .iter()
                .copied()
                .filter(|t| in_region.contains(t))
                .filter_map(|t| dist.get(&m.dst(t)).map(|&dd| (dd, t)))
                .min();
            if let Some((dd, t)) = best {
                dist.insert(s, dd + 1);
                if !m.is_prob(s) {
                    choice[s] = Some(t);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !m.is_prob(target) && fixed.is_none_or(|t| m.src(t) != target) {
        choice[target] = m.out(target).iter().copied().find(|t| in_region.contains(t));
    }
    choice
}

fn bscc_through(m: &VassMdp, choice: &[Option<usize>], state: usize) -> Option<BsccWitness> {
    let (states, trans) = bsccs_idx(m, choice).into_iter().find(|(ss, _)| ss.contains(&state))?;
    Some(witness_idx(m, choice, &states, &trans))
}

impl MecFacts {
    pub fn increasing_witness(&self, m: &VassMdp) -> Option<BsccWitness> {
        self.increasing.as_ref()?;
        let p = normalized(self, false, None);
        let objective = effect_row(&self.sub, 0).coefficients;
        vertex_witness(m, self, &p, objective)
    }

    /// MD strategy whose BSCC is bounded-zero and contains `t` (any bounded-zero BSCC if `None`).
    pub fn bounded_zero_witness(&self, m: &VassMdp, t: Option<usize>) -> Option<BsccWitness> {
        let (states, trans) = match t {
            Some(t) => self.bz_ecs.iter().find(|(_, ts)| ts.contains(&t))?,
            None => self.bz_ecs.first()?,
        };
        let t = t.unwrap_or(trans[0]);
        let p = m.src(t);
        let fixed = (!m.is_prob(p)).then_some(t);
        bscc_through(m, &attractor(m, states, trans, p, fixed), p)
    }

    /// MD strategy whose BSCC is unbounded-zero, searched over vertices of the zero-drift faces.
    pub fn unbounded_zero_witness(&self, m: &VassMdp) -> Option<BsccWitness> {
        for (_, ts) in &self.uz_components {
            let p = normalized(self, true, Some(ts));
            for &t in ts {
                let i = self.tmap.iter().position(|&x| x == t).unwrap();
                let w = vertex_witness(m, self, &p, BTreeMap::from([(i, Rational::one())]));
                if let Some(w) = w.filter(|w| w.class == BsccClass::UnboundedZero) {
                    return Some(w);
                }
            }
        }
        None
    }

    /// MD strategy whose BSCC has zero drift and contains `t`.
    pub fn zero_drift_witness(&self, m: &VassMdp, t: usize) -> Option<BsccWitness> {
        if !self.support.contains(&t) {
            return None;
        }
        let i = self.tmap.iter().position(|&x| x == t).unwrap();
        let p = normalized(self, true, None);
        vertex_witness(m, self, &p, BTreeMap::from([(i, Rational::one())]))
    }
}

fn mec_region(m: &VassMdp, states: &[usize], trans: &[usize]) -> Bscc {
    to_bscc(m, states, trans)
}

/// First MEC (id order) admitting an increasing BSCC.
pub fn detect_increasing(m: &VassMdp) -> Result<Option<IncreasingWitness>, OneDimError> {
    require_1d(m)?;
    let dec = decompose(m);
    for k in 0..dec.len() {
        let f = analyze_mec(m, &dec, k)?;
        if let Some(witness) = f.increasing.clone() {
            let bscc = f.increasing_witness(m).expect("a feasible increasing multicycle has an MD vertex");
            return Ok(Some(IncreasingWitness { mec: dec.mecs[k].clone(), witness, bscc }));
        }
    }
    Ok(None)
}

fn no_increasing(facts: &[MecFacts], dec: &Decomposition) -> Result<(), OneDimError> {
    match facts.iter().find(|f| f.increasing.is_some()) {
        Some(f) => Err(OneDimError::PreconditionViolated(format!(
            "MEC {} admits an increasing BSCC; deciding the other classes is NP-hard there",
            dec.mecs[f.k].id
        ))),
        None => Ok(()),
    }
}

/// First bounded-zero region (requires that no increasing BSCC exists).
pub fn detect_bounded_zero(m: &VassMdp) -> Result<Option<ZeroWitness>, OneDimError> {
    require_1d(m)?;
    let dec = decompose(m);
    let facts = analyze_all(m, &dec)?;
    no_increasing(&facts, &dec)?;
    Ok(facts.iter().find(|f| f.bounded_zero()).map(|f| {
        let (ss, ts) = &f.bz_ecs[0];
        ZeroWitness { mec: dec.mecs[f.k].clone(), region: mec_region(m, ss, ts), bscc: f.bounded_zero_witness(m, None) }
    }))
}

/// First support component with a nonzero cycle (requires that no increasing BSCC exists).
pub fn detect_unbounded_zero(m: &VassMdp) -> Result<Option<ZeroWitness>, OneDimError> {
    require_1d(m)?;
    let dec = decompose(m);
    let facts = analyze_all(m, &dec)?;
    no_increasing(&facts, &dec)?;
    Ok(facts.iter().find(|f| f.unbounded_zero()).map(|f| {
        let (ss, ts) = &f.uz_components[0];
        ZeroWitness { mec: dec.mecs[f.k].clone(), region: mec_region(m, ss, ts), bscc: f.unbounded_zero_witness(m) }
    }))
}

/// Number of MD strategies, or `None` beyond `u128`.
pub(crate) fn strategy_count(m: &VassMdp) -> Option<u128> {
    (0..m.num_states()).filter(|&s| !m.is_prob(s)).try_fold(1u128, |acc, s| acc.checked_mul(m.out(s).len() as u128))
}

/// Calls `f` for every MD strategy (odometer order over states, then transition ids).
pub(crate) fn for_each_md(
    m: &VassMdp,
    bound: u64,
    mut f: impl FnMut(&[Option<usize>]) -> bool,
) -> Result<(), OneDimError> {
    match strategy_count(m) {
        Some(c) if c <= bound as u128 => {}
        c => {
            return Err(OneDimError::TooManyStrategies {
                count: c.map(|c| c.to_string()).unwrap_or_else(|| "more than 2^128".into()),
                bound,
            })
        }
    }
    let nondet: Vec<usize> = (0..m.num_states()).filter(|&s| !m.is_prob(s)).collect();
    let mut digits = vec![0usize; nondet.len()];
    let mut choice = least_id_choice(m);
    loop {
        if !f(&choice) {
            return Ok(());
        }
        let mut i = 0;
        loop {
            if i == nondet.len() {
                return Ok(());
            }
            let s = nondet[i];
            digits[i] += 1;
            if digits[i] < m.out(s).len() {
                choice[s] = Some(m.out(s)[digits[i]]);
                break;
            }
            digits[i] = 0;
            choice[s] = Some(m.out(s)[0]);
            i += 1;
        }
    }
}

/// Every (MD strategy, bottom SCC) pair with its class.
pub fn brute_force_classify(m: &VassMdp, bound: u64) -> Result<Vec<ClassifiedBscc>, OneDimError> {
    require_1d(m)?;
    let mut cache: HashMap<Vec<usize>, BsccClass> = HashMap::new();
    let mut out = Vec::new();
    for_each_md(m, bound, |choice| {
        for (states, trans) in bsccs_idx(m, choice) {
            let class = *cache.entry(trans.clone()).or_insert_with(|| analyze_idx(m, &states, &trans).0);
            out.push(ClassifiedBscc {
                strategy: MdStrategy::from_indices(m, choice),
                bscc: to_bscc(m, &states, &trans),
                class,
            });
        }
        true
    })?;
    Ok(out)
}

/// Inventory from exhaustive MD enumeration.
pub fn inventory_brute_force(m: &VassMdp, bound: u64) -> Result<Inventory, OneDimError> {
    require_1d(m)?;
    let dec = decompose(m);
    let n = dec.len();
    let in_mec = |t: usize| dec.mec_of_transition(t).is_some();
    let mut inv = Inventory {
        mecs: dec.mecs.iter().map(|x| x.id.clone()).collect(),
        increasing: vec![false; n],
        bounded_zero: vec![Some(false); n],
        unbounded_zero: vec![Some(false); n],
        bounded_zero_transition: (0..m.num_transitions()).map(|t| in_mec(t).then_some(false)).collect(),
        zero_drift_transition: (0..m.num_transitions()).map(|t| in_mec(t).then_some(false)).collect(),
    };
    let mut cache: HashMap<Vec<usize>, BsccClass> = HashMap::new();
    for_each_md(m, bound, |choice| {
        for (states, trans) in bsccs_idx(m, choice) {
            let class = *cache.entry(trans.clone()).or_insert_with(|| analyze_idx(m, &states, &trans).0);
            let k = dec.mec_of_state(states[0]).expect("a BSCC lies inside a MEC");
            match class {
                BsccClass::Increasing => inv.increasing[k] = true,
                BsccClass::BoundedZero => inv.bounded_zero[k] = Some(true),
                BsccClass::UnboundedZero => inv.unbounded_zero[k] = Some(true),
                BsccClass::Decreasing => {}
            }
            for &t in &trans {
                if class == BsccClass::BoundedZero {
                    inv.bounded_zero_transition[t] = Some(true);
                }
                if matches!(class, BsccClass::BoundedZero | BsccClass::UnboundedZero) {
                    inv.zero_drift_transition[t] = Some(true);
                }
            }
        }
        true
    })?;
    Ok(inv)
}

pub(crate) fn inventory_from(m: &VassMdp, dec: &Decomposition, facts: &[MecFacts]) -> Inventory {
    let mut inv = Inventory {
        mecs: dec.mecs.iter().map(|x| x.id.clone()).collect(),
        increasing: facts.iter().map(|f| f.increasing.is_some()).collect(),
        bounded_zero: facts.iter().map(|f| f.increasing.is_none().then(|| f.bounded_zero())).collect(),
        unbounded_zero: facts.iter().map(|f| f.increasing.is_none().then(|| f.unbounded_zero())).collect(),
        bounded_zero_transition: vec![None; m.num_transitions()],
        zero_drift_transition: vec![None; m.num_transitions()],
    };
    for t in 0..m.num_transitions() {
        if let Some(k) = dec.mec_of_transition(t) {
            let f = &facts[k];
            if f.increasing.is_none() {
                inv.bounded_zero_transition[t] = Some(f.bz_transition(t));
                inv.zero_drift_transition[t] = Some(f.zero_drift_transition(t));
            }
        }
    }
    inv
}

/// Inventory from the polynomial procedures.
pub fn inventory_polynomial(m: &VassMdp) -> Result<Inventory, OneDimError> {
    require_1d(m)?;
    let dec = decompose(m);
    let facts = analyze_all(m, &dec)?;
    Ok(inventory_from(m, &dec, &facts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StateDef, StateKind, Transition};

    fn nondet_pm() -> VassMdp {
        VassMdp::new(
            1,
            vec![StateDef::new("p", StateKind::Nondet)],
            vec![Transition::new("down", "p", vec![-1], "p", None), Transition::new("up", "p", vec![1], "p", None)],
        )
        .unwrap()
    }

    fn walk() -> VassMdp {
        let half = || Some(Rational::new(1.into(), 2.into()));
        VassMdp::new(
            1,
            vec![StateDef::new("p", StateKind::Prob)],
            vec![Transition::new("a", "p", vec![1], "p", half()), Transition::new("b", "p", vec![-1], "p", half())],
        )
        .unwrap()
    }

    fn two_cycle() -> VassMdp {
        VassMdp::new(
            1,
            vec![StateDef::new("a", StateKind::Nondet), StateDef::new("b", StateKind::Nondet)],
            vec![Transition::new("ab", "a", vec![1], "b", None), Transition::new("ba", "b", vec![-1], "a", None)],
        )
        .unwrap()
    }

    #[test]
    fn increasing_detection() {
        let w = detect_increasing(&nondet_pm()).unwrap().unwrap();
        assert_eq!(w.bscc.class, BsccClass::Increasing);
        assert_eq!(w.bscc.strategy.choice["p"], "up");
        assert!(detect_increasing(&walk()).unwrap().is_none());
    }

    #[test]
    fn bounded_zero_detection() {
        let w = detect_bounded_zero(&two_cycle()).unwrap().unwrap();
        assert_eq!(w.region.transitions.len(), 2);
        assert_eq!(w.bscc.unwrap().class, BsccClass::BoundedZero);
        assert!(detect_bounded_zero(&walk()).unwrap().is_none());
        assert!(matches!(detect_bounded_zero(&nondet_pm()), Err(OneDimError::PreconditionViolated(_))));
    }

    #[test]
    fn unbounded_zero_detection() {
        let w = detect_unbounded_zero(&walk()).unwrap().unwrap();
        assert_eq!(w.region.states, BTreeSet::from(["p".to_string()]));
        assert_eq!(w.bscc.unwrap().class, BsccClass::UnboundedZero);
        assert!(detect_unbounded_zero(&two_cycle()).unwrap().is_none());
    }

    #[test]
    fn brute_force_small_cases() {
        let all = brute_force_classify(&walk(), 10).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].class, BsccClass::UnboundedZero);
        let mut classes: Vec<_> =
            brute_force_classify(&nondet_pm(), 10).unwrap().into_iter().map(|c| c.class).collect();
        classes.sort();
        assert_eq!(classes, vec![BsccClass::Increasing, BsccClass::Decreasing]);
        assert!(matches!(brute_force_classify(&nondet_pm(), 1), Err(OneDimError::TooManyStrategies { .. })));
    }

    #[test]
    fn inventories_agree_on_examples() {
        for m in [walk(), two_cycle()] {
            assert_eq!(inventory_polynomial(&m).unwrap(), inventory_brute_force(&m, 100).unwrap());
        }
    }
}
