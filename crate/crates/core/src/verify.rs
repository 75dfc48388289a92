//! Independent re-checking of emitted witnesses.
//!
//! Nothing here calls the solvers: every witness is substituted back into its
//! defining constraints with exact arithmetic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dichotomy::{RankingFunction, SystemIWitness};
use crate::graph::{Mec, TypeSeq};
use crate::model::{augment_step_counter, ComplexityMeasure, StepTarget, VassMdp};
use crate::onedim::{BsccClass, BsccWitness};
use crate::report::{AnalysisReport, EstimateWitness, ReachCertificate};
use crate::Rational;

/// Outcome of a verifier pass.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verification {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, what: impl FnOnce() -> String, r: Result<(), String>) {
        self.checked += 1;
        if let Err(e) = r {
            self.failures.push(format!("{}: {e}", what()));
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

/// Rows of system (I) for `x` on the strongly connected model `m`.
pub fn check_system_i(m: &VassMdp, w: &SystemIWitness) -> Result<(), String> {
    let mut x = vec![BigInt::zero(); m.num_transitions()];
    for (id, v) in &w.x {
        let t = m.trans_idx(id).ok_or_else(|| format!("x mentions unknown transition {id}"))?;
        ensure(!v.is_negative(), || format!("x({id}) is negative"))?;
        x[t] = v.clone();
    }
    for c in 0..m.dimension() {
        let total: BigInt = (0..m.num_transitions()).map(|t| &x[t] * &m.update(t)[c]).sum();
        ensure(!total.is_negative(), || format!("Σ x·u({}) = {total} < 0", c + 1))?;
        ensure(total.is_positive() == w.positive_counters.contains(&(c + 1)), || {
            format!("positive_counters disagrees on counter {}", c + 1)
        })?;
    }
    for p in 0..m.num_states() {
        let inflow: BigInt = (0..m.num_transitions()).filter(|&t| m.dst(t) == p).map(|t| &x[t]).sum();
        let outflow: BigInt = m.out(p).iter().map(|&t| &x[t]).sum();
        ensure(inflow == outflow, || format!("flow at {} is {inflow} in, {outflow} out", m.state(p).name))?;
        if m.is_prob(p) {
            for &t in m.out(p) {
                ensure(q(&x[t]) == m.prob(t).unwrap() * q(&outflow), || {
                    format!("x({}) breaks proportionality", m.transition(t).id)
                })?;
            }
        }
    }
    let support: BTreeSet<String> =
        (0..m.num_transitions()).filter(|&t| x[t].is_positive()).map(|t| m.transition(t).id.clone()).collect();
    ensure(support == w.positive_transitions, || "positive_transitions disagrees with x".into())
}

/// Rows of system (II) for `(y, z)` on `m`, including the listed strict sets.
pub fn check_ranking(m: &VassMdp, r: &RankingFunction) -> Result<(), String> {
    let y = |c: usize| r.y.get(&c).cloned().unwrap_or_default();
    let z = |p: usize| r.z.get(&m.state(p).name).cloned().unwrap_or_default();
    for v in r.y.values().chain(r.z.values()) {
        ensure(!v.is_negative(), || "negative entry in y or z".into())?;
    }
    ensure(r.y.keys().all(|c| (1..=m.dimension()).contains(c)), || "y mentions an unknown counter".into())?;
    let eff = |t: usize| -> BigInt {
        let u: BigInt = m.update(t).iter().enumerate().map(|(i, u)| u * y(i + 1)).sum();
        z(m.dst(t)) - z(m.src(t)) + u
    };
    for p in 0..m.num_states() {
        let name = &m.state(p).name;
        if m.is_prob(p) {
            let e: Rational = m.out(p).iter().map(|&t| m.prob(t).unwrap() * q(&eff(t))).sum();
            ensure(!e.is_positive(), || format!("expected rank change at {name} is positive"))?;
            ensure(e.is_negative() == r.strict_prob.contains(name), || format!("strict_prob disagrees at {name}"))?;
        } else {
            for &t in m.out(p) {
                let id = &m.transition(t).id;
                let e = eff(t);
                ensure(!e.is_positive(), || format!("rank increases along {id}"))?;
                ensure(e.is_negative() == r.strict_nondet.contains(id), || format!("strict_nondet disagrees at {id}"))?;
            }
        }
    }
    Ok(())
}

fn reach(starts: &[usize], edges: &[(usize, usize)]) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = starts.iter().copied().collect();
    let mut queue: VecDeque<usize> = starts.iter().copied().collect();
    while let Some(a) = queue.pop_front() {
        for &(x, y) in edges {
            if x == a && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Bottom-SCC membership, stationary distribution, drift and class of a 1-D witness.
pub fn check_bscc_witness(m: &VassMdp, w: &BsccWitness) -> Result<(), String> {
    let choice = w.strategy.indices(m).map_err(|e| e.to_string())?;
    let states: BTreeSet<usize> = w
        .bscc
        .states
        .iter()
        .map(|s| m.state_idx(s).ok_or_else(|| format!("unknown state {s}")))
        .collect::<Result<_, _>>()?;
    let kept: Vec<usize> = (0..m.num_transitions())
        .filter(|&t| states.contains(&m.src(t)) && (m.is_prob(m.src(t)) || choice[m.src(t)] == Some(t)))
        .collect();
    let ids: BTreeSet<String> = kept.iter().map(|&t| m.transition(t).id.clone()).collect();
    ensure(ids == w.bscc.transitions, || "transition set is not the chain restricted to the states".into())?;
    ensure(kept.iter().all(|&t| states.contains(&m.dst(t))), || "the set is not closed".into())?;
    let edges: Vec<(usize, usize)> = kept.iter().map(|&t| (m.src(t), m.dst(t))).collect();
    let back: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (b, a)).collect();
    let first = *states.iter().next().ok_or("empty BSCC")?;
    ensure(reach(&[first], &edges) == states && reach(&[first], &back) == states, || "not strongly connected".into())?;

    let p = |t: usize| m.prob(t).cloned().unwrap_or_else(Rational::one);
    let pi = |s: usize| w.stationary.get(&m.state(s).name).cloned();
    ensure(w.stationary.len() == states.len(), || "stationary support differs from the BSCC".into())?;
    let mut total = Rational::zero();
    for &s in &states {
        let v = pi(s).ok_or("stationary value missing")?;
        ensure(!v.is_negative(), || "negative stationary mass".into())?;
        total += v;
    }
    ensure(total.is_one(), || "stationary masses do not sum to 1".into())?;
    for &j in &states {
        let inflow: Rational = kept.iter().filter(|&&t| m.dst(t) == j).map(|&t| pi(m.src(t)).unwrap() * p(t)).sum();
        ensure(inflow == pi(j).unwrap(), || format!("π is not stationary at {}", m.state(j).name))?;
    }
    let drift: Rational =
        kept.iter().map(|&t| pi(m.src(t)).unwrap() * p(t) * Rational::from_integer(m.update(t)[0].clone())).sum();
    ensure(drift == w.drift, || "reported drift differs".into())?;

    let mut phi: BTreeMap<usize, BigInt> = [(first, BigInt::zero())].into();
    let mut consistent = true;
    let mut queue = VecDeque::from([first]);
    while let Some(a) = queue.pop_front() {
        for &t in &kept {
            let (x, y, u) = (m.src(t), m.dst(t), &m.update(t)[0]);
            let (from, to, delta) = if x == a {
                (x, y, u.clone())
            } else if y == a {
                (y, x, -u)
            } else {
                continue;
            };
            let want = &phi[&from] + delta;
            match phi.get(&to) {
                Some(v) => consistent &= *v == want,
                None => {
                    phi.insert(to, want);
                    queue.push_back(to);
                }
            }
        }
    }
    let class = if drift.is_positive() {
        BsccClass::Increasing
    } else if drift.is_negative() {
        BsccClass::Decreasing
    } else if consistent {
        BsccClass::BoundedZero
    } else {
        BsccClass::UnboundedZero
    };
    ensure(class == w.class, || format!("class is {class:?}, reported {:?}", w.class))
}

/// Bellman equations plus a least-fixed-point certificate for maximal reachability.
pub fn check_reach_certificate(m: &VassMdp, mecs: &[Mec], c: &ReachCertificate) -> Result<(), String> {
    let mec_of = |s: &str| mecs.iter().find(|k| k.states.contains(s)).map(|k| k.id.as_str());
    let v = |s: usize| c.values.get(&m.state(s).name).cloned();
    let n = m.num_states();
    for s in 0..n {
        let val = v(s).ok_or("missing value")?;
        let name = &m.state(s).name;
        ensure(!val.is_negative() && val <= Rational::one(), || format!("value at {name} outside [0,1]"))?;
        match mec_of(name) {
            Some(k) if k == c.to => ensure(val.is_one(), || format!("target state {name} is not 1"))?,
            Some(k) if k != c.from => ensure(val.is_zero(), || format!("sink state {name} is not 0"))?,
            _ => {
                let succ = m.out(s).iter().map(|&t| (t, v(m.dst(t)).unwrap()));
                let expect = if m.is_prob(s) {
                    succ.map(|(t, x)| m.prob(t).unwrap() * x).sum()
                } else {
                    succ.map(|(_, x)| x).max().unwrap()
                };
                ensure(val == expect, || format!("Bellman equation fails at {name}"))?;
            }
        }
    }
    // Every positive state must reach the target along value-preserving choices.
    let mut good: Vec<bool> = (0..n).map(|s| mec_of(&m.state(s).name) == Some(c.to.as_str())).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if good[s] || !v(s).unwrap().is_positive() {
                continue;
            }
            let ok = if m.is_prob(s) {
                m.out(s).iter().any(|&t| good[m.dst(t)])
            } else {
                m.out(s).iter().any(|&t| good[m.dst(t)] && v(m.dst(t)) == v(s))
            };
            if ok {
                good[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    ensure((0..n).all(|s| good[s] || v(s).unwrap().is_zero()), || "values exceed the least fixed point".into())?;
    let from = mecs.iter().find(|k| k.id == c.from).ok_or("unknown source MEC")?;
    let least = from.states.iter().next().ok_or("empty MEC")?;
    ensure(c.values[least] == c.weight, || "weight is not the value at the least state".into())
}

fn check_type_weight(ty: &TypeSeq, certs: &[ReachCertificate]) -> Result<(), String> {
    let mut w = Rational::one();
    for pair in ty.mecs.windows(2) {
        let c = certs
            .iter()
            .find(|c| c.from == pair[0] && c.to == pair[1])
            .ok_or_else(|| format!("no certificate for {} → {}", pair[0], pair[1]))?;
        w *= &c.weight;
    }
    ensure(w == ty.weight, || "weight differs from the product of certified factors".into())
}

fn sub_model(m: &VassMdp, mec: &Mec) -> Result<VassMdp, String> {
    let s = mec.states.iter().map(|n| m.state_idx(n).unwrap()).collect();
    let t = mec.transitions.iter().map(|n| m.trans_idx(n).unwrap()).collect();
    m.restrict(&s, &t).map_err(|e| e.to_string())
}

/// Re-checks every witness and weight in `r` against `m`.
pub fn verify_report(m: &VassMdp, r: &AnalysisReport) -> Verification {
    let mut v = Verification::default();
    for c in &r.reachability {
        v.record(|| format!("reachability {} → {}", c.from, c.to), check_reach_certificate(m, &r.mecs, c));
    }
    for ty in &r.types {
        v.record(|| format!("weight of [{}]", ty.mecs.join(", ")), check_type_weight(ty, &r.reachability));
    }
    for e in &r.estimates {
        let at = || format!("{} on [{}]", e.measure, e.type_mecs.join(", "));
        match &e.witness {
            None => {}
            Some(EstimateWitness::Bscc(w)) => {
                v.record(|| format!("BSCC witness for {}", at()), check_bscc_witness(m, w))
            }
            Some(EstimateWitness::Pipeline { steps, .. }) => {
                let am = match &e.measure {
                    ComplexityMeasure::Counter(_) => Ok(m.clone()),
                    ComplexityMeasure::Termination => augment_step_counter(m, &StepTarget::EveryTransition),
                    ComplexityMeasure::TransitionCount(t) => augment_step_counter(m, &StepTarget::Only(t.clone())),
                };
                let Ok(am) = am else {
                    v.record(at, Err("measure does not apply to the model".into()));
                    continue;
                };
                for step in steps {
                    let what = || format!("{} in {}", at(), step.mec);
                    let Some(mec) = r.mecs.iter().find(|k| k.id == step.mec) else {
                        v.record(what, Err("unknown MEC".into()));
                        continue;
                    };
                    let pumped = step.before.pumped();
                    let zeroed = sub_model(&am, mec).and_then(|sub| {
                        sub.with_updates(sub.dimension(), |_, t| {
                            t.update
                                .iter()
                                .enumerate()
                                .map(|(i, u)| if pumped.contains(&(i + 1)) { BigInt::zero() } else { u.clone() })
                                .collect()
                        })
                        .map_err(|e| e.to_string())
                    });
                    match zeroed {
                        Ok(z) => {
                            v.record(|| format!("(I) witness for {}", what()), check_system_i(&z, &step.witness));
                            v.record(|| format!("ranking function for {}", what()), check_ranking(&z, &step.ranking));
                        }
                        Err(err) => v.record(what, Err(err)),
                    }
                }
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_vass;
    use crate::report::{analyze, AnalyzeOptions};

    #[test]
    fn reports_verify() {
        for text in
            [include_str!("../../../models/symmetric_walk.json"), include_str!("../../../models/pumping_chain.json")]
        {
            let m = parse_vass(text).unwrap();
            let r = analyze(&m, &AnalyzeOptions::default()).unwrap();
            let v = verify_report(&m, &r);
            assert!(v.ok(), "{:?}", v.failures);
            assert!(v.checked > 0);
        }
    }

    #[test]
    fn tampering_is_caught() {
        let m = parse_vass(include_str!("../../../models/pumping_chain.json")).unwrap();
        let mut r = analyze(&m, &AnalyzeOptions::default()).unwrap();
        r.reachability[0].weight = Rational::new(1.into(), 3.into());
        assert!(!verify_report(&m, &r).ok());

        let m = parse_vass(include_str!("../../../models/symmetric_walk.json")).unwrap();
        let mut r = analyze(&m, &AnalyzeOptions::default()).unwrap();
        let Some(EstimateWitness::Bscc(w)) = r.estimates.iter_mut().find_map(|e| e.witness.as_mut()) else { panic!() };
        w.drift = Rational::one();
        assert!(!verify_report(&m, &r).ok());
    }
}
