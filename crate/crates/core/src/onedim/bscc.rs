use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{require_1d, Bscc, BsccClass, BsccWitness, OneDimError};
use crate::graph::sccs;
use crate::model::{MdStrategy, VassMdp};
use crate::ratlp::linalg;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsccAnalysis {
    pub class: BsccClass,
    pub drift: Rational,
    pub stationary: BTreeMap<String, Rational>,
}

/// Probability of `t` in the chain induced by an MD choice.
fn chain_prob(m: &VassMdp, t: usize) -> Rational {
    m.prob(t).cloned().unwrap_or_else(Rational::one)
}

fn kept(m: &VassMdp, choice: &[Option<usize>], t: usize) -> bool {
    let s = m.src(t);
    m.is_prob(s) || choice[s] == Some(t)
}

/// Bottom SCCs of `A_σ` as (sorted states, sorted transitions).
pub(crate) fn bsccs_idx(m: &VassMdp, choice: &[Option<usize>]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let edges: Vec<usize> = (0..m.num_transitions()).filter(|&t| kept(m, choice, t)).collect();
    let comps = sccs(m.num_states(), edges.iter().map(|&t| (m.src(t), m.dst(t))));
    let mut comp = vec![0; m.num_states()];
    for (k, c) in comps.iter().enumerate() {
        for &s in c {
            comp[s] = k;
        }
    }
    let mut leaves = vec![false; comps.len()];
    for &t in &edges {
        if comp[m.src(t)] != comp[m.dst(t)] {
            leaves[comp[m.src(t)]] = true;
        }
    }
    comps
        .into_iter()
        .enumerate()
        .filter(|(k, _)| !leaves[*k])
        .map(|(_, states)| {
            let trans = edges.iter().copied().filter(|&t| comp[m.src(t)] == comp[states[0]]).collect();
            (states, trans)
        })
        .collect()
}

/// Do all cycles inside the component have effect 0 on counter 0?
pub(crate) fn potential_consistent(m: &VassMdp, trans: &[usize]) -> bool {
    let mut phi: HashMap<usize, BigInt> = HashMap::new();
    let Some(&first) = trans.first() else { return true };
    phi.insert(m.src(first), BigInt::zero());
    // Propagate along edges until every endpoint has a potential.
    loop {
        let mut changed = false;
        for &t in trans {
            let (s, d) = (m.src(t), m.dst(t));
            if let Some(ps) = phi.get(&s).cloned() {
                let expect = ps + &m.update(t)[0];
                match phi.get(&d) {
                    Some(pd) if *pd != expect => return false,
                    Some(_) => {}
                    None => {
                        phi.insert(d, expect);
                        changed = true;
                    }
                }
            } else if let Some(pd) = phi.get(&d).cloned() {
                phi.insert(s, pd - &m.update(t)[0]);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    trans.iter().all(|&t| {
        let (s, d) = (m.src(t), m.dst(t));
        match (phi.get(&s), phi.get(&d)) {
            (Some(ps), Some(pd)) => ps + &m.update(t)[0] == *pd,
            _ => true,
        }
    })
}

/// Exact stationary distribution, drift and class of a closed recurrent component.
pub(crate) fn analyze_idx(m: &VassMdp, states: &[usize], trans: &[usize]) -> (BsccClass, Vec<Rational>, Rational) {
    let k = states.len();
    let pos: HashMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    // Row j: π_j − Σ_{t→j} π_src P(t) = 0, with row 0 replaced by Σ π = 1.
    let mut a = vec![vec![Rational::zero(); k]; k];
    let mut b = vec![Rational::zero(); k];
    for (j, row) in a.iter_mut().enumerate().skip(1) {
        row[j] = Rational::one();
    }
    for &t in trans {
        let j = pos[&m.dst(t)];
        if j == 0 {
            continue;
        }
        let i = pos[&m.src(t)];
        a[j][i] -= chain_prob(m, t);
    }
    for v in a[0].iter_mut() {
        *v = Rational::one();
    }
    b[0] = Rational::one();
    let pi = linalg::solve(a, b).expect("an irreducible chain has a unique stationary distribution");
    let drift: Rational = trans
        .iter()
        .map(|&t| pi[pos[&m.src(t)]].clone() * chain_prob(m, t) * Rational::from_integer(m.update(t)[0].clone()))
        .sum();
    let class = if drift.is_positive() {
        BsccClass::Increasing
    } else if drift.is_negative() {
        BsccClass::Decreasing
    } else if potential_consistent(m, trans) {
        BsccClass::BoundedZero
    } else {
        BsccClass::UnboundedZero
    };
    (class, pi, drift)
}

pub(crate) fn witness_idx(m: &VassMdp, choice: &[Option<usize>], states: &[usize], trans: &[usize]) -> BsccWitness {
    let (class, pi, drift) = analyze_idx(m, states, trans);
    BsccWitness {
        strategy: MdStrategy::from_indices(m, choice),
        bscc: to_bscc(m, states, trans),
        class,
        drift,
        stationary: states.iter().zip(pi).map(|(&s, p)| (m.state(s).name.clone(), p)).collect(),
    }
}

pub(crate) fn to_bscc(m: &VassMdp, states: &[usize], trans: &[usize]) -> Bscc {
    Bscc {
        states: states.iter().map(|&s| m.state(s).name.clone()).collect(),
        transitions: trans.iter().map(|&t| m.transition(t).id.clone()).collect(),
    }
}

/// Bottom SCCs of the chain induced by `s`.
pub fn bottom_sccs(m: &VassMdp, s: &MdStrategy) -> Result<Vec<Bscc>, OneDimError> {
    let choice = s.indices(m)?;
    Ok(bsccs_idx(m, &choice).iter().map(|(st, tr)| to_bscc(m, st, tr)).collect())
}

/// Stationary distribution, drift and class of a bottom SCC of `A_s`.
pub fn analyze_bscc(m: &VassMdp, s: &MdStrategy, b: &Bscc) -> Result<BsccAnalysis, OneDimError> {
    require_1d(m)?;
    let choice = s.indices(m)?;
    let (states, trans) = bsccs_idx(m, &choice)
        .into_iter()
        .find(|(st, tr)| to_bscc(m, st, tr) == *b)
        .ok_or(OneDimError::NotABottomScc)?;
    let w = witness_idx(m, &choice, &states, &trans);
    Ok(BsccAnalysis { class: w.class, drift: w.drift, stationary: w.stationary })
}

pub fn classify_bscc(m: &VassMdp, s: &MdStrategy, b: &Bscc) -> Result<BsccClass, OneDimError> {
    analyze_bscc(m, s, b).map(|a| a.class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StateDef, StateKind, Transition};

    fn only_bscc(m: &VassMdp) -> (MdStrategy, Bscc) {
        let s = MdStrategy::least_ids(m);
        let b = bottom_sccs(m, &s).unwrap();
        assert_eq!(b.len(), 1);
        (s, b[0].clone())
    }

    fn loop_model(u: i64) -> VassMdp {
        VassMdp::new(
            1,
            vec![StateDef::new("p", StateKind::Nondet)],
            vec![Transition::new("t", "p", vec![u], "p", None)],
        )
        .unwrap()
    }

    #[test]
    fn single_loops() {
        for (u, class) in [(1, BsccClass::Increasing), (-1, BsccClass::Decreasing), (0, BsccClass::BoundedZero)] {
            let m = loop_model(u);
            let (s, b) = only_bscc(&m);
            assert_eq!(classify_bscc(&m, &s, &b).unwrap(), class);
        }
    }

    #[test]
    fn symmetric_walk_is_unbounded_zero() {
        let half = || Some(Rational::new(1.into(), 2.into()));
        let m = VassMdp::new(
            1,
            vec![StateDef::new("p", StateKind::Prob)],
            vec![Transition::new("a", "p", vec![1], "p", half()), Transition::new("b", "p", vec![-1], "p", half())],
        )
        .unwrap();
        let (s, b) = only_bscc(&m);
        let a = analyze_bscc(&m, &s, &b).unwrap();
        assert_eq!(a.class, BsccClass::UnboundedZero);
        assert_eq!(a.stationary["p"], Rational::one());
    }

    #[test]
    fn deterministic_two_cycle_is_bounded_zero() {
        let m = VassMdp::new(
            1,
            vec![StateDef::new("a", StateKind::Nondet), StateDef::new("b", StateKind::Nondet)],
            vec![Transition::new("ab", "a", vec![1], "b", None), Transition::new("ba", "b", vec![-1], "a", None)],
        )
        .unwrap();
        let (s, b) = only_bscc(&m);
        let a = analyze_bscc(&m, &s, &b).unwrap();
        assert_eq!(a.class, BsccClass::BoundedZero);
        assert_eq!(a.stationary["a"], Rational::new(1.into(), 2.into()));
    }

    #[test]
    fn rejects_non_bottom_set() {
        let m = loop_model(1);
        let s = MdStrategy::least_ids(&m);
        let bogus = Bscc { states: ["p".to_string()].into(), transitions: Default::default() };
        assert_eq!(classify_bscc(&m, &s, &bogus), Err(OneDimError::NotABottomScc));
    }

    #[test]
    fn drift_sign_is_order_free() {
        // Three-state cycle with a probabilistic branch; relabelling states keeps the class.
        let third = |a: i64| Some(Rational::new(a.into(), 3.into()));
        let build = |names: [&str; 3]| {
            VassMdp::new(
                1,
                vec![
                    StateDef::new(names[0], StateKind::Prob),
                    StateDef::new(names[1], StateKind::Nondet),
                    StateDef::new(names[2], StateKind::Nondet),
                ],
                vec![
                    Transition::new("x", names[0], vec![2], names[1], third(1)),
                    Transition::new("y", names[0], vec![-1], names[2], third(2)),
                    Transition::new("z", names[1], vec![0], names[0], None),
                    Transition::new("w", names[2], vec![0], names[0], None),
                ],
            )
            .unwrap()
        };
        let m1 = build(["a", "b", "c"]);
        let m2 = build(["z3", "a1", "b2"]);
        let (s1, b1) = only_bscc(&m1);
        let (s2, b2) = only_bscc(&m2);
        let a1 = analyze_bscc(&m1, &s1, &b1).unwrap();
        let a2 = analyze_bscc(&m2, &s2, &b2).unwrap();
        assert_eq!(a1.class, BsccClass::UnboundedZero);
        assert_eq!((a1.class, a1.drift), (a2.class, a2.drift));
    }
}
