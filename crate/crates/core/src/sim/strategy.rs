use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::dichotomy::{compute_maximal_solutions, SystemIWitness};
use crate::graph::decompose;
use crate::model::{format_rational, parse_rational, MdStrategy, ModelError, VassMdp};
use crate::Rational;

/// Controller behaviour at nondeterministic states.
///
/// JSON: `{"p": "t"}` for MD strategies, `{"p": {"t": "2/3", "u": "1/3"}}` for
/// Markovian randomized ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StrategyDoc", into = "StrategyDoc")]
pub enum Strategy {
    Md(MdStrategy),
    Randomized(BTreeMap<String, BTreeMap<String, Rational>>),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum StrategyDoc {
    Md(BTreeMap<String, String>),
    Randomized(BTreeMap<String, BTreeMap<String, String>>),
}

impl TryFrom<StrategyDoc> for Strategy {
    type Error = ModelError;

    fn try_from(d: StrategyDoc) -> Result<Self, ModelError> {
        Ok(match d {
            StrategyDoc::Md(choice) => Strategy::Md(MdStrategy { choice }),
            StrategyDoc::Randomized(map) => Strategy::Randomized(
                map.into_iter()
                    .map(|(p, dist)| {
                        let dist = dist
                            .into_iter()
                            .map(|(t, w)| Ok((t, parse_rational(&w)?)))
                            .collect::<Result<_, ModelError>>()?;
                        Ok((p, dist))
                    })
                    .collect::<Result<_, ModelError>>()?,
            ),
        })
    }
}

impl From<Strategy> for StrategyDoc {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Md(md) => StrategyDoc::Md(md.choice),
            Strategy::Randomized(map) => StrategyDoc::Randomized(
                map.into_iter()
                    .map(|(p, dist)| (p, dist.iter().map(|(t, w)| (t.clone(), format_rational(w))).collect()))
                    .collect(),
            ),
        }
    }
}

impl From<MdStrategy> for Strategy {
    fn from(s: MdStrategy) -> Self {
        Strategy::Md(s)
    }
}

impl Strategy {
    /// Outgoing distribution of every state, with probabilistic states taken from `m`.
    pub fn distributions(&self, m: &VassMdp) -> Result<Vec<Vec<(usize, Rational)>>, SimError> {
        let mut out: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); m.num_states()];
        for (i, slot) in out.iter_mut().enumerate() {
            if m.is_prob(i) {
                *slot = m.out(i).iter().map(|&t| (t, m.prob(t).unwrap().clone())).collect();
            }
        }
        match self {
            Strategy::Md(md) => {
                for (i, c) in md.indices(m)?.into_iter().enumerate() {
                    if let Some(t) = c {
                        out[i] = vec![(t, Rational::one())];
                    }
                }
            }
            Strategy::Randomized(map) => {
                for (p, dist) in map {
                    let i = m.state_idx(p).ok_or_else(|| ModelError::UnknownState(p.clone()))?;
                    if m.is_prob(i) {
                        return Err(SimError::InvalidStrategy(format!("state {p} is probabilistic")));
                    }
                    let mut total = Rational::zero();
                    for (t, w) in dist {
                        let ti = m.trans_idx(t).ok_or_else(|| ModelError::UnknownTransition(t.clone()))?;
                        if m.src(ti) != i {
                            return Err(SimError::InvalidStrategy(format!("transition {t} does not leave {p}")));
                        }
                        if !w.is_positive() {
                            return Err(SimError::InvalidStrategy(format!("weight of {t} at {p} is not positive")));
                        }
                        total += w;
                        out[i].push((ti, w.clone()));
                    }
                    if !total.is_one() {
                        return Err(SimError::InvalidStrategy(format!(
                            "weights at {p} sum to {}",
                            format_rational(&total)
                        )));
                    }
                    out[i].sort_by_key(|e| e.0);
                }
                if let Some(i) = (0..m.num_states()).find(|&i| !m.is_prob(i) && out[i].is_empty()) {
                    return Err(ModelError::IncompleteStrategy(m.state(i).name.clone()).into());
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self, m: &VassMdp) -> Result<(), SimError> {
        self.distributions(m).map(|_| ())
    }
}

/// Markovian strategy that follows `x(t) / Σ_{Out(p)} x` on the support of `w`
/// and the least transition id elsewhere.
pub fn multicycle_strategy_from_x(m: &VassMdp, w: &SystemIWitness) -> Result<Strategy, SimError> {
    let mut x = vec![BigInt::zero(); m.num_transitions()];
    for (id, v) in &w.x {
        let t = m.trans_idx(id).ok_or_else(|| ModelError::UnknownTransition(id.clone()))?;
        x[t] = v.clone();
    }
    if x.iter().all(Zero::is_zero) {
        return Err(SimError::ZeroWitness);
    }
    let mut map = BTreeMap::new();
    for i in (0..m.num_states()).filter(|&i| !m.is_prob(i)) {
        let total: BigInt = m.out(i).iter().map(|&t| &x[t]).sum();
        let dist: BTreeMap<String, Rational> = if total.is_zero() {
            [(m.transition(m.out(i)[0]).id.clone(), Rational::one())].into()
        } else {
            m.out(i)
                .iter()
                .filter(|&&t| !x[t].is_zero())
                .map(|&t| (m.transition(t).id.clone(), Rational::new(x[t].clone(), total.clone())))
                .collect()
        };
        map.insert(m.state(i).name.clone(), dist);
    }
    if map.values().all(|d| d.len() == 1) {
        let choice = map.into_iter().map(|(p, d)| (p, d.into_keys().next().unwrap())).collect();
        return Ok(Strategy::Md(MdStrategy { choice }));
    }
    Ok(Strategy::Randomized(map))
}

/// Multicycle strategy assembled from the maximal (I)-witness of every MEC.
pub fn witness_strategy(m: &VassMdp) -> Result<Strategy, SimError> {
    let dec = decompose(m);
    let mut merged = SystemIWitness {
        x: BTreeMap::new(),
        positive_counters: Default::default(),
        positive_transitions: Default::default(),
    };
    for k in 0..dec.len() {
        let (w, _) = compute_maximal_solutions(&dec.sub_model(m, k))?;
        merged.x.extend(w.x);
        merged.positive_transitions.extend(w.positive_transitions);
    }
    multicycle_strategy_from_x(m, &merged)
}
