//! VASS MDPs, configurations, strategies and the JSON input format.
//!
//! States and transitions are kept sorted by name and id, so iteration order,
//! tie-breaking and serialization are deterministic. Algorithms address
//! states and transitions by their index in these sorted lists.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Nondet,
    Prob,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateDef {
    pub name: String,
    pub kind: StateKind,
}

impl StateDef {
    pub fn new(name: impl Into<String>, kind: StateKind) -> Self {
        StateDef { name: name.into(), kind }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub id: String,
    pub from: String,
    pub update: Vec<BigInt>,
    pub to: String,
    /// Present iff `from` is probabilistic.
    pub prob: Option<Rational>,
}

impl Transition {
    pub fn new(
        id: impl Into<String>,
        from: impl Into<String>,
        update: Vec<i64>,
        to: impl Into<String>,
        prob: Option<Rational>,
    ) -> Self {
        Transition {
            id: id.into(),
            from: from.into(),
            update: update.into_iter().map(BigInt::from).collect(),
            to: to.into(),
            prob,
        }
    }
}

/// The structural rule a model violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    PositiveDimension,
    NonEmptyStates,
    UniqueStateNames,
    UniqueTransitionIds,
    KnownEndpoints,
    UpdateLength,
    ProbabilityPresence,
    ProbabilityRange,
    ProbabilitySum,
    NonEmptyOut,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::PositiveDimension => "positive-dimension",
            Rule::NonEmptyStates => "non-empty-states",
            Rule::UniqueStateNames => "unique-state-names",
            Rule::UniqueTransitionIds => "unique-transition-ids",
            Rule::KnownEndpoints => "known-endpoints",
            Rule::UpdateLength => "update-length",
            Rule::ProbabilityPresence => "probability-iff-probabilistic-source",
            Rule::ProbabilityRange => "probability-in-(0,1]",
            Rule::ProbabilitySum => "probabilities-sum-to-one",
            Rule::NonEmptyOut => "every-state-has-an-outgoing-transition",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed document: {0}")]
    Schema(String),
    #[error("invalid model ({rule}): {detail}")]
    Validation { rule: Rule, detail: String },
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("strategy has no choice for nondeterministic state `{0}`")]
    IncompleteStrategy(String),
    #[error("strategy picks `{transition}`, which does not leave `{state}`")]
    InvalidChoice { state: String, transition: String },
}

fn invalid(rule: Rule, detail: impl Into<String>) -> ModelError {
    ModelError::Validation { rule, detail: detail.into() }
}

/// A validated d-dimensional VASS MDP.
#[derive(Clone, Debug)]
pub struct VassMdp {
    dimension: usize,
    states: Vec<StateDef>,
    transitions: Vec<Transition>,
    state_index: HashMap<String, usize>,
    trans_index: HashMap<String, usize>,
    src: Vec<usize>,
    dst: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl PartialEq for VassMdp {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.states == other.states && self.transitions == other.transitions
    }
}

impl Eq for VassMdp {}

impl VassMdp {
    /// Validates and builds a model. Dimension 0 is allowed here (it is a
    /// legitimate degenerate case for the constraint systems) but rejected by
    /// [`parse_vass`].
    pub fn new(
        dimension: usize,
        mut states: Vec<StateDef>,
        mut transitions: Vec<Transition>,
    ) -> Result<Self, ModelError> {
        if states.is_empty() {
            return Err(invalid(Rule::NonEmptyStates, "the model has no states"));
        }
        states.sort_by(|a, b| a.name.cmp(&b.name));
        transitions.sort_by(|a, b| a.id.cmp(&b.id));
        let mut state_index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if state_index.insert(s.name.clone(), i).is_some() {
                return Err(invalid(Rule::UniqueStateNames, format!("state `{}` is declared twice", s.name)));
            }
        }
        let mut trans_index = HashMap::new();
        let mut src = Vec::with_capacity(transitions.len());
        let mut dst = Vec::with_capacity(transitions.len());
        let mut out = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            if trans_index.insert(t.id.clone(), i).is_some() {
                return Err(invalid(Rule::UniqueTransitionIds, format!("transition `{}` is declared twice", t.id)));
            }
            let (Some(&p), Some(&q)) = (state_index.get(&t.from), state_index.get(&t.to)) else {
                return Err(invalid(Rule::KnownEndpoints, format!("transition `{}` connects undeclared states", t.id)));
            };
            if t.update.len() != dimension {
                return Err(invalid(
                    Rule::UpdateLength,
                    format!("transition `{}` has {} components, expected {}", t.id, t.update.len(), dimension),
                ));
            }
            let is_prob = states[p].kind == StateKind::Prob;
            match (&t.prob, is_prob) {
                (Some(pr), true) => {
                    if !pr.is_positive() || *pr > Rational::one() {
                        return Err(invalid(
                            Rule::ProbabilityRange,
                            format!("transition `{}` has probability {}", t.id, pr),
                        ));
                    }
                }
                (None, false) => {}
                _ => {
                    return Err(invalid(
                        Rule::ProbabilityPresence,
                        format!("transition `{}`: probability given iff its source is probabilistic", t.id),
                    ))
                }
            }
            src.push(p);
            dst.push(q);
            out[p].push(i);
        }
        for (i, s) in states.iter().enumerate() {
            if out[i].is_empty() {
                return Err(invalid(Rule::NonEmptyOut, format!("state `{}` has no outgoing transition", s.name)));
            }
            if s.kind == StateKind::Prob {
                let sum: Rational = out[i].iter().map(|&t| transitions[t].prob.clone().unwrap()).sum();
                if !sum.is_one() {
                    return Err(invalid(
                        Rule::ProbabilitySum,
                        format!("outgoing probabilities of `{}` sum to {}", s.name, sum),
                    ));
                }
            }
        }
        Ok(VassMdp { dimension, states, transitions, state_index, trans_index, src, dst, out })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn states(&self) -> &[StateDef] {
        &self.states
    }
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }
    pub fn num_states(&self) -> usize {
        self.states.len()
    }
    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }
    pub fn state_idx(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }
    pub fn trans_idx(&self, id: &str) -> Option<usize> {
        self.trans_index.get(id).copied()
    }
    pub fn state(&self, i: usize) -> &StateDef {
        &self.states[i]
    }
    pub fn transition(&self, t: usize) -> &Transition {
        &self.transitions[t]
    }
    pub fn src(&self, t: usize) -> usize {
        self.src[t]
    }
    pub fn dst(&self, t: usize) -> usize {
        self.dst[t]
    }
    /// Outgoing transitions of state `i`, in id order.
    pub fn out(&self, i: usize) -> &[usize] {
        &self.out[i]
    }
    pub fn is_prob(&self, i: usize) -> bool {
        self.states[i].kind == StateKind::Prob
    }
    /// Probability of transition `t`; `None` for a nondeterministic source.
    pub fn prob(&self, t: usize) -> Option<&Rational> {
        self.transitions[t].prob.as_ref()
    }
    pub fn update(&self, t: usize) -> &[BigInt] {
        &self.transitions[t].update
    }

    /// Restricts the model to a closed set of states and transitions.
    pub fn restrict(&self, states: &BTreeSet<usize>, transitions: &BTreeSet<usize>) -> Result<VassMdp, ModelError> {
        VassMdp::new(
            self.dimension,
            states.iter().map(|&i| self.states[i].clone()).collect(),
            transitions.iter().map(|&t| self.transitions[t].clone()).collect(),
        )
    }

    /// Replaces every update by `f(index, transition)`, which must have length `dimension`.
    pub fn with_updates(
        &self,
        dimension: usize,
        f: impl Fn(usize, &Transition) -> Vec<BigInt>,
    ) -> Result<VassMdp, ModelError> {
        let ts =
            self.transitions.iter().enumerate().map(|(i, t)| Transition { update: f(i, t), ..t.clone() }).collect();
        VassMdp::new(dimension, self.states.clone(), ts)
    }

    /// Counters `0..k` of every update (a projection).
    pub fn project(&self, k: usize) -> Result<VassMdp, ModelError> {
        self.with_updates(k, |_, t| t.update[..k].to_vec())
    }
}

/// Which transitions increment the fresh counter in [`augment_step_counter`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepTarget {
    EveryTransition,
    Only(String),
}

/// Appends counter `d+1`, incremented on every transition or on one transition,
/// so that its maximum equals the termination time or the use count.
pub fn augment_step_counter(m: &VassMdp, target: &StepTarget) -> Result<VassMdp, ModelError> {
    if let StepTarget::Only(id) = target {
        if m.trans_idx(id).is_none() {
            return Err(ModelError::UnknownTransition(id.clone()));
        }
    }
    m.with_updates(m.dimension + 1, |_, t| {
        let inc = match target {
            StepTarget::EveryTransition => true,
            StepTarget::Only(id) => *id == t.id,
        };
        let mut u = t.update.clone();
        u.push(BigInt::from(inc as u8));
        u
    })
}

/// A memoryless deterministic strategy: one outgoing transition per nondeterministic state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MdStrategy {
    pub choice: BTreeMap<String, String>,
}

impl MdStrategy {
    /// Picks the least transition id at every nondeterministic state.
    pub fn least_ids(m: &VassMdp) -> MdStrategy {
        let choice = (0..m.num_states())
            .filter(|&i| !m.is_prob(i))
            .map(|i| (m.state(i).name.clone(), m.transition(m.out(i)[0]).id.clone()))
            .collect();
        MdStrategy { choice }
    }

    /// Checks totality and that each choice leaves its state.
    pub fn validate(&self, m: &VassMdp) -> Result<(), ModelError> {
        for (state, t) in &self.choice {
            let i = m.state_idx(state).ok_or_else(|| ModelError::UnknownState(state.clone()))?;
            let ti = m.trans_idx(t).ok_or_else(|| ModelError::UnknownTransition(t.clone()))?;
            if m.is_prob(i) || m.src(ti) != i {
                return Err(ModelError::InvalidChoice { state: state.clone(), transition: t.clone() });
            }
        }
        for i in 0..m.num_states() {
            if !m.is_prob(i) && !self.choice.contains_key(&m.state(i).name) {
                return Err(ModelError::IncompleteStrategy(m.state(i).name.clone()));
            }
        }
        Ok(())
    }

    /// Chosen transition index per state (`None` at probabilistic states).
    pub fn indices(&self, m: &VassMdp) -> Result<Vec<Option<usize>>, ModelError> {
        self.validate(m)?;
        Ok((0..m.num_states()).map(|i| self.choice.get(&m.state(i).name).map(|t| m.trans_idx(t).unwrap())).collect())
    }

    pub fn from_indices(m: &VassMdp, choice: &[Option<usize>]) -> MdStrategy {
        MdStrategy {
            choice: choice
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.map(|t| (m.state(i).name.clone(), m.transition(t).id.clone())))
                .collect(),
        }
    }
}

/// The Markov chain obtained by keeping only the chosen transition at each
/// nondeterministic state. Nondeterministic states keep their kind.
pub fn apply_md_strategy(m: &VassMdp, s: &MdStrategy) -> Result<VassMdp, ModelError> {
    let choice = s.indices(m)?;
    let kept = (0..m.num_transitions())
        .filter(|&t| m.is_prob(m.src(t)) || choice[m.src(t)] == Some(t))
        .map(|t| m.transition(t).clone())
        .collect();
    VassMdp::new(m.dimension, m.states.clone(), kept)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub state: String,
    pub counters: Vec<BigInt>,
}

impl Configuration {
    /// The configuration `p·(n,…,n)`.
    pub fn uniform(state: impl Into<String>, d: usize, n: u64) -> Self {
        Configuration { state: state.into(), counters: vec![BigInt::from(n); d] }
    }

    pub fn is_terminal(&self) -> bool {
        self.counters.iter().any(|c| c.is_negative())
    }
}

/// Termination time `L`, counter maximum `C[c]` (1-based) or use count `T[t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComplexityMeasure {
    Termination,
    Counter(usize),
    TransitionCount(String),
}

impl ComplexityMeasure {
    pub fn validate(&self, m: &VassMdp) -> Result<(), ModelError> {
        match self {
            ComplexityMeasure::Termination => Ok(()),
            ComplexityMeasure::Counter(c) if (1..=m.dimension).contains(c) => Ok(()),
            ComplexityMeasure::Counter(c) => {
                Err(ModelError::Schema(format!("counter {} is out of range 1..={}", c, m.dimension)))
            }
            ComplexityMeasure::TransitionCount(t) => {
                m.trans_idx(t).map(|_| ()).ok_or_else(|| ModelError::UnknownTransition(t.clone()))
            }
        }
    }

    /// `L`, `C[1..d]` and `T[t]` for every transition.
    pub fn all(m: &VassMdp) -> Vec<ComplexityMeasure> {
        let mut v = vec![ComplexityMeasure::Termination];
        v.extend((1..=m.dimension).map(ComplexityMeasure::Counter));
        v.extend(m.transitions.iter().map(|t| ComplexityMeasure::TransitionCount(t.id.clone())));
        v
    }
}

impl fmt::Display for ComplexityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexityMeasure::Termination => write!(f, "L"),
            ComplexityMeasure::Counter(c) => write!(f, "C[{c}]"),
            ComplexityMeasure::TransitionCount(t) => write!(f, "T[{t}]"),
        }
    }
}

impl FromStr for ComplexityMeasure {
    type Err = ModelError;

    /// Accepts `L`, `C[c]` / `C:c` and `T[t]` / `T:t`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::Schema(format!("unrecognized measure `{s}` (expected L, C[c] or T[t])"));
        if s == "L" {
            return Ok(ComplexityMeasure::Termination);
        }
        let (head, arg) = if let Some(rest) = s.get(1..).and_then(|r| r.strip_prefix('[')) {
            (&s[..1], rest.strip_suffix(']').ok_or_else(bad)?)
        } else if let Some(rest) = s.get(1..).and_then(|r| r.strip_prefix(':')) {
            (&s[..1], rest)
        } else {
            return Err(bad());
        };
        match head {
            "C" => arg.parse().map(ComplexityMeasure::Counter).map_err(|_| bad()),
            "T" if !arg.is_empty() => Ok(ComplexityMeasure::TransitionCount(arg.to_string())),
            _ => Err(bad()),
        }
    }
}

impl Serialize for ComplexityMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComplexityMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---- JSON document ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    name: String,
    kind: StateKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    id: String,
    from: String,
    update: Vec<serde_json::Number>,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prob: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    dimension: serde_json::Number,
    states: Vec<StateDoc>,
    transitions: Vec<TransitionDoc>,
}

/// Parses an exact rational written as `"a/b"` or `"a"`.
pub fn parse_rational(s: &str) -> Result<Rational, ModelError> {
    let ok = !s.is_empty()
        && s.split('/').count() <= 2
        && s.split('/').enumerate().all(|(i, part)| {
            let digits = if i == 0 { part.strip_prefix('-').unwrap_or(part) } else { part };
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        });
    if !ok {
        return Err(ModelError::Schema(format!("`{s}` is not an exact rational (use \"a/b\" or \"a\")")));
    }
    let q = Rational::from_str(s).map_err(|e| ModelError::Schema(format!("`{s}`: {e}")))?;
    Ok(q)
}

fn parse_int(n: &serde_json::Number) -> Result<BigInt, ModelError> {
    let s = n.to_string();
    BigInt::from_str(&s).map_err(|_| ModelError::Schema(format!("update entry `{s}` is not an integer")))
}

/// Parses and validates a model from its JSON document.
pub fn parse_vass(text: &str) -> Result<VassMdp, ModelError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
    let d = doc
        .dimension
        .as_u64()
        .ok_or_else(|| ModelError::Schema(format!("dimension `{}` is not a nonnegative integer", doc.dimension)))?;
    if d == 0 {
        return Err(invalid(Rule::PositiveDimension, "dimension must be at least 1"));
    }
    let states = doc.states.into_iter().map(|s| StateDef { name: s.name, kind: s.kind }).collect();
    let mut transitions = Vec::with_capacity(doc.transitions.len());
    for t in doc.transitions {
        let update = t.update.iter().map(parse_int).collect::<Result<Vec<_>, _>>()?;
        let prob = t.prob.as_deref().map(parse_rational).transpose()?;
        transitions.push(Transition { id: t.id, from: t.from, update, to: t.to, prob });
    }
    VassMdp::new(d as usize, states, transitions)
}

fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serializes a model to its (pretty-printed) JSON document.
pub fn to_json(m: &VassMdp) -> String {
    let doc = ModelDoc {
        dimension: m.dimension.into(),
        states: m.states.iter().map(|s| StateDoc { name: s.name.clone(), kind: s.kind }).collect(),
        transitions: m
            .transitions
            .iter()
            .map(|t| TransitionDoc {
                id: t.id.clone(),
                from: t.from.clone(),
                update: t
                    .update
                    .iter()
                    .map(|u| serde_json::Number::from_str(&u.to_string()).expect("integers are valid numbers"))
                    .collect(),
                to: t.to.clone(),
                prob: t.prob.as_ref().map(rational_string),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model documents always serialize")
}

/// Formats a rational the way the JSON documents do (`"a/b"` or `"a"`).
pub fn format_rational(q: &Rational) -> String {
    rational_string(q)
}

/// Zero vector of the model's dimension.
pub fn zero_update(d: usize) -> Vec<BigInt> {
    vec![BigInt::zero(); d]
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const WALK: &str = r#"{"dimension":1,
      "states":[{"name":"p","kind":"prob"}],
      "transitions":[
        {"id":"t+","from":"p","update":[1],"to":"p","prob":"1/2"},
        {"id":"t-","from":"p","update":[-1],"to":"p","prob":"1/2"}]}"#;

    fn expect_rule(text: &str, rule: Rule) {
        match parse_vass(text) {
            Err(ModelError::Validation { rule: r, .. }) => assert_eq!(r, rule),
            other => panic!("expected {rule:?}, got {other:?}"),
        }
    }

    #[test]
    fn parses_symmetric_walk() {
        let m = parse_vass(WALK).unwrap();
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.num_transitions(), 2);
        assert_eq!(m.prob(0), Some(&Rational::new(1.into(), 2.into())));
    }

    #[test]
    fn rejects_bad_probability_sum() {
        expect_rule(&WALK.replacen("1/2", "1/4", 1), Rule::ProbabilitySum);
    }

    #[test]
    fn rejects_state_without_out() {
        let text = r#"{"dimension":1,"states":[{"name":"p","kind":"nondet"},{"name":"q","kind":"nondet"}],
          "transitions":[{"id":"a","from":"p","update":[0],"to":"q"}]}"#;
        expect_rule(text, Rule::NonEmptyOut);
    }

    #[test]
    fn rejects_float_probability_and_update() {
        assert!(matches!(parse_vass(&WALK.replace("\"1/2\"", "0.5")), Err(ModelError::Schema(_))));
        assert!(matches!(parse_vass(&WALK.replacen("\"1/2\"", "\"0.5\"", 1)), Err(ModelError::Schema(_))));
        assert!(matches!(parse_vass(&WALK.replace("[1]", "[1.5]")), Err(ModelError::Schema(_))));
    }

    #[test]
    fn rejects_misplaced_probability() {
        let text = WALK.replace("\"prob\"}]", "\"nondet\"}]");
        expect_rule(&text, Rule::ProbabilityPresence);
    }

    #[test]
    fn rejects_zero_dimension() {
        let text = r#"{"dimension":0,"states":[{"name":"p","kind":"nondet"}],
          "transitions":[{"id":"a","from":"p","update":[],"to":"p"}]}"#;
        expect_rule(text, Rule::PositiveDimension);
    }

    #[test]
    fn big_updates_survive() {
        let text = WALK.replace("[1]", "[123456789012345678901234567890]");
        let m = parse_vass(&text).unwrap();
        assert_eq!(m.update(0)[0].to_string(), "123456789012345678901234567890");
        assert_eq!(parse_vass(&to_json(&m)).unwrap(), m);
    }

    #[test]
    fn augmentation() {
        let m = parse_vass(WALK).unwrap();
        let a = augment_step_counter(&m, &StepTarget::EveryTransition).unwrap();
        assert_eq!(a.update(0), &[BigInt::from(1), BigInt::from(1)]);
        assert_eq!(a.update(1), &[BigInt::from(-1), BigInt::from(1)]);
        let b = augment_step_counter(&m, &StepTarget::Only("t+".into())).unwrap();
        assert_eq!(b.update(0), &[BigInt::from(1), BigInt::from(1)]);
        assert_eq!(b.update(1), &[BigInt::from(-1), BigInt::from(0)]);
        assert_eq!(b.project(1).unwrap(), m);
        assert_eq!(
            augment_step_counter(&m, &StepTarget::Only("nope".into())),
            Err(ModelError::UnknownTransition("nope".into()))
        );
    }

    #[test]
    fn strategy_application() {
        let m = VassMdp::new(
            1,
            vec![StateDef::new("p", StateKind::Nondet)],
            vec![Transition::new("up", "p", vec![1], "p", None), Transition::new("down", "p", vec![-1], "p", None)],
        )
        .unwrap();
        let s = MdStrategy { choice: BTreeMap::from([("p".into(), "up".into())]) };
        let c = apply_md_strategy(&m, &s).unwrap();
        assert_eq!(c.num_transitions(), 1);
        assert_eq!(c.transition(0).id, "up");
        assert_eq!(apply_md_strategy(&m, &MdStrategy::default()), Err(ModelError::IncompleteStrategy("p".into())));
        let walk = parse_vass(WALK).unwrap();
        assert_eq!(apply_md_strategy(&walk, &MdStrategy::default()).unwrap(), walk);
    }

    #[test]
    fn measure_syntax() {
        for s in ["L", "C[2]", "T[t+]"] {
            assert_eq!(s.parse::<ComplexityMeasure>().unwrap().to_string(), s);
        }
        assert_eq!("C:3".parse::<ComplexityMeasure>().unwrap(), ComplexityMeasure::Counter(3));
        assert!("X".parse::<ComplexityMeasure>().is_err());
        assert!("C[x]".parse::<ComplexityMeasure>().is_err());
    }

    #[test]
    fn terminal_configurations() {
        let mut c = Configuration::uniform("p", 2, 0);
        assert!(!c.is_terminal());
        c.counters[1] = BigInt::from(-1);
        assert!(c.is_terminal());
    }
}
