//! End components, MEC decomposition, types and their weights.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::model::VassMdp;
use crate::ratlp::linalg;
use crate::Rational;

/// A maximal end component, by state names and transition ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mec {
    pub id: String,
    pub states: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
}

/// A finite sequence of MEC ids with its weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeSeq {
    pub mecs: Vec<String>,
    #[serde(with = "rational_string")]
    pub weight: Rational,
}

pub(crate) mod rational_string {
    use crate::model::{format_rational, parse_rational};
    use crate::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Strongly connected components of a graph on `0..n`, each sorted, listed by least member.
pub fn sccs(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
    for _ in 0..n {
        g.add_node(());
    }
    for (a, b) in edges {
        g.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    comps
}

/// MEC decomposition with index lookups.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub mecs: Vec<Mec>,
    /// State indices of each MEC.
    pub mec_states: Vec<Vec<usize>>,
    /// Transition indices of each MEC.
    pub mec_transitions: Vec<Vec<usize>>,
    state_mec: Vec<Option<usize>>,
    trans_mec: Vec<Option<usize>>,
}

impl Decomposition {
    pub fn mec_of_state(&self, s: usize) -> Option<usize> {
        self.state_mec[s]
    }
    /// The MEC containing transition `t` (as one of its own transitions).
    pub fn mec_of_transition(&self, t: usize) -> Option<usize> {
        self.trans_mec[t]
    }
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.mecs.iter().position(|m| m.id == id)
    }
    pub fn len(&self) -> usize {
        self.mecs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.mecs.is_empty()
    }
    /// MEC `k` as a stand-alone strongly connected VASS MDP.
    pub fn sub_model(&self, m: &VassMdp, k: usize) -> VassMdp {
        let s = self.mec_states[k].iter().copied().collect();
        let t = self.mec_transitions[k].iter().copied().collect();
        m.restrict(&s, &t).expect("a MEC is a closed sub-model")
    }
}

/// End components restricted to `alive` states/transitions, by iterated SCC refinement.
///
/// Returns `(states, transitions)` per MEC, ordered by least state index.
pub(crate) fn refine(m: &VassMdp, mut alive_s: Vec<bool>, mut alive_t: Vec<bool>) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = m.num_states();
    loop {
        for t in 0..m.num_transitions() {
            if alive_t[t] && (!alive_s[m.src(t)] || !alive_s[m.dst(t)]) {
                alive_t[t] = false;
            }
        }
        let comps = sccs(n, (0..m.num_transitions()).filter(|&t| alive_t[t]).map(|t| (m.src(t), m.dst(t))));
        let mut comp = vec![0; n];
        for (k, c) in comps.iter().enumerate() {
            for &s in c {
                comp[s] = k;
            }
        }
        let mut changed = false;
        for t in 0..m.num_transitions() {
            if alive_t[t] && comp[m.src(t)] != comp[m.dst(t)] {
                alive_t[t] = false;
                changed = true;
            }
        }
        for s in 0..n {
            if !alive_s[s] {
                continue;
            }
            let dead = if m.is_prob(s) {
                m.out(s).iter().any(|&t| !alive_t[t])
            } else {
                m.out(s).iter().all(|&t| !alive_t[t])
            };
            if dead {
                alive_s[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut out = Vec::new();
            for c in comps {
                if !alive_s[c[0]] {
                    continue;
                }
                let ts: Vec<usize> = c.iter().flat_map(|&s| m.out(s).iter().copied()).filter(|&t| alive_t[t]).collect();
                out.push((c, ts));
            }
            return out;
        }
    }
}

/// Full MEC decomposition; MECs are named `M1, M2, …` by least state name.
pub fn decompose(m: &VassMdp) -> Decomposition {
    let parts = refine(m, vec![true; m.num_states()], vec![true; m.num_transitions()]);
    let mut state_mec = vec![None; m.num_states()];
    let mut trans_mec = vec![None; m.num_transitions()];
    let mut mecs = Vec::new();
    let mut mec_states = Vec::new();
    let mut mec_transitions = Vec::new();
    for (k, (ss, ts)) in parts.into_iter().enumerate() {
        for &s in &ss {
            state_mec[s] = Some(k);
        }
        for &t in &ts {
            trans_mec[t] = Some(k);
        }
        mecs.push(Mec {
            id: format!("M{}", k + 1),
            states: ss.iter().map(|&s| m.state(s).name.clone()).collect(),
            transitions: ts.iter().map(|&t| m.transition(t).id.clone()).collect(),
        });
        let mut ts = ts;
        ts.sort_unstable();
        mec_states.push(ss);
        mec_transitions.push(ts);
    }
    Decomposition { mecs, mec_states, mec_transitions, state_mec, trans_mec }
}

pub fn mec_decomposition(m: &VassMdp) -> Vec<Mec> {
    decompose(m).mecs
}

fn reachable_from(m: &VassMdp, starts: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; m.num_states()];
    let mut queue: VecDeque<usize> = starts.iter().copied().collect();
    for &s in starts {
        seen[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &t in m.out(s) {
            let q = m.dst(t);
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    seen
}

/// Which MECs each MEC can reach (including itself).
fn mec_reachability(m: &VassMdp, dec: &Decomposition) -> Vec<Vec<bool>> {
    (0..dec.len())
        .map(|k| {
            let seen = reachable_from(m, &dec.mec_states[k]);
            (0..dec.len()).map(|j| seen[dec.mec_states[j][0]]).collect()
        })
        .collect()
}

/// True iff no two distinct MECs are mutually reachable.
pub fn is_dag_like(m: &VassMdp) -> bool {
    is_dag_like_with(m, &decompose(m))
}

pub fn is_dag_like_with(m: &VassMdp, dec: &Decomposition) -> bool {
    let r = mec_reachability(m, dec);
    (0..dec.len()).all(|a| (a + 1..dec.len()).all(|b| !(r[a][b] && r[b][a])))
}

/// MECs reachable from MEC `k` along paths whose intermediate states lie in no MEC.
pub fn successors(m: &VassMdp, dec: &Decomposition, k: usize) -> BTreeSet<usize> {
    let mut seen = vec![false; m.num_states()];
    let mut queue = VecDeque::new();
    for &s in &dec.mec_states[k] {
        seen[s] = true;
        queue.push_back(s);
    }
    let mut found = BTreeSet::new();
    while let Some(s) = queue.pop_front() {
        for &t in m.out(s) {
            let q = m.dst(t);
            if seen[q] {
                continue;
            }
            seen[q] = true;
            match dec.mec_of_state(q) {
                Some(j) if j != k => {
                    found.insert(j);
                }
                Some(_) => {}
                None => queue.push_back(q),
            }
        }
    }
    found
}

/// Exact maximal probability, per state, of reaching MEC `to` while states of
/// MECs other than `from` and `to` are losing sinks.
///
/// Strategy iteration: evaluate the current policy by an exact linear solve,
/// switch a state only on strict improvement (least id among the best).
pub fn reach_values(m: &VassMdp, dec: &Decomposition, from: usize, to: usize) -> Vec<Rational> {
    let n = m.num_states();
    let target: Vec<bool> = (0..n).map(|s| dec.mec_of_state(s) == Some(to)).collect();
    let losing: Vec<bool> = (0..n).map(|s| matches!(dec.mec_of_state(s), Some(j) if j != to && j != from)).collect();

    // States with positive optimal value: backward search avoiding losing states.
    let mut pos = target.clone();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !pos[s] && !losing[s] && m.out(s).iter().any(|&t| pos[m.dst(t)]) {
                pos[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut policy: Vec<Option<usize>> = (0..n)
        .map(|s| {
            if m.is_prob(s) || target[s] || !pos[s] {
                None
            } else {
                m.out(s).iter().copied().find(|&t| pos[m.dst(t)])
            }
        })
        .collect();

    loop {
        let v = evaluate(m, &target, &pos, &policy);
        let mut improved = false;
        for s in 0..n {
            let Some(cur) = policy[s] else { continue };
            let cur_v = &v[m.dst(cur)];
            let best = m.out(s).iter().map(|&t| &v[m.dst(t)]).max().unwrap();
            if best > cur_v {
                policy[s] = m.out(s).iter().copied().find(|&t| &v[m.dst(t)] == best);
                improved = true;
            }
        }
        if !improved {
            return v;
        }
    }
}

fn evaluate(m: &VassMdp, target: &[bool], pos: &[bool], policy: &[Option<usize>]) -> Vec<Rational> {
    let n = m.num_states();
    let succ = |s: usize| -> Vec<(usize, Rational)> {
        if m.is_prob(s) {
            m.out(s).iter().map(|&t| (m.dst(t), m.prob(t).unwrap().clone())).collect()
        } else {
            policy[s].map(|t| vec![(m.dst(t), Rational::one())]).unwrap_or_default()
        }
    };
    // Under the policy, restrict to states that can still reach the target.
    let mut live = target.to_vec();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !live[s] && pos[s] && succ(s).iter().any(|(q, _)| live[*q]) {
                live[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let unknowns: Vec<usize> = (0..n).filter(|&s| live[s] && !target[s]).collect();
    let col: BTreeMap<usize, usize> = unknowns.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = unknowns.len();
    let mut a = vec![vec![Rational::zero(); k]; k];
    let mut b = vec![Rational::zero(); k];
    for (i, &s) in unknowns.iter().enumerate() {
        a[i][i] = Rational::one();
        for (q, p) in succ(s) {
            if target[q] {
                b[i] += p;
            } else if let Some(&j) = col.get(&q) {
                a[i][j] -= p;
            }
        }
    }
    let x = linalg::solve(a, b).expect("absorption system of a transient chain is nonsingular");
    let mut v = vec![Rational::zero(); n];
    for s in 0..n {
        if target[s] {
            v[s] = Rational::one();
        }
    }
    for (i, &s) in unknowns.iter().enumerate() {
        v[s] = x[i].clone();
    }
    v
}

/// `P(from, to)`, evaluated at the least state of `from`.
pub fn max_reach_probability(m: &VassMdp, from: &Mec, to: &Mec) -> Rational {
    let dec = decompose(m);
    let (Some(a), Some(b)) = (dec.index_of(&from.id), dec.index_of(&to.id)) else {
        return Rational::zero();
    };
    if a == b {
        return Rational::one();
    }
    reach_values(m, &dec, a, b)[dec.mec_states[a][0]].clone()
}

/// All MEC sequences of length ≤ `max_len` that follow the connection relation, with weights.
pub fn enumerate_types(m: &VassMdp, max_len: usize) -> Vec<TypeSeq> {
    enumerate_types_with(m, &decompose(m), max_len)
}

pub fn enumerate_types_with(m: &VassMdp, dec: &Decomposition, max_len: usize) -> Vec<TypeSeq> {
    let succ: Vec<BTreeSet<usize>> = (0..dec.len()).map(|k| successors(m, dec, k)).collect();
    let mut weight: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    for (a, ss) in succ.iter().enumerate() {
        for &b in ss {
            weight.insert((a, b), reach_values(m, dec, a, b)[dec.mec_states[a][0]].clone());
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, Rational)> = (0..dec.len()).rev().map(|k| (vec![k], Rational::one())).collect();
    while let Some((seq, w)) = stack.pop() {
        out.push(TypeSeq { mecs: seq.iter().map(|&k| dec.mecs[k].id.clone()).collect(), weight: w.clone() });
        if seq.len() >= max_len {
            continue;
        }
        let last = *seq.last().unwrap();
        for &b in succ[last].iter().rev() {
            let mut s = seq.clone();
            s.push(b);
            stack.push((s, w.clone() * weight[&(last, b)].clone()));
        }
    }
    out.sort_by(|x, y| x.mecs.len().cmp(&y.mecs.len()).then_with(|| mec_key(&x.mecs).cmp(&mec_key(&y.mecs))));
    out
}

fn mec_key(ids: &[String]) -> Vec<usize> {
    ids.iter().map(|s| s[1..].parse::<usize>().unwrap_or(usize::MAX)).collect()
}

/// Checks that `mecs` is a sequence of known, consecutively distinct and connected MECs.
pub fn type_indices(m: &VassMdp, dec: &Decomposition, mecs: &[String]) -> Option<Vec<usize>> {
    if mecs.is_empty() {
        return None;
    }
    let idx: Vec<usize> = mecs.iter().map(|id| dec.index_of(id)).collect::<Option<_>>()?;
    for w in idx.windows(2) {
        if w[0] == w[1] || !successors(m, dec, w[0]).contains(&w[1]) {
            return None;
        }
    }
    Some(idx)
}
