use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::bscc::{bsccs_idx, witness_idx};
use super::detect::{analyze_all, for_each_md};
use super::{require_1d, BsccWitness, OneDimError};
use crate::graph::decompose;
use crate::model::{StateDef, StateKind, Transition, VassMdp};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EnergyAnswer {
    /// Some MD strategy has a bottom SCC without negative cycles.
    Safe {
        witness: BsccWitness,
    },
    Unsafe,
    /// An increasing BSCC exists and brute force exceeds the bound.
    UnknownNPRegime {
        strategies: String,
        bound: u64,
    },
}

/// Does the subgraph formed by `trans` contain a cycle of negative total effect?
pub(crate) fn has_negative_cycle(m: &VassMdp, states: &[usize], trans: &[usize]) -> bool {
    let idx = |s: usize| states.binary_search(&s).expect("transition inside the component");
    let mut dist = vec![BigInt::from(0); states.len()];
    for round in 0..=states.len() {
        let mut relaxed = false;
        for &t in trans {
            let cand = &dist[idx(m.src(t))] + &m.update(t)[0];
            let d = idx(m.dst(t));
            if cand < dist[d] {
                dist[d] = cand;
                relaxed = true;
            }
        }
        if !relaxed {
            return false;
        }
        if round == states.len() {
            return true;
        }
    }
    unreachable!()
}

/// Is there a configuration from which some strategy never runs out of energy?
pub fn energy_safe(m: &VassMdp, bound: u64) -> Result<EnergyAnswer, OneDimError> {
    require_1d(m)?;
    let dec = decompose(m);
    let facts = analyze_all(m, &dec)?;
    if facts.iter().all(|f| f.increasing.is_none()) {
        // Without increasing BSCCs, non-decreasing means bounded-zero.
        return Ok(match facts.iter().find_map(|f| f.bounded_zero_witness(m, None)) {
            Some(witness) => EnergyAnswer::Safe { witness },
            None => EnergyAnswer::Unsafe,
        });
    }
    match first_nonnegative(m, bound, None) {
        Ok(Some(witness)) => Ok(EnergyAnswer::Safe { witness }),
        Ok(None) => Ok(EnergyAnswer::Unsafe),
        Err(OneDimError::TooManyStrategies { count, bound }) => {
            Ok(EnergyAnswer::UnknownNPRegime { strategies: count, bound })
        }
        Err(e) => Err(e),
    }
}

fn first_nonnegative(m: &VassMdp, bound: u64, through: Option<usize>) -> Result<Option<BsccWitness>, OneDimError> {
    let mut found = None;
    for_each_md(m, bound, |choice| {
        for (states, trans) in bsccs_idx(m, choice) {
            if through.is_some_and(|p| !states.contains(&p)) {
                continue;
            }
            if !has_negative_cycle(m, &states, &trans) {
                found = Some(witness_idx(m, choice, &states, &trans));
                return false;
            }
        }
        true
    })?;
    Ok(found)
}

/// Brute-force search for an MD strategy with a negative-cycle-free bottom SCC containing `state`.
pub fn nonnegative_bscc_through(m: &VassMdp, state: &str, bound: u64) -> Result<Option<BsccWitness>, OneDimError> {
    require_1d(m)?;
    let p = m.state_idx(state).ok_or_else(|| crate::model::ModelError::UnknownState(state.to_string()))?;
    first_nonnegative(m, bound, Some(p))
}

/// A simple undirected graph: `{"vertices": [...], "edges": [["a","b"], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UndirectedGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
}

impl UndirectedGraph {
    pub fn validate(&self) -> Result<(), OneDimError> {
        let vs: BTreeSet<&String> = self.vertices.iter().collect();
        if vs.len() != self.vertices.len() {
            return Err(OneDimError::InvalidGraph("duplicate vertex".into()));
        }
        let mut seen = BTreeSet::new();
        for (a, b) in &self.edges {
            if !vs.contains(a) || !vs.contains(b) {
                return Err(OneDimError::InvalidGraph(format!("edge {{{a}, {b}}} uses an unknown vertex")));
            }
            if a == b {
                return Err(OneDimError::InvalidGraph(format!("self-loop at {a}")));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                return Err(OneDimError::InvalidGraph(format!("parallel edge {{{a}, {b}}}")));
            }
        }
        Ok(())
    }
}

/// The energy gadget for Hamiltonicity of `g` through vertex `p`.
///
/// Every vertex becomes a nondeterministic state. An edge `{q, r}` away from `p`
/// yields `q → r` and `r → q` with effect +1; an edge `{p, q}` yields `q → p`
/// with +1 and `p → q` with `−|V| + 1`. Isolated vertices get a −1 self-loop so
/// every state has an outgoing transition. For `|V| ≥ 3`, `g` is Hamiltonian
/// iff some MD strategy has a negative-cycle-free bottom SCC containing `p`.
pub fn hamiltonian_reduction(g: &UndirectedGraph, p: &str) -> Result<VassMdp, OneDimError> {
    g.validate()?;
    if !g.vertices.iter().any(|v| v == p) {
        return Err(OneDimError::VertexNotInGraph(p.to_string()));
    }
    let n = g.vertices.len() as i64;
    let mut ts = Vec::new();
    let arc = |a: &str, b: &str, u: i64| Transition::new(format!("{a}>{b}"), a, vec![u], b, None);
    for (a, b) in &g.edges {
        if a == p {
            ts.push(arc(b, a, 1));
            ts.push(arc(a, b, 1 - n));
        } else if b == p {
            ts.push(arc(a, b, 1));
            ts.push(arc(b, a, 1 - n));
        } else {
            ts.push(arc(a, b, 1));
            ts.push(arc(b, a, 1));
        }
    }
    for v in &g.vertices {
        if !g.edges.iter().any(|(a, b)| a == v || b == v) {
            ts.push(arc(v, v, -1));
        }
    }
    let states = g.vertices.iter().map(|v| StateDef::new(v.clone(), StateKind::Nondet)).collect();
    Ok(VassMdp::new(1, states, ts)?)
}
