//! Analysis reports: per measure and per type estimates with their witnesses.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::dichotomy::{measure_as_counter, pipeline, CounterClass, PipelineStep};
use crate::graph::{
    decompose, enumerate_types_with, is_dag_like_with, rational_string, reach_values, successors, type_indices,
    Decomposition, Mec, TypeSeq,
};
use crate::model::{format_rational, to_json, ComplexityMeasure, VassMdp};
use crate::onedim::{classify_onedim, BsccWitness, Inventory, DEFAULT_STRATEGY_BOUND};
use crate::{Error, Rational};

/// Asymptotic estimate attached to one measure and one type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EstimateLabel {
    /// The transition is almost surely never used on this type.
    TightZero,
    /// Bounded by the type length `k` (up to a geometrically decaying tail).
    UpperTypeLength(usize),
    TightLinear,
    TightQuadratic,
    LowerQuadratic,
    Unbounded,
}

impl EstimateLabel {
    /// Position in the growth order; `LowerQuadratic` ranks with `TightQuadratic`.
    pub fn rank(&self) -> u8 {
        match self {
            EstimateLabel::TightZero => 0,
            EstimateLabel::UpperTypeLength(_) => 1,
            EstimateLabel::TightLinear => 2,
            EstimateLabel::TightQuadratic | EstimateLabel::LowerQuadratic => 3,
            EstimateLabel::Unbounded => 4,
        }
    }
}

impl fmt::Display for EstimateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateLabel::TightZero => f.write_str("TightZero"),
            EstimateLabel::UpperTypeLength(k) => write!(f, "UpperTypeLength({k})"),
            EstimateLabel::TightLinear => f.write_str("TightLinear"),
            EstimateLabel::TightQuadratic => f.write_str("TightQuadratic"),
            EstimateLabel::LowerQuadratic => f.write_str("LowerQuadratic"),
            EstimateLabel::Unbounded => f.write_str("Unbounded"),
        }
    }
}

impl FromStr for EstimateLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "TightZero" => EstimateLabel::TightZero,
            "TightLinear" => EstimateLabel::TightLinear,
            "TightQuadratic" => EstimateLabel::TightQuadratic,
            "LowerQuadratic" => EstimateLabel::LowerQuadratic,
            "Unbounded" => EstimateLabel::Unbounded,
            _ => {
                let k = s
                    .strip_prefix("UpperTypeLength(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| format!("unknown estimate label {s:?}"))?;
                EstimateLabel::UpperTypeLength(k)
            }
        })
    }
}

impl Serialize for EstimateLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EstimateLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Which decision procedure produced the estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    OneDimensional,
    DagDichotomy,
}

/// Evidence behind one estimate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimateWitness {
    Bscc(BsccWitness),
    /// Per-MEC maximal solutions along the type; `counter` is the step counter for `L` and `T[t]`.
    Pipeline {
        counter: usize,
        steps: Vec<PipelineStep>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EstimateEntry {
    pub measure: ComplexityMeasure,
    #[serde(rename = "type")]
    pub type_mecs: Vec<String>,
    #[serde(with = "rational_string")]
    pub weight: Rational,
    pub label: EstimateLabel,
    /// Machine-readable justification, e.g. `onedim:unbounded-zero-bscc`.
    pub tag: String,
    /// Set when growth may exceed `n²`, beyond the symbolic vocabulary.
    pub beyond_quadratic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<EstimateWitness>,
}

/// Exact maximal reachability values behind one connection weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReachCertificate {
    pub from: String,
    pub to: String,
    #[serde(with = "rational_string")]
    pub weight: Rational,
    #[serde(serialize_with = "rational_map")]
    pub values: BTreeMap<String, Rational>,
}

fn rational_map<S: Serializer>(m: &BTreeMap<String, Rational>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k, format_rational(v))))
}

/// Worst label per measure over the types that can start from one state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InitialStateSummary {
    pub state: String,
    pub first_mecs: BTreeSet<String>,
    pub labels: BTreeMap<String, EstimateLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    /// `sha256:` of the canonical JSON form of the model.
    pub model_digest: String,
    pub exact_arithmetic: String,
    pub dimension: usize,
    pub engine: Engine,
    pub dag_like: bool,
    pub mecs: Vec<Mec>,
    pub types: Vec<TypeSeq>,
    pub reachability: Vec<ReachCertificate>,
    pub measures: Vec<ComplexityMeasure>,
    pub estimates: Vec<EstimateEntry>,
    pub per_initial_state: Vec<InitialStateSummary>,
    pub max_over_initial_states: BTreeMap<String, EstimateLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inventory: Option<Inventory>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// `None` analyses `L`, every `C[c]` and every `T[t]`.
    pub measures: Option<Vec<ComplexityMeasure>>,
    /// `None` uses the number of MECs, which is complete for DAG-like models.
    pub max_type_len: Option<usize>,
    pub strategy_bound: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { measures: None, max_type_len: None, strategy_bound: DEFAULT_STRATEGY_BOUND }
    }
}

pub const EXACT_ARITHMETIC: &str =
    "all decisions use arbitrary-precision rational arithmetic; no floating point or tolerance is involved";

pub fn model_digest(m: &VassMdp) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(to_json(m).as_bytes())))
}

/// Runs the one-dimensional classification (`d = 1`) or the DAG dichotomy (`d ≥ 2`).
pub fn analyze(m: &VassMdp, opts: &AnalyzeOptions) -> Result<AnalysisReport, Error> {
    let dec = decompose(m);
    let dag_like = is_dag_like_with(m, &dec);
    let measures = opts.measures.clone().unwrap_or_else(|| ComplexityMeasure::all(m));
    for f in &measures {
        f.validate(m)?;
    }
    let max_len = opts.max_type_len.unwrap_or(dec.len()).max(1);
    let types = enumerate_types_with(m, &dec, max_len);
    let mut notes = Vec::new();
    if !dag_like {
        notes.push(format!("MEC decomposition is not DAG-like; types are truncated at length {max_len}"));
    } else if max_len < dec.len() {
        notes.push(format!("types are truncated at length {max_len}"));
    }
    let (engine, estimates, inventory) = if m.dimension() == 1 {
        let r = classify_onedim(m, &measures, max_len)?;
        let est = r
            .entries
            .into_iter()
            .map(|e| EstimateEntry {
                measure: e.measure,
                type_mecs: e.type_mecs,
                weight: e.weight,
                label: e.label,
                tag: e.tag,
                beyond_quadratic: false,
                note: e.note,
                witness: e.witness.map(EstimateWitness::Bscc),
            })
            .collect();
        (Engine::OneDimensional, est, Some(r.inventory))
    } else {
        if !dag_like {
            return Err(Error::Scope("MEC decomposition not DAG-like".into()));
        }
        (Engine::DagDichotomy, dag_estimates(m, &dec, &types, &measures)?, None)
    };
    let per_initial_state = initial_state_summaries(m, &dec, &estimates);
    let mut max_over_initial_states = BTreeMap::new();
    for e in &estimates {
        bump(&mut max_over_initial_states, e.measure.to_string(), &e.label);
    }
    Ok(AnalysisReport {
        tool: "vass-asym".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        model_digest: model_digest(m),
        exact_arithmetic: EXACT_ARITHMETIC.into(),
        dimension: m.dimension(),
        engine,
        dag_like,
        mecs: dec.mecs.clone(),
        reachability: certificates(m, &dec),
        types,
        measures,
        estimates,
        per_initial_state,
        max_over_initial_states,
        inventory,
        notes,
    })
}

fn dag_estimates(
    m: &VassMdp,
    dec: &Decomposition,
    types: &[TypeSeq],
    measures: &[ComplexityMeasure],
) -> Result<Vec<EstimateEntry>, Error> {
    let mut out = Vec::new();
    for f in measures {
        let (am, c) = measure_as_counter(m, f)?;
        for ty in types {
            let idx = type_indices(m, dec, &ty.mecs).expect("enumerated types are valid");
            let e = pipeline(&am, dec, &idx, c)?;
            let (label, tag) = match e.class {
                CounterClass::TightLinear => (EstimateLabel::TightLinear, "dichotomy:ranking-function"),
                CounterClass::LowerQuadratic => (EstimateLabel::LowerQuadratic, "dichotomy:multicycle-pumping"),
            };
            let note = e.beyond_quadratic.then(|| {
                "the counter can be pumped while already pumped counters stay level; growth may exceed n², compare with simulation".to_string()
            });
            out.push(EstimateEntry {
                measure: f.clone(),
                type_mecs: ty.mecs.clone(),
                weight: ty.weight.clone(),
                label,
                tag: tag.into(),
                beyond_quadratic: e.beyond_quadratic,
                note,
                witness: Some(EstimateWitness::Pipeline { counter: e.counter, steps: e.steps }),
            });
        }
    }
    Ok(out)
}

fn certificates(m: &VassMdp, dec: &Decomposition) -> Vec<ReachCertificate> {
    let mut out = Vec::new();
    for a in 0..dec.len() {
        for b in successors(m, dec, a) {
            let v = reach_values(m, dec, a, b);
            out.push(ReachCertificate {
                from: dec.mecs[a].id.clone(),
                to: dec.mecs[b].id.clone(),
                weight: v[dec.mec_states[a][0]].clone(),
                values: (0..m.num_states()).map(|s| (m.state(s).name.clone(), v[s].clone())).collect(),
            });
        }
    }
    out
}

fn bump(map: &mut BTreeMap<String, EstimateLabel>, key: String, label: &EstimateLabel) {
    let worse = |a: &EstimateLabel, b: &EstimateLabel| {
        (a.rank(), matches!(a, EstimateLabel::LowerQuadratic), upper_len(a))
            > (b.rank(), matches!(b, EstimateLabel::LowerQuadratic), upper_len(b))
    };
    match map.get(&key) {
        Some(cur) if !worse(label, cur) => {}
        _ => {
            map.insert(key, label.clone());
        }
    }
}

fn upper_len(l: &EstimateLabel) -> usize {
    match l {
        EstimateLabel::UpperTypeLength(k) => *k,
        _ => 0,
    }
}

/// MECs that a run from each state can enter first.
fn first_mecs(m: &VassMdp, dec: &Decomposition, s: usize) -> BTreeSet<usize> {
    if let Some(k) = dec.mec_of_state(s) {
        return [k].into();
    }
    let mut seen = vec![false; m.num_states()];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    let mut found = BTreeSet::new();
    while let Some(p) = queue.pop_front() {
        for &t in m.out(p) {
            let q = m.dst(t);
            if std::mem::replace(&mut seen[q], true) {
                continue;
            }
            match dec.mec_of_state(q) {
                Some(k) => {
                    found.insert(k);
                }
                None => queue.push_back(q),
            }
        }
    }
    found
}

fn initial_state_summaries(m: &VassMdp, dec: &Decomposition, est: &[EstimateEntry]) -> Vec<InitialStateSummary> {
    (0..m.num_states())
        .map(|s| {
            let firsts: BTreeSet<String> = first_mecs(m, dec, s).into_iter().map(|k| dec.mecs[k].id.clone()).collect();
            let mut labels = BTreeMap::new();
            for e in est.iter().filter(|e| firsts.contains(&e.type_mecs[0])) {
                bump(&mut labels, e.measure.to_string(), &e.label);
            }
            InitialStateSummary { state: m.state(s).name.clone(), first_mecs: firsts, labels }
        })
        .collect()
}
