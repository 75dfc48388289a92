use serde::Serialize;

use super::detect::{analyze_all, inventory_from, Inventory, MecFacts};
use super::{require_1d, BsccWitness, OneDimError};
use crate::graph::{decompose, enumerate_types_with, rational_string, type_indices, Decomposition};
use crate::model::{ComplexityMeasure, VassMdp};
use crate::report::EstimateLabel;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OneDimEntry {
    pub measure: ComplexityMeasure,
    #[serde(rename = "type")]
    pub type_mecs: Vec<String>,
    #[serde(with = "rational_string")]
    pub weight: Rational,
    pub label: EstimateLabel,
    /// Machine-readable reason for the label.
    pub tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BsccWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OneDimReport {
    pub inventory: Inventory,
    pub entries: Vec<OneDimEntry>,
}

struct Ctx<'a> {
    m: &'a VassMdp,
    dec: &'a Decomposition,
    facts: &'a [MecFacts],
}

impl Ctx<'_> {
    fn inc(&self, k: usize) -> bool {
        self.facts[k].increasing.is_some()
    }
    fn bz(&self, k: usize) -> bool {
        !self.inc(k) && self.facts[k].bounded_zero()
    }
    fn uz(&self, k: usize) -> bool {
        !self.inc(k) && self.facts[k].unbounded_zero()
    }
    fn any_outside(&self, beta: &[usize], pred: impl Fn(usize) -> bool) -> Option<String> {
        (0..self.dec.len()).filter(|k| !beta.contains(k)).find(|&k| pred(k)).map(|k| self.dec.mecs[k].id.clone())
    }
}

fn tag(s: &str) -> String {
    format!("onedim:{s}")
}

fn entry(
    label: EstimateLabel,
    t: &str,
    witness: Option<BsccWitness>,
) -> (EstimateLabel, String, Option<BsccWitness>, Option<String>) {
    (label, tag(t), witness, None)
}

/// Label of one measure for one type.
fn label_for(
    c: &Ctx,
    beta: &[usize],
    f: &ComplexityMeasure,
) -> (EstimateLabel, String, Option<BsccWitness>, Option<String>) {
    let m = c.m;
    let first = |pred: &dyn Fn(usize) -> bool| beta.iter().copied().find(|&k| pred(k));
    let elsewhere = |what: &str, pred: &dyn Fn(usize) -> bool| {
        c.any_outside(beta, pred).map(|k| {
            format!("MEC {k} outside this type admits {what}; the label is derived from the MECs of this type")
        })
    };
    match f {
        ComplexityMeasure::Counter(_) => {
            if let Some(k) = first(&|k| c.inc(k)) {
                return entry(EstimateLabel::Unbounded, "increasing-bscc", c.facts[k].increasing_witness(m));
            }
            let mut e = entry(EstimateLabel::TightLinear, "no-increasing-bscc", None);
            e.3 = elsewhere("an increasing BSCC", &|k| c.inc(k));
            e
        }
        ComplexityMeasure::Termination => {
            if let Some(k) = first(&|k| c.inc(k)) {
                return entry(EstimateLabel::Unbounded, "increasing-bscc", c.facts[k].increasing_witness(m));
            }
            if let Some(k) = first(&|k| c.bz(k)) {
                return entry(EstimateLabel::Unbounded, "bounded-zero-bscc", c.facts[k].bounded_zero_witness(m, None));
            }
            if let Some(k) = first(&|k| c.uz(k)) {
                let mut e =
                    entry(EstimateLabel::TightQuadratic, "unbounded-zero-bscc", c.facts[k].unbounded_zero_witness(m));
                e.3 = elsewhere("an increasing or bounded-zero BSCC", &|k| c.inc(k) || c.bz(k));
                return e;
            }
            let mut e = entry(EstimateLabel::TightLinear, "decreasing-bsccs-only", None);
            e.3 = elsewhere("a non-decreasing BSCC", &|k| c.inc(k) || c.bz(k) || c.uz(k));
            e
        }
        ComplexityMeasure::TransitionCount(id) => {
            let t = m.trans_idx(id).expect("measure validated");
            let Some(k) = c.dec.mec_of_transition(t) else {
                let mut e = entry(EstimateLabel::UpperTypeLength(beta.len()), "transition-outside-mecs", None);
                e.3 = Some(
                    "the use count also has a geometrically decaying tail; the decay constant is not computed".into(),
                );
                return e;
            };
            let Some(last) = beta.iter().rposition(|&j| j == k) else {
                return entry(EstimateLabel::TightZero, "mec-not-in-type", None);
            };
            if let Some(j) = beta[..=last].iter().copied().find(|&j| c.inc(j)) {
                return entry(EstimateLabel::Unbounded, "increasing-bscc", c.facts[j].increasing_witness(m));
            }
            let facts = &c.facts[k];
            if facts.bz_transition(t) {
                return entry(
                    EstimateLabel::Unbounded,
                    "bounded-zero-bscc-with-transition",
                    facts.bounded_zero_witness(m, Some(t)),
                );
            }
            if facts.zero_drift_transition(t) {
                let mut e = entry(
                    EstimateLabel::TightQuadratic,
                    "unbounded-zero-bscc-with-transition",
                    facts.zero_drift_witness(m, t),
                );
                e.3 = elsewhere("an increasing or bounded-zero BSCC", &|k| c.inc(k) || c.bz(k));
                return e;
            }
            let mut e = entry(EstimateLabel::TightLinear, "decreasing-bsccs-with-transition", None);
            e.3 = elsewhere("an increasing BSCC", &|k| c.inc(k));
            e
        }
    }
}

/// Labels every requested measure for every type of length ≤ `max_type_len`.
pub fn classify_onedim(
    m: &VassMdp,
    measures: &[ComplexityMeasure],
    max_type_len: usize,
) -> Result<OneDimReport, OneDimError> {
    require_1d(m)?;
    for f in measures {
        f.validate(m)?;
    }
    let dec = decompose(m);
    let facts = analyze_all(m, &dec)?;
    let ctx = Ctx { m, dec: &dec, facts: &facts };
    let mut entries = Vec::new();
    for ty in enumerate_types_with(m, &dec, max_type_len) {
        let beta = type_indices(m, &dec, &ty.mecs).expect("enumerated types are valid");
        for f in measures {
            let (label, tag, witness, note) = label_for(&ctx, &beta, f);
            entries.push(OneDimEntry {
                measure: f.clone(),
                type_mecs: ty.mecs.clone(),
                weight: ty.weight.clone(),
                label,
                tag,
                note,
                witness,
            });
        }
    }
    Ok(OneDimReport { inventory: inventory_from(m, &dec, &facts), entries })
}
