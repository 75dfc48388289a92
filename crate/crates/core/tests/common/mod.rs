//! Oracles shared by the integration test targets.

use vass_asym::graph::decompose;
use vass_asym::model::{ComplexityMeasure, VassMdp};
use vass_asym::onedim::Inventory;
use vass_asym::report::EstimateLabel;

/// Label of `f` on the type `beta`, recomputed from a brute-force inventory.
pub fn table_label(m: &VassMdp, inv: &Inventory, beta: &[usize], f: &ComplexityMeasure) -> EstimateLabel {
    let dec = decompose(m);
    let inc = |k: usize| inv.increasing[k];
    let bz = |k: usize| inv.bounded_zero[k] == Some(true);
    let uz = |k: usize| inv.unbounded_zero[k] == Some(true);
    match f {
        ComplexityMeasure::Counter(_) => {
            if beta.iter().any(|&k| inc(k)) {
                EstimateLabel::Unbounded
            } else {
                EstimateLabel::TightLinear
            }
        }
        ComplexityMeasure::Termination => {
            if beta.iter().any(|&k| inc(k) || bz(k)) {
                EstimateLabel::Unbounded
            } else if beta.iter().any(|&k| uz(k)) {
                EstimateLabel::TightQuadratic
            } else {
                EstimateLabel::TightLinear
            }
        }
        ComplexityMeasure::TransitionCount(id) => {
            let t = m.trans_idx(id).unwrap();
            let Some(k) = dec.mec_of_transition(t) else { return EstimateLabel::UpperTypeLength(beta.len()) };
            let Some(last) = beta.iter().rposition(|&j| j == k) else { return EstimateLabel::TightZero };
            if beta[..=last].iter().any(|&j| inc(j)) || inv.bounded_zero_transition[t] == Some(true) {
                EstimateLabel::Unbounded
            } else if inv.zero_drift_transition[t] == Some(true) {
                EstimateLabel::TightQuadratic
            } else {
                EstimateLabel::TightLinear
            }
        }
    }
}
