//! Complete classification for one-dimensional VASS MDPs.
//!
//! Applying an MD strategy turns the model into a Markov chain whose bottom
//! SCCs are increasing, decreasing, bounded-zero or unbounded-zero according to
//! the expected counter change between visits of their least state. Which
//! classes are realizable in which MEC determines the growth of `L`, `C[c]`
//! and `T[t]` for every type. Existence of each class is decided in
//! polynomial time with the constraint systems, except bounded-zero BSCCs in
//! the presence of increasing ones, which is NP-complete and left to brute
//! force.

mod bscc;
mod classify;
mod detect;
mod energy;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::rational_string;
use crate::model::{MdStrategy, ModelError, VassMdp};
use crate::ratlp::LpError;
use crate::Rational;

pub use bscc::{analyze_bscc, bottom_sccs, classify_bscc, BsccAnalysis};
pub use classify::{classify_onedim, OneDimEntry, OneDimReport};
pub use detect::{
    brute_force_classify, detect_bounded_zero, detect_increasing, detect_unbounded_zero, inventory_brute_force,
    inventory_polynomial, ClassifiedBscc, IncreasingWitness, Inventory, ZeroWitness,
};
pub use energy::{energy_safe, hamiltonian_reduction, nonnegative_bscc_through, EnergyAnswer, UndirectedGraph};

/// Default cap on the number of MD strategies enumerated by brute force.
pub const DEFAULT_STRATEGY_BOUND: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BsccClass {
    Increasing,
    Decreasing,
    BoundedZero,
    UnboundedZero,
}

/// A bottom SCC of some `A_σ`, by state names and the chain's transition ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Bscc {
    pub states: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
}

/// An MD strategy together with one of its bottom SCCs and that SCC's analysis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BsccWitness {
    pub strategy: MdStrategy,
    pub bscc: Bscc,
    pub class: BsccClass,
    /// Mean one-step counter change under the stationary distribution.
    #[serde(with = "rational_string")]
    pub drift: Rational,
    #[serde(serialize_with = "rational_map")]
    pub stationary: BTreeMap<String, Rational>,
}

fn rational_map<S: serde::Serializer>(m: &BTreeMap<String, Rational>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &crate::model::format_rational(v))?;
    }
    map.end()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OneDimError {
    #[error("expected a one-dimensional model, got dimension {0}")]
    NotOneDimensional(usize),
    #[error("the given set is not a bottom SCC of the chain induced by the strategy")]
    NotABottomScc,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{count} MD strategies exceed the enumeration bound {bound}")]
    TooManyStrategies { count: String, bound: u64 },
    #[error("vertex `{0}` is not in the graph")]
    VertexNotInGraph(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub(crate) fn require_1d(m: &VassMdp) -> Result<(), OneDimError> {
    if m.dimension() == 1 {
        Ok(())
    } else {
        Err(OneDimError::NotOneDimensional(m.dimension()))
    }
}
