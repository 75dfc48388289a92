//! Asymptotic complexity analysis for VASS Markov decision processes.
//!
//! The crate decides, with exact rational arithmetic, whether the termination
//! time, counter maxima and transition counts of a VASS MDP grow linearly,
//! quadratically or without bound in the size of the initial configuration,
//! and ships a Monte Carlo simulator that checks those answers empirically.
//!
//! Decision code never touches floating point. The LP engine is generic over
//! [`scalar::Scalar`], which is implemented for every `Ratio<T>` over an exact
//! integer type; [`Rational`] is the instantiation used throughout.

pub mod dichotomy;
pub mod graph;
pub mod model;
pub mod onedim;
pub mod random;
pub mod ratlp;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod verify;

mod error;

pub use error::Error;

/// Arbitrary-precision rational used by every decision path.
pub type Rational = num_rational::BigRational;
/// Machine-word rational, handy for small hand-written LPs and tests.
pub type Rational64 = num_rational::Rational64;
/// Arbitrary-precision integer used for counter updates.
pub type Int = num_bigint::BigInt;
/// LP problem over [`Rational`].
pub type Problem = ratlp::LpProblem<Rational>;
/// LP solution over [`Rational`].
pub type Solution = ratlp::LpSolution<Rational>;
