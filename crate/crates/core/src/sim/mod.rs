//! Seeded Monte Carlo execution of VASS MDPs.
//!
//! Every trajectory draws from its own ChaCha8 stream: the generator is
//! `ChaCha8Rng::seed_from_u64(seed)` with `set_stream((n << 32) | run)` for run
//! `run` at initial size `n` (stream 0 for [`simulate_one`]). Probabilities are
//! sampled by comparing one `next_u64()` draw against cumulative thresholds
//! `floor(cum · 2^64)`, so each step carries a bias below `2^-64`. Results depend
//! only on the seed and the inputs, never on thread scheduling.

mod engine;
mod strategy;
mod tails;

use num_traits::Float;
use thiserror::Error;

use crate::model::ModelError;

pub use engine::{simulate_one, Simulator, TermSteps, TrajectoryStats};
pub use strategy::{multicycle_strategy_from_x, witness_strategy, Strategy};
pub use tails::{
    estimate_tails, estimate_tails_family, MeasureSummary, RunRecord, SimReport, SizeReport, TailConfig,
    LOW_SAMPLE_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("the witness is zero on every transition")]
    ZeroWitness,
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid initial configuration: {0}")]
    InvalidInitial(String),
    #[error("counter overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] crate::ratlp::LpError),
}

/// Least-squares slope of `ln(stat)` against `ln(n)`.
pub fn fit_exponent<F: Float>(points: &[(F, F)]) -> Result<F, SimError> {
    if points.len() < 3 {
        return Err(SimError::DegenerateInput(format!("need at least 3 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(SimError::DegenerateInput("sizes must be strictly increasing".into()));
    }
    if points.iter().any(|&(n, s)| !(n > F::zero()) || !(s > F::zero())) {
        return Err(SimError::DegenerateInput("sizes and statistics must be positive".into()));
    }
    let k = F::from(points.len()).expect("length fits a float");
    let xs: Vec<F> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<F> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().fold(F::zero(), |a, &b| a + b) / k;
    let my = ys.iter().fold(F::zero(), |a, &b| a + b) / k;
    let (mut sxy, mut sxx) = (F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let sq: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&n| (n, n * n)).collect();
        assert!((fit_exponent(&sq).unwrap() - 2.0).abs() < 1e-12);
        let lin: Vec<(f32, f32)> = [1.0f32, 3.0, 9.0].iter().map(|&n| (n, 3.0 * n)).collect();
        assert!((fit_exponent(&lin).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (1.0, 2.0), (3.0, 3.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)]).is_err());
    }
}
