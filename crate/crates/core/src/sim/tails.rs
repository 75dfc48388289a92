use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{fit_exponent, SimError, Simulator, Strategy};
use crate::model::{ComplexityMeasure, Configuration, VassMdp};

/// Conditioned samples below this count are flagged in the report.
pub const LOW_SAMPLE_THRESHOLD: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct TailConfig {
    pub init_state: String,
    pub n_list: Vec<u64>,
    pub runs: usize,
    /// Exponents θ of the tail events `F ≥ n^θ`.
    pub theta: Vec<f64>,
    /// Step budgets `h` for the fraction of runs with `L ≤ h`.
    pub horizons: Vec<u64>,
    pub seed: u64,
    pub measures: Vec<ComplexityMeasure>,
    /// Lower bound on the truncation cap.
    pub max_steps: Option<u64>,
    /// Keep only runs whose realized MEC sequence equals this type.
    pub condition_on: Option<Vec<String>>,
}

impl TailConfig {
    pub fn new(init_state: impl Into<String>, n_list: Vec<u64>, runs: usize, seed: u64) -> Self {
        TailConfig {
            init_state: init_state.into(),
            n_list,
            runs,
            theta: Vec::new(),
            horizons: Vec::new(),
            seed,
            measures: vec![ComplexityMeasure::Termination],
            max_steps: None,
            condition_on: None,
        }
    }

    /// Truncation cap for size `n`: at least `4·n^θ` for every θ and every horizon.
    pub fn cap(&self, n: u64) -> u64 {
        let from_theta = self.theta.iter().map(|&t| (4.0 * (n as f64).powf(t)).ceil() as u64).max().unwrap_or(0);
        let from_h = self.horizons.iter().copied().max().unwrap_or(0);
        self.max_steps.unwrap_or(0).max(from_theta).max(from_h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFrequency {
    pub theta: f64,
    pub threshold: f64,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSummary {
    /// Lower median; absent when it falls on a truncated run.
    pub median: Option<f64>,
    pub mean_terminated: Option<f64>,
    pub tails: Vec<TailFrequency>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeReport {
    pub n: u64,
    pub cap: u64,
    pub runs: usize,
    /// Runs kept after conditioning.
    pub samples: usize,
    pub truncated: usize,
    pub low_sample: bool,
    pub terminated_within: BTreeMap<u64, f64>,
    pub measures: BTreeMap<String, MeasureSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub seed: u64,
    pub init_state: String,
    pub theta: Vec<f64>,
    pub horizons: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_on: Option<Vec<String>>,
    pub sizes: Vec<SizeReport>,
    /// Least-squares slope of log median against log n, per measure.
    pub exponents: BTreeMap<String, Option<f64>>,
    pub notes: Vec<String>,
}

/// One trajectory, reduced to the configured measures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub n: u64,
    pub run: usize,
    pub truncated: bool,
    pub steps: u64,
    pub values: Vec<i64>,
    pub mecs: Vec<String>,
}

/// Monte Carlo tail estimates under a fixed strategy.
pub fn estimate_tails(m: &VassMdp, s: &Strategy, cfg: &TailConfig) -> Result<SimReport, SimError> {
    estimate_tails_family(m, &|_| Ok(s.clone()), cfg).map(|(r, _)| r)
}

/// Monte Carlo tail estimates where the strategy may depend on `n`.
pub fn estimate_tails_family(
    m: &VassMdp,
    family: &(dyn Fn(u64) -> Result<Strategy, SimError> + Sync),
    cfg: &TailConfig,
) -> Result<(SimReport, Vec<RunRecord>), SimError> {
    if cfg.runs == 0 || cfg.n_list.is_empty() {
        return Err(SimError::DegenerateInput("need at least one run and one size".into()));
    }
    if cfg.n_list.iter().any(|&n| n >= 1 << 32) || cfg.runs as u64 >= 1 << 32 {
        return Err(SimError::DegenerateInput("sizes and run counts must stay below 2^32".into()));
    }
    for f in &cfg.measures {
        f.validate(m)?;
    }
    let mut sizes = Vec::new();
    let mut records = Vec::new();
    let mut notes = Vec::new();
    for &n in &cfg.n_list {
        let cap = cfg.cap(n);
        if cap == 0 {
            return Err(SimError::DegenerateInput("no θ, horizon or step budget fixes the truncation cap".into()));
        }
        let sim = Simulator::new(m, &family(n)?)?;
        let init = Configuration { state: cfg.init_state.clone(), counters: vec![BigInt::from(n); m.dimension()] };
        let (p, v) = sim.initial(&init)?;
        let runs: Vec<RunRecord> = (0..cfg.runs)
            .into_par_iter()
            .map(|run| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream((n << 32) | run as u64);
                let st = sim.run(p, &v, cap, &mut rng)?;
                Ok(RunRecord {
                    n,
                    run,
                    truncated: st.truncated(),
                    steps: st.steps,
                    values: cfg.measures.iter().map(|f| st.value(f)).collect(),
                    mecs: st.mecs,
                })
            })
            .collect::<Result<_, SimError>>()?;
        let kept: Vec<&RunRecord> =
            runs.iter().filter(|r| cfg.condition_on.as_ref().is_none_or(|ty| *ty == r.mecs)).collect();
        let low = cfg.condition_on.is_some() && kept.len() < LOW_SAMPLE_THRESHOLD;
        if low {
            notes.push(format!("n={n}: only {} runs realize the conditioning type", kept.len()));
        }
        sizes.push(summarize(n, cap, cfg, &kept, runs.len(), low));
        records.extend(runs);
    }
    let exponents = cfg
        .measures
        .iter()
        .map(|f| {
            let key = f.to_string();
            let pts: Vec<(f64, f64)> = sizes
                .iter()
                .filter_map(|s| s.measures[&key].median.filter(|&v| v > 0.0).map(|v| (s.n as f64, v)))
                .collect();
            (key, fit_exponent(&pts).ok())
        })
        .collect();
    let report = SimReport {
        seed: cfg.seed,
        init_state: cfg.init_state.clone(),
        theta: cfg.theta.clone(),
        horizons: cfg.horizons.clone(),
        condition_on: cfg.condition_on.clone(),
        sizes,
        exponents,
        notes,
    };
    Ok((report, records))
}

fn summarize(n: u64, cap: u64, cfg: &TailConfig, kept: &[&RunRecord], runs: usize, low: bool) -> SizeReport {
    let k = kept.len();
    let frac = |c: usize| if k == 0 { 0.0 } else { c as f64 / k as f64 };
    let terminated_within =
        cfg.horizons.iter().map(|&h| (h, frac(kept.iter().filter(|r| !r.truncated && r.steps <= h).count()))).collect();
    let measures = cfg
        .measures
        .iter()
        .enumerate()
        .map(|(i, f)| {
            // Truncated runs sort above every terminated one.
            let mut vals: Vec<(bool, i64)> = kept.iter().map(|r| (r.truncated, r.values[i])).collect();
            vals.sort_unstable();
            let median = (k > 0).then(|| vals[(k - 1) / 2]).filter(|v| !v.0).map(|v| v.1 as f64);
            let done: Vec<i64> = vals.iter().filter(|v| !v.0).map(|v| v.1).collect();
            let mean_terminated =
                (!done.is_empty()).then(|| done.iter().map(|&v| v as f64).sum::<f64>() / done.len() as f64);
            let tails = cfg
                .theta
                .iter()
                .map(|&theta| {
                    let threshold = (n as f64).powf(theta);
                    let hits = vals.iter().filter(|v| v.0 || v.1 as f64 >= threshold).count();
                    TailFrequency { theta, threshold, frequency: frac(hits) }
                })
                .collect();
            (f.to_string(), MeasureSummary { median, mean_terminated, tails })
        })
        .collect();
    SizeReport {
        n,
        cap,
        runs,
        samples: k,
        truncated: kept.iter().filter(|r| r.truncated).count(),
        low_sample: low,
        terminated_within,
        measures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MdStrategy, StateDef, StateKind, Transition};

    #[test]
    fn countdown_tails() {
        let m = VassMdp::new(
            1,
            vec![StateDef::new("p", StateKind::Nondet)],
            vec![Transition::new("t", "p", vec![-1], "p", None)],
        )
        .unwrap();
        let mut cfg = TailConfig::new("p", vec![4, 8, 16, 32], 5, 3);
        cfg.theta = vec![1.5];
        let r = estimate_tails(&m, &Strategy::Md(MdStrategy::least_ids(&m)), &cfg).unwrap();
        for s in &r.sizes {
            assert_eq!(s.measures["L"].tails[0].frequency, 0.0);
            assert_eq!(s.measures["L"].median, Some((s.n + 1) as f64));
        }
        let slope = r.exponents["L"].unwrap();
        assert!((0.8..1.0).contains(&slope));
    }

    #[test]
    fn cap_covers_theta_and_horizons() {
        let mut cfg = TailConfig::new("p", vec![10], 1, 0);
        cfg.theta = vec![2.0];
        assert_eq!(cfg.cap(10), 400);
        cfg.horizons = vec![1000];
        assert_eq!(cfg.cap(10), 1000);
    }
}
