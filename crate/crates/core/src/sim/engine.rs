use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::{SimError, Strategy};
use crate::graph::decompose;
use crate::model::{ComplexityMeasure, Configuration, VassMdp};

/// Termination time, or `Truncated` when the step budget ran out first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TermSteps {
    Terminated(u64),
    Truncated,
}

impl Serialize for TermSteps {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TermSteps::Terminated(k) => s.serialize_u64(*k),
            TermSteps::Truncated => s.serialize_str("Truncated"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrajectoryStats {
    pub term_steps: TermSteps,
    /// Transitions executed (equals `term_steps` for terminated runs).
    pub steps: u64,
    /// Maximum of each counter over the configurations before termination.
    pub max_counter: Vec<i64>,
    pub transition_counts: BTreeMap<String, u64>,
    /// MECs visited, in order, with consecutive repeats collapsed.
    pub mecs: Vec<String>,
}

impl TrajectoryStats {
    pub fn truncated(&self) -> bool {
        self.term_steps == TermSteps::Truncated
    }

    /// Observed value of `f` (a lower bound when truncated).
    pub fn value(&self, f: &ComplexityMeasure) -> i64 {
        match f {
            ComplexityMeasure::Termination => self.steps as i64,
            ComplexityMeasure::Counter(c) => self.max_counter[c - 1],
            ComplexityMeasure::TransitionCount(t) => self.transition_counts.get(t).copied().unwrap_or(0) as i64,
        }
    }
}

/// A model and strategy compiled for fast sampling.
#[derive(Clone, Debug)]
pub struct Simulator {
    dim: usize,
    ids: Vec<String>,
    /// Per state: `(threshold, transition)`; the last entry takes the remaining mass.
    choices: Vec<Vec<(u64, usize)>>,
    updates: Vec<i64>,
    dst: Vec<usize>,
    state_mec: Vec<Option<usize>>,
    mec_ids: Vec<String>,
    names: Vec<String>,
}

fn threshold(num: &BigInt, den: &BigInt) -> u64 {
    let scaled: BigInt = (num << 64u32) / den;
    scaled.to_u64().unwrap_or(u64::MAX)
}

impl Simulator {
    pub fn new(m: &VassMdp, s: &Strategy) -> Result<Self, SimError> {
        let dists = s.distributions(m)?;
        let choices = dists
            .iter()
            .map(|dist| {
                let mut cum = crate::Rational::zero();
                dist.iter()
                    .map(|(t, w)| {
                        cum += w;
                        (threshold(cum.numer(), cum.denom()), *t)
                    })
                    .collect()
            })
            .collect();
        let mut updates = Vec::with_capacity(m.num_transitions() * m.dimension());
        for t in 0..m.num_transitions() {
            for u in m.update(t) {
                updates.push(u.to_i64().ok_or_else(|| {
                    SimError::Overflow(format!("update of {} does not fit 64 bits", m.transition(t).id))
                })?);
            }
        }
        let dec = decompose(m);
        Ok(Simulator {
            dim: m.dimension(),
            ids: m.transitions().iter().map(|t| t.id.clone()).collect(),
            choices,
            updates,
            dst: (0..m.num_transitions()).map(|t| m.dst(t)).collect(),
            state_mec: (0..m.num_states()).map(|i| dec.mec_of_state(i)).collect(),
            mec_ids: dec.mecs.iter().map(|k| k.id.clone()).collect(),
            names: m.states().iter().map(|p| p.name.clone()).collect(),
        })
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Validates `init` and converts it to machine integers.
    pub fn initial(&self, init: &Configuration) -> Result<(usize, Vec<i64>), SimError> {
        let p = self
            .state_index(&init.state)
            .ok_or_else(|| SimError::InvalidInitial(format!("unknown state {}", init.state)))?;
        if init.counters.len() != self.dim {
            return Err(SimError::InvalidInitial(format!("expected {} counters", self.dim)));
        }
        if init.is_terminal() {
            return Err(SimError::InvalidInitial("the configuration is terminal".into()));
        }
        let v = init
            .counters
            .iter()
            .map(|c| c.to_i64().ok_or_else(|| SimError::Overflow(format!("initial counter {c}"))))
            .collect::<Result<_, _>>()?;
        Ok((p, v))
    }

    fn pick(&self, p: usize, rng: &mut ChaCha8Rng) -> usize {
        let opts = &self.choices[p];
        if opts.len() == 1 {
            return opts[0].1;
        }
        let r = rng.next_u64();
        let last = opts.len() - 1;
        opts[..last].iter().find(|&&(thr, _)| r < thr).map_or(opts[last].1, |&(_, t)| t)
    }

    /// Runs one trajectory from `p·v` for at most `max_steps` transitions.
    pub fn run(
        &self,
        mut p: usize,
        v: &[i64],
        max_steps: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<TrajectoryStats, SimError> {
        let d = self.dim;
        let mut v = v.to_vec();
        let mut max = v.clone();
        let mut counts = vec![0u64; self.ids.len()];
        let mut mecs: Vec<usize> = self.state_mec[p].into_iter().collect();
        let mut steps = 0u64;
        let term = loop {
            if steps == max_steps {
                break TermSteps::Truncated;
            }
            let t = self.pick(p, rng);
            steps += 1;
            counts[t] += 1;
            let mut terminal = false;
            for (c, u) in v.iter_mut().zip(&self.updates[t * d..(t + 1) * d]) {
                *c = c.checked_add(*u).ok_or_else(|| SimError::Overflow(format!("counter after {steps} steps")))?;
                terminal |= *c < 0;
            }
            p = self.dst[t];
            if terminal {
                break TermSteps::Terminated(steps);
            }
            for (mx, c) in max.iter_mut().zip(&v) {
                *mx = (*mx).max(*c);
            }
            if let Some(k) = self.state_mec[p] {
                if mecs.last() != Some(&k) {
                    mecs.push(k);
                }
            }
        };
        Ok(TrajectoryStats {
            term_steps: term,
            steps,
            max_counter: max,
            transition_counts: self.ids.iter().cloned().zip(counts).collect(),
            mecs: mecs.into_iter().map(|k| self.mec_ids[k].clone()).collect(),
        })
    }
}

/// Runs one trajectory on stream 0 of `seed`.
pub fn simulate_one(
    m: &VassMdp,
    s: &Strategy,
    init: &Configuration,
    max_steps: u64,
    seed: u64,
) -> Result<TrajectoryStats, SimError> {
    if max_steps == 0 {
        return Err(SimError::DegenerateInput("max_steps must be positive".into()));
    }
    let sim = Simulator::new(m, s)?;
    let (p, v) = sim.initial(init)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sim.run(p, &v, max_steps, &mut rng)
}
