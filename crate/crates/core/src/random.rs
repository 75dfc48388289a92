//! Random instance generators for property tests and oracle comparisons.

use rand::Rng;

use crate::model::{StateDef, StateKind, Transition, VassMdp};
use crate::Rational;

/// Shape of generated models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub states: usize,
    pub dimension: usize,
    /// Updates are drawn from `[-max_update, max_update]`.
    pub max_update: i64,
    /// Out-degree is drawn from `1..=max_out`.
    pub max_out: usize,
}

impl Shape {
    pub fn new(states: usize, dimension: usize, max_update: i64) -> Self {
        Shape { states, dimension, max_update, max_out: 3 }
    }
}

fn build<R: Rng + ?Sized>(rng: &mut R, shape: Shape, edges: Vec<Vec<usize>>) -> VassMdp {
    let kinds: Vec<StateKind> =
        (0..shape.states).map(|_| if rng.random_bool(0.5) { StateKind::Prob } else { StateKind::Nondet }).collect();
    let states = (0..shape.states).map(|i| StateDef::new(format!("s{i}"), kinds[i])).collect();
    let mut ts = Vec::new();
    for (i, succ) in edges.iter().enumerate() {
        let weights: Vec<i64> = succ.iter().map(|_| rng.random_range(1..=3)).collect();
        let total: i64 = weights.iter().sum();
        for (&j, &w) in succ.iter().zip(&weights) {
            let update = (0..shape.dimension).map(|_| rng.random_range(-shape.max_update..=shape.max_update)).collect();
            let prob = (kinds[i] == StateKind::Prob).then(|| Rational::new(w.into(), total.into()));
            ts.push(Transition::new(format!("t{:02}", ts.len()), format!("s{i}"), update, format!("s{j}"), prob));
        }
    }
    VassMdp::new(shape.dimension, states, ts).expect("generated models are valid")
}

/// A strongly connected model: a Hamiltonian cycle plus random chords.
pub fn strongly_connected<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> VassMdp {
    let n = shape.states;
    let edges = (0..n)
        .map(|i| {
            let mut succ = vec![(i + 1) % n];
            for _ in 1..rng.random_range(1..=shape.max_out) {
                succ.push(rng.random_range(0..n));
            }
            succ
        })
        .collect();
    build(rng, shape, edges)
}

/// A model with arbitrary edges; every state has at least one successor.
pub fn arbitrary<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> VassMdp {
    let n = shape.states;
    let edges =
        (0..n).map(|_| (0..rng.random_range(1..=shape.max_out)).map(|_| rng.random_range(0..n)).collect()).collect();
    build(rng, shape, edges)
}

/// A model whose edges only go from `s_i` to `s_j` with `j ≥ i`, so its MEC graph is acyclic.
pub fn dag_like<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> VassMdp {
    let n = shape.states;
    let edges =
        (0..n).map(|i| (0..rng.random_range(1..=shape.max_out)).map(|_| rng.random_range(i..n)).collect()).collect();
    build(rng, shape, edges)
}
