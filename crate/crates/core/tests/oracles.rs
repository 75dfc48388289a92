//! Decision procedures against brute-force oracles on seeded random instances.

mod common;

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vass_asym::graph::{decompose, enumerate_types, is_dag_like, mec_decomposition, successors};
use vass_asym::model::{ComplexityMeasure, VassMdp};
use vass_asym::onedim::{
    classify_onedim, detect_bounded_zero, detect_increasing, detect_unbounded_zero, inventory_brute_force,
    inventory_polynomial, DEFAULT_STRATEGY_BOUND,
};
use vass_asym::random::{arbitrary, dag_like, Shape};
use vass_asym::ratlp::{solve_feasibility, LinearConstraint, LpProblem, Relation};
use vass_asym::Rational;

fn r(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// Gaussian elimination with full rank required.
fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = &a[i][col] / &a[col][col];
                for j in col..n {
                    let d = &f * &a[col][j];
                    a[i][j] -= d;
                }
                let d = &f * &b[col];
                b[i] -= d;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

#[test]
fn feasibility_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    const VARS: usize = 5;
    for _ in 0..150 {
        let mut p = LpProblem::<Rational>::new();
        for i in 0..VARS {
            p.add_variable(format!("x{i}"));
        }
        // Rows as (coefficients, relation, rhs); nonnegativity is explicit.
        let mut rows: Vec<(Vec<Rational>, Relation, Rational)> =
            (0..VARS).map(|i| ((0..VARS).map(|j| r((i == j) as i64)).collect(), Relation::Geq, r(0))).collect();
        for _ in 0..rng.random_range(1..=4) {
            let coeffs: Vec<Rational> = (0..VARS).map(|_| r(rng.random_range(-3..=3))).collect();
            let rel = [Relation::Geq, Relation::Leq, Relation::Eq][rng.random_range(0..3)];
            rows.push((coeffs, rel, r(rng.random_range(-4..=4))));
        }
        for (coeffs, rel, rhs) in &rows {
            let mut c = LinearConstraint::new(*rel, rhs.clone());
            for (j, v) in coeffs.iter().enumerate() {
                if !v.is_zero() {
                    c.add(j, v.clone());
                }
            }
            p.constraints.push(c);
        }
        let holds = |x: &[Rational]| {
            rows.iter().all(|(c, rel, rhs)| {
                let lhs: Rational = c.iter().zip(x).map(|(a, b)| a * b).sum();
                match rel {
                    Relation::Geq => lhs >= *rhs,
                    Relation::Leq => lhs <= *rhs,
                    Relation::Eq => lhs == *rhs,
                }
            })
        };
        // The polyhedron lies in the orthant, so it is nonempty iff it has a vertex.
        let oracle = combinations(rows.len(), VARS).into_iter().any(|idx| {
            let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
            let b = idx.iter().map(|&i| rows[i].2.clone()).collect();
            gauss(a, b).is_some_and(|x| holds(&x))
        });
        let got = solve_feasibility(&p);
        assert_eq!(got.is_some(), oracle);
        if let Some(s) = got {
            assert!(holds(&s.assignment));
        }
    }
}

/// End components by subset enumeration.
fn brute_mecs(m: &VassMdp) -> BTreeSet<BTreeSet<usize>> {
    let n = m.num_states();
    let is_ec = |set: &BTreeSet<usize>| {
        let inside = |t: usize| set.contains(&m.src(t)) && set.contains(&m.dst(t));
        let ok = set.iter().all(|&p| {
            if m.is_prob(p) {
                m.out(p).iter().all(|&t| inside(t))
            } else {
                m.out(p).iter().any(|&t| inside(t))
            }
        });
        let edges: Vec<(usize, usize)> =
            (0..m.num_transitions()).filter(|&t| inside(t)).map(|t| (m.src(t), m.dst(t))).collect();
        let reach = |from: usize, fwd: bool| {
            let mut seen = BTreeSet::from([from]);
            let mut q = VecDeque::from([from]);
            while let Some(a) = q.pop_front() {
                for &(x, y) in &edges {
                    let (x, y) = if fwd { (x, y) } else { (y, x) };
                    if x == a && seen.insert(y) {
                        q.push_back(y);
                    }
                }
            }
            seen
        };
        let first = *set.iter().next().unwrap();
        ok && reach(first, true) == *set && reach(first, false) == *set
    };
    let ecs: Vec<BTreeSet<usize>> = (1u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect::<BTreeSet<usize>>())
        .filter(|s| is_ec(s))
        .collect();
    ecs.iter().filter(|s| !ecs.iter().any(|o| o != *s && o.is_superset(s))).cloned().collect()
}

/// Max probability of reaching `to` from `start`, over all MD strategies, with
/// states of other MECs absorbing and losing.
fn brute_reach(m: &VassMdp, mecs: &[BTreeSet<usize>], from: usize, to: usize, start: usize) -> Rational {
    let n = m.num_states();
    let losing: Vec<bool> =
        (0..n).map(|s| mecs.iter().enumerate().any(|(k, c)| k != from && k != to && c.contains(&s))).collect();
    let target: Vec<bool> = (0..n).map(|s| mecs[to].contains(&s)).collect();
    let nondet: Vec<usize> = (0..n).filter(|&s| !m.is_prob(s)).collect();
    let mut best = Rational::zero();
    let mut idx = vec![0usize; nondet.len()];
    loop {
        let succ = |s: usize| -> Vec<(usize, Rational)> {
            if m.is_prob(s) {
                m.out(s).iter().map(|&t| (m.dst(t), m.prob(t).unwrap().clone())).collect()
            } else {
                let k = nondet.iter().position(|&x| x == s).unwrap();
                vec![(m.dst(m.out(s)[idx[k]]), Rational::one())]
            }
        };
        // States that reach the target in the chain.
        let mut good = target.clone();
        loop {
            let mut ch = false;
            for s in 0..n {
                if !good[s] && !losing[s] && succ(s).iter().any(|(d, _)| good[*d]) {
                    good[s] = true;
                    ch = true;
                }
            }
            if !ch {
                break;
            }
        }
        if good[start] {
            let unk: Vec<usize> = (0..n).filter(|&s| good[s] && !target[s]).collect();
            let pos = |s: usize| unk.iter().position(|&u| u == s);
            let mut a = vec![vec![Rational::zero(); unk.len()]; unk.len()];
            let mut b = vec![Rational::zero(); unk.len()];
            for (i, &s) in unk.iter().enumerate() {
                a[i][i] += Rational::one();
                for (d, p) in succ(s) {
                    if target[d] {
                        b[i] += p;
                    } else if let Some(j) = pos(d) {
                        a[i][j] -= p;
                    }
                }
            }
            let v = if target[start] { Rational::one() } else { gauss(a, b).unwrap()[pos(start).unwrap()].clone() };
            best = best.max(v);
        }
        let mut k = 0;
        loop {
            if k == nondet.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < m.out(nondet[k]).len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn mecs_types_and_weights_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for round in 0..120 {
        let shape = Shape::new(rng.random_range(2..=5), 1, 2);
        let m = if round % 2 == 0 { dag_like(&mut rng, shape) } else { arbitrary(&mut rng, shape) };
        let mecs = mec_decomposition(&m);
        let got: BTreeSet<BTreeSet<usize>> =
            mecs.iter().map(|k| k.states.iter().map(|s| m.state_idx(s).unwrap()).collect()).collect();
        assert_eq!(got, brute_mecs(&m));
        if !is_dag_like(&m) {
            continue;
        }
        let dec = decompose(&m);
        let sets: Vec<BTreeSet<usize>> = dec.mec_states.iter().map(|v| v.iter().copied().collect()).collect();
        // Connection relation by simple-path search through non-MEC states.
        let connected = |a: usize, b: usize| {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<usize> = dec.mec_states[a].clone();
            while let Some(s) = stack.pop() {
                for &t in m.out(s) {
                    let d = m.dst(t);
                    if sets[b].contains(&d) {
                        return true;
                    }
                    if !sets.iter().any(|c| c.contains(&d)) && seen.insert(d) {
                        stack.push(d);
                    }
                }
            }
            false
        };
        let mut expected: Vec<Vec<usize>> = (0..dec.len()).map(|k| vec![k]).collect();
        let mut frontier = expected.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for seq in &frontier {
                for b in 0..dec.len() {
                    if b != *seq.last().unwrap() && connected(*seq.last().unwrap(), b) {
                        let mut s = seq.clone();
                        s.push(b);
                        next.push(s);
                    }
                }
            }
            expected.extend(next.iter().cloned());
            frontier = next;
        }
        let types = enumerate_types(&m, dec.len());
        let got: BTreeSet<Vec<String>> = types.iter().map(|t| t.mecs.clone()).collect();
        let want: BTreeSet<Vec<String>> =
            expected.iter().map(|s| s.iter().map(|&k| dec.mecs[k].id.clone()).collect()).collect();
        assert_eq!(got, want);
        for a in 0..dec.len() {
            for b in successors(&m, &dec, a) {
                let w = brute_reach(&m, &sets, a, b, dec.mec_states[a][0]);
                let ty = types.iter().find(|t| t.mecs == [dec.mecs[a].id.clone(), dec.mecs[b].id.clone()]).unwrap();
                assert_eq!(ty.weight, w);
                // The value does not depend on the chosen state of the source MEC.
                for &s in &dec.mec_states[a] {
                    assert_eq!(brute_reach(&m, &sets, a, b, s), w);
                }
            }
        }
        for t in &types {
            assert!(t.weight <= Rational::one() && !t.weight.is_negative());
        }
    }
}

#[test]
fn one_dimensional_detectors_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = [0usize; 4];
    for round in 0..600 {
        // Small updates make zero-drift BSCCs common.
        let shape = Shape::new(rng.random_range(1..=5), 1, if round % 2 == 0 { 1 } else { 3 });
        let m = arbitrary(&mut rng, shape);
        let brute = inventory_brute_force(&m, DEFAULT_STRATEGY_BOUND).unwrap();
        let poly = inventory_polynomial(&m).unwrap();
        assert_eq!(poly.increasing, brute.increasing, "{}", vass_asym::model::to_json(&m));
        let check = |p: &[Option<bool>], b: &[Option<bool>]| {
            for (x, y) in p.iter().zip(b) {
                if x.is_some() {
                    assert_eq!(x, y, "{}", vass_asym::model::to_json(&m));
                }
            }
        };
        check(&poly.bounded_zero, &brute.bounded_zero);
        check(&poly.unbounded_zero, &brute.unbounded_zero);
        check(&poly.bounded_zero_transition, &brute.bounded_zero_transition);
        check(&poly.zero_drift_transition, &brute.zero_drift_transition);

        let any_inc = brute.increasing.iter().any(|&b| b);
        assert_eq!(detect_increasing(&m).unwrap().is_some(), any_inc);
        if any_inc {
            counts[0] += 1;
            assert!(detect_bounded_zero(&m).is_err());
        } else {
            let bz = brute.bounded_zero.iter().any(|b| *b == Some(true));
            let uz = brute.unbounded_zero.iter().any(|b| *b == Some(true));
            counts[1] += bz as usize;
            counts[2] += uz as usize;
            counts[3] += (!bz && !uz) as usize;
            assert_eq!(detect_bounded_zero(&m).unwrap().is_some(), bz);
            assert_eq!(detect_unbounded_zero(&m).unwrap().is_some(), uz);
        }

        let dec = decompose(&m);
        let report = classify_onedim(&m, &ComplexityMeasure::all(&m), 3).unwrap();
        for e in &report.entries {
            let beta: Vec<usize> = e.type_mecs.iter().map(|id| dec.index_of(id).unwrap()).collect();
            assert_eq!(
                e.label,
                common::table_label(&m, &brute, &beta, &e.measure),
                "{} on {:?}",
                e.measure,
                e.type_mecs
            );
        }
    }
    // The corpus exercises every regime.
    assert!(counts.iter().all(|&c| c >= 5), "{counts:?}");
}
