//! Query-weight and one-way-to-hiding bounds on small scripted algorithms.
//!
//! Classical instances answer XOR queries with `H` or a copy `H′` that flips
//! the output on a set `S`; unitary instances apply `U₀` or `U₁` to the query
//! register. Everything is computed on exact states.

use std::collections::BTreeSet;

use num_complex::Complex;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::qrom::{query_weight, Oracle, OracleAlgorithm, OracleTable, OracleView, QueryOracle, QueryTrace};
use crate::rng::{trial_stream, Stream};
use crate::statevec::random::haar_unitary;
use crate::statevec::{pure_trace_distance, RegisterLayout};
use crate::{Matrix, State};

use super::{BoundReport, GameError, Result};

pub const MAX_QUERIES: usize = 8;
pub const MAX_QUBITS: usize = 10;
/// Random-query extractions per classical instance.
pub const EXTRACTIONS: usize = 10_000;

pub const REG_W: &str = "W";
pub const REG_X: &str = "X";
pub const REG_Y: &str = "Y";
pub const REG_A: &str = "A";
pub const REG_Q: &str = "Q";

fn check_caps(alg: &OracleAlgorithm) -> Result<()> {
    let width = alg.layout().total_width();
    if alg.queries() == 0 || alg.queries() > MAX_QUERIES || width > MAX_QUBITS {
        return Err(GameError::Params(format!(
            "instance with {} queries on {width} qubits exceeds 1..={MAX_QUERIES} queries, {MAX_QUBITS} qubits",
            alg.queries()
        )));
    }
    Ok(())
}

/// `H′` equal to `h` except with every output bit flipped on `set`.
pub fn flip_on(h: &OracleView, set: &BTreeSet<u64>) -> Result<OracleView> {
    let mask = (1u64 << h.base().out_bits) - 1;
    Ok(h.point_map(set.iter().map(|&x| (x, h.base().eval(x) ^ mask)))?)
}

/// Bounds for one classical instance: qrom-replacement on the state at query
/// `T`, qwtotal on the final state, and the extraction rate.
pub fn classical_reports(
    name: &str,
    alg: &OracleAlgorithm,
    h: &dyn Oracle,
    h_prime: &dyn Oracle,
    set: &BTreeSet<u64>,
    rng: &mut Stream,
) -> Result<Vec<BoundReport>> {
    check_caps(alg)?;
    let t = alg.queries();
    let tf = t as f64;
    let run = alg.run(QueryOracle::Classical(h))?;
    let run_p = alg.run(QueryOracle::Classical(h_prime))?;
    let trace = QueryTrace::from_snapshots(&run.snapshots, alg.query_reg())?;
    let qw = query_weight(&trace, set);

    let td_at_t = pure_trace_distance(&run.snapshots[t - 1], &run_p.snapshots[t - 1])?;
    let td_final = pure_trace_distance(&run.final_state, &run_p.final_state)?;
    let mut out = vec![
        BoundReport::new("qrom-replacement", name, td_at_t, (tf * qw).sqrt()),
        BoundReport::new("qwtotal", name, td_final, 2.0 * tf.sqrt() * qw.sqrt()),
        BoundReport::new("qwtotal-without-2", name, td_final, (tf * qw).sqrt()).informational(),
    ];

    // Stop at a uniform query and measure the query register; the outcome
    // distribution at each query is read off the pre-query snapshot.
    let dists = trace
        .records
        .iter()
        .map(|r| {
            let (xs, ps): (Vec<u64>, Vec<f64>) = r.weights.iter().map(|(x, p)| (*x, *p)).unzip();
            Ok((xs, WeightedIndex::new(ps).map_err(|e| GameError::Params(e.to_string()))?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut hits = 0usize;
    for _ in 0..EXTRACTIONS {
        let (xs, dist) = &dists[rng.gen_range(0..t)];
        let x = xs[dist.sample(rng)];
        if set.contains(&x) {
            hits += 1;
        }
    }
    let rate = hits as f64 / EXTRACTIONS as f64;
    let exact = qw / tf;
    let sigma = (exact * (1.0 - exact) / EXTRACTIONS as f64).sqrt();
    out.push(BoundReport::new("qwmeasure", name, qw / (tf * tf) - 3.0 * sigma, rate));
    Ok(out)
}

/// `V ⊗ I_Y`: `v` acts on every register except the single answer qubit.
fn except_answer(layout: &RegisterLayout, v: &Matrix) -> Result<Matrix> {
    let f = layout.field(REG_Y)?;
    let s = f.shift;
    let strip = |i: usize| ((i >> (s + 1)) << s) | (i & ((1 << s) - 1));
    let dim = 1usize << layout.total_width();
    Ok(Matrix::from_fn(dim, |i, j| {
        if f.get(i as u128) == f.get(j as u128) {
            v[(strip(i), strip(j))]
        } else {
            Complex::new(0.0, 0.0)
        }
    }))
}

/// W = 2, X = 3, Y = 1 qubits; `T ∈ 1..=4`; step unitaries either Haar on
/// everything or Haar on everything but `Y`.
pub fn random_classical_instance(rng: &mut Stream) -> Result<(OracleAlgorithm, OracleView, OracleView, BTreeSet<u64>)> {
    let layout = RegisterLayout::new(&[(REG_W, 2), (REG_X, 3), (REG_Y, 1)])?;
    let t = rng.gen_range(1..=4);
    let dim = 1usize << layout.total_width();
    let keep_answer = rng.gen::<bool>();
    let steps = (0..=t)
        .map(|_| {
            if keep_answer {
                except_answer(&layout, &haar_unitary::<f64, _>(dim / 2, rng))
            } else {
                Ok(haar_unitary::<f64, _>(dim, rng))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let alg = OracleAlgorithm::new(State::zero(layout), steps, REG_X, Some(REG_Y))?;
    let h = OracleTable::new(rng.gen(), 3, 1)?.view();
    let size = rng.gen_range(1..=3);
    let mut set = BTreeSet::new();
    while set.len() < size {
        set.insert(rng.gen_range(0..8u64));
    }
    let h_prime = flip_on(&h, &set)?;
    Ok((alg, h, h_prime, set))
}

fn pure_td(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let ov: Complex<f64> = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (1.0 - ov.norm_sqr()).max(0.0).sqrt()
}

fn l2_sqr(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Bounds for one unitary-oracle instance: the trace-distance form, the
/// ℓ₂ form it is derived from, and the corollary at `δ = ε/(4T)`.
pub fn unitary_reports(name: &str, alg: &OracleAlgorithm, u0: &Matrix, u1: &Matrix) -> Result<Vec<BoundReport>> {
    check_caps(alg)?;
    let t = alg.queries();
    let tf = t as f64;
    let run0 = alg.run(QueryOracle::Unitary(u0))?;
    let run1 = alg.run(QueryOracle::Unitary(u1))?;
    let trace = QueryTrace::from_snapshots(&run0.snapshots, alg.query_reg())?;
    let eps = pure_trace_distance(&run0.final_state, &run1.final_state)?;

    // (t, |α|², TD, ‖(U₀ − U₁)q‖²) per Schmidt term.
    let mut terms = Vec::new();
    for rec in &trace.records {
        let schmidt = rec
            .schmidt
            .as_ref()
            .ok_or_else(|| GameError::Params("query state too large for a Schmidt decomposition".into()))?;
        for (p, q) in schmidt {
            let (a, b) = (u0.apply(q), u1.apply(q));
            terms.push((rec.index, *p, pure_td(&a, &b), l2_sqr(&a, &b)));
        }
    }
    let td_sum: f64 = terms.iter().map(|(_, p, td, _)| p * td * td).sum();
    let l2_sum: f64 = terms.iter().map(|(_, p, _, l2)| p * l2).sum();
    let mut out = vec![
        BoundReport::new("gen-owth", name, eps, (4.0 * tf * td_sum).sqrt()),
        BoundReport::new("gen-owth-l2", name, eps, (tf * l2_sum).sqrt()).informational(),
    ];
    let delta = eps / (4.0 * tf);
    if delta > 0.0 {
        let mass: f64 = terms.iter().filter(|(_, _, td, _)| *td >= delta).map(|(_, p, _, _)| p).sum::<f64>() / tf;
        let needed = (eps * eps / (4.0 * tf * tf) - delta * delta) / (1.0 - delta * delta);
        out.push(BoundReport::new("gen-owth-corollary", name, needed, mass));
    }
    Ok(out)
}

/// A = 2, Q = 2 qubits; `T ∈ 1..=4`; `U₁` is either independent of `U₀` or
/// `U₀` followed by a rotation with eigenphases in `[−δ, δ]`.
pub fn random_unitary_instance(rng: &mut Stream) -> Result<(OracleAlgorithm, Matrix, Matrix)> {
    let layout = RegisterLayout::new(&[(REG_A, 2), (REG_Q, 2)])?;
    let t = rng.gen_range(1..=4);
    let dim = 1usize << layout.total_width();
    let steps = (0..=t).map(|_| haar_unitary::<f64, _>(dim, rng)).collect();
    let alg = OracleAlgorithm::new(State::zero(layout), steps, REG_Q, None)?;
    let u0 = haar_unitary::<f64, _>(4, rng);
    let u1 = if rng.gen::<bool>() {
        haar_unitary::<f64, _>(4, rng)
    } else {
        let v = haar_unitary::<f64, _>(4, rng);
        let delta = rng.gen_range(0.0..1.0);
        let phases: Vec<f64> = (0..4).map(|_| rng.gen_range(-delta..=delta)).collect();
        let d = Matrix::from_fn(4, |i, j| if i == j { Complex::from_polar(1.0, phases[i]) } else { Complex::new(0.0, 0.0) });
        u0.matmul(&v.matmul(&d).matmul(&v.adjoint()))
    };
    Ok((alg, u0, u1))
}

/// `instances` random classical instances and as many unitary ones.
pub fn owth_bound_suite(instances: usize, seed: u64) -> Result<Vec<BoundReport>> {
    let classical = (0..instances as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_stream(seed, "owth/classical", k);
            let (alg, h, hp, set) = random_classical_instance(&mut rng)?;
            classical_reports(&format!("classical-{k}"), &alg, &h, &hp, &set, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let unitary = (0..instances as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_stream(seed, "owth/unitary", k);
            let (alg, u0, u1) = random_unitary_instance(&mut rng)?;
            unitary_reports(&format!("unitary-{k}"), &alg, &u0, &u1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(classical.into_iter().chain(unitary).flatten().collect())
}
