//! Numerical checks of the supporting lemmas, each instance reported as a
//! [`BoundReport`] with an independently built reference on the other side.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::f2lin::{rref, F2Vec};
use crate::qrom::{prf_split_check, OracleTable};
use crate::rng::{trial_stream, Stream};
use crate::statevec::random::{haar_unitary, haar_vector, random_density, random_effect, random_pvm};
use crate::statevec::{trace_distance, ztwirl_mixture, RegisterLayout};
use crate::{Density, Matrix, State};

use super::owth::owth_bound_suite;
use super::{BoundReport, GameError, Result};

pub const PROJ_AMBIENT: usize = 4;
pub const PROJ_PHASES: usize = 10;
pub const ZTWIRL_INSTANCES: usize = 100;
pub const GENTLE_INSTANCES: usize = 200;
pub const POSTMEAS_INSTANCES: usize = 200;
pub const OWTH_INSTANCES: usize = 100;
pub const PRF_INSTANCES: usize = 8;
pub const PRF_PROBES: u64 = 4096;
/// Family-wise threshold on the largest of the 34 z-scores in one PRF report.
pub const PRF_Z_THRESHOLD: f64 = 4.5;

fn zero() -> Complex<f64> {
    Complex::new(0.0, 0.0)
}

fn run_instances<F>(seed: u64, domain: &str, count: usize, f: F) -> Result<Vec<BoundReport>>
where
    F: Fn(u64, &mut Stream) -> Result<Vec<BoundReport>> + Sync,
{
    let per: Vec<Vec<BoundReport>> = (0..count as u64)
        .into_par_iter()
        .map(|k| f(k, &mut trial_stream(seed, domain, k)))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Every 2-dimensional subspace of `{0,1}^n` as its four elements, found by
/// brute force over pairs.
pub fn all_planes(n: usize) -> Vec<[u128; 4]> {
    let mut seen = BTreeMap::new();
    for u in 1..1u128 << n {
        for w in (u + 1)..1u128 << n {
            let mut e = [0, u, w, u ^ w];
            e.sort_unstable();
            seen.insert(e, ());
        }
    }
    seen.into_keys().collect()
}

/// `Z^s H P_{A⊥} H P_A Z^s` from the circuit against `|A_s⟩⟨A_s|` from the
/// definition, entrywise, on the 16×16 dense matrices.
pub fn subspace_proj_suite(seed: u64) -> Result<Vec<BoundReport>> {
    let planes = all_planes(PROJ_AMBIENT);
    let dim = 1usize << PROJ_AMBIENT;
    let layout = RegisterLayout::new(&[("A", PROJ_AMBIENT)])?;
    run_instances(seed, "lemmas/subspace-proj", planes.len(), |k, rng| {
        let elems = planes[k as usize];
        let gens: Vec<F2Vec> = elems[1..3].iter().map(|&e| F2Vec::from_value(PROJ_AMBIENT, e)).collect::<std::result::Result<_, _>>()?;
        let a = rref(PROJ_AMBIENT, &gens)?;
        let dual = a.dual();
        let mut out = Vec::with_capacity(PROJ_PHASES);
        for j in 0..PROJ_PHASES {
            let s = F2Vec::random(PROJ_AMBIENT, rng);
            let mut circuit = Matrix::zeros(dim);
            for col in 0..dim {
                let st = State::basis(layout.clone(), col as u128)?
                    .apply_phase("A", &s)?
                    .filter(|l| a.contains_value(l))
                    .hadamard("A")?
                    .filter(|l| dual.contains_value(l))
                    .hadamard("A")?
                    .apply_phase("A", &s)?;
                for (row, amp) in st.to_dense()?.into_iter().enumerate() {
                    circuit[(row, col)] = amp;
                }
            }
            let mut v = vec![zero(); dim];
            for &e in &elems {
                let sign = if (e & s.value()).count_ones() % 2 == 1 { -0.5 } else { 0.5 };
                v[e as usize] = Complex::new(sign, 0.0);
            }
            let diff = circuit.max_abs_diff(&Matrix::outer(&v, &v));
            out.push(BoundReport::new("subspace-proj", format!("plane-{k}/s-{j}"), diff, 0.0));
        }
        Ok(out)
    })
}

/// Random `Σ_{x∈S} α_x |x⟩|φ_x⟩` on `X` (1..=4 qubits) and `P` (1..=2 qubits):
/// the phase average against `Σ |α_x|² |x,φ_x⟩⟨x,φ_x|`.
pub fn ztwirl_suite(seed: u64) -> Result<Vec<BoundReport>> {
    run_instances(seed, "lemmas/ztwirl", ZTWIRL_INSTANCES, |k, rng| {
        let xw = rng.gen_range(1..=4);
        let pw = rng.gen_range(1..=2);
        let layout = RegisterLayout::new(&[("X", xw), ("P", pw)])?;
        let mut xs: Vec<u128> = (0..1u128 << xw).collect();
        xs.shuffle(rng);
        xs.truncate(rng.gen_range(1..=xs.len()));
        let alphas = haar_vector::<f64, _>(xs.len(), rng);
        let branches: Vec<State> = xs
            .iter()
            .map(|&x| {
                let phi = haar_vector::<f64, _>(1 << pw, rng);
                let terms = phi.into_iter().enumerate().map(|(p, a)| (layout.pack(&[x, p as u128]), a));
                let terms = terms.map(|(l, a)| l.map(|l| (l, a))).collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(State::from_terms(layout.clone(), terms)?)
            })
            .collect::<Result<_>>()?;
        let mut psi_terms = Vec::new();
        for (alpha, b) in alphas.iter().zip(&branches) {
            psi_terms.extend(b.terms().map(|(l, a)| (l, alpha * a)));
        }
        let psi = State::from_terms(layout.clone(), psi_terms)?;
        let names: Vec<&str> = layout.names().collect();
        let twirled = ztwirl_mixture(xw, &names, |s| psi.apply_phase("X", s))?;
        let parts = alphas
            .iter()
            .zip(&branches)
            .map(|(alpha, b)| Ok((alpha.norm_sqr(), Density::pure(&b.to_dense()?)?)))
            .collect::<Result<Vec<_>>>()?;
        let diagonal = Density::mixture(&parts)?;
        let td = trace_distance(&twirled, &diagonal)?;
        Ok(vec![BoundReport::new("ztwirl", format!("state-{k}/x{xw}-p{pw}-s{}", xs.len()), td, 0.0)])
    })
}

fn random_dim(rng: &mut Stream) -> usize {
    1 << rng.gen_range(1..=3)
}

fn tr(m: &Matrix) -> f64 {
    m.trace().re
}

/// Normalised `M ρ M†`, or `None` when the outcome has no weight.
fn conditioned(m: &Matrix, rho: &Density) -> Result<Option<(f64, Density)>> {
    let out = m.matmul(rho.matrix()).matmul(&m.adjoint());
    let p = tr(&out);
    if p <= 1e-12 {
        return Ok(None);
    }
    // Symmetrise away the rounding asymmetry before validation.
    let herm = out.add(&out.adjoint()).scale(0.5 / p);
    Ok(Some((p, Density::new(herm)?)))
}

/// `TD(ρ, √E ρ √E / Tr(Eρ)) ≤ √ε` with `ε = 1 − Tr(Eρ)`.
pub fn gentle_suite(seed: u64) -> Result<Vec<BoundReport>> {
    run_instances(seed, "lemmas/gentle", GENTLE_INSTANCES, |k, rng| {
        let dim = random_dim(rng);
        let rho = random_density::<f64, _>(dim, rng.gen_range(1..=dim), rng)?;
        let e = random_effect::<f64, _>(dim, rng.gen_range(0.0..0.95), rng);
        let eps = (1.0 - tr(&e.matmul(rho.matrix()))).max(0.0);
        let sqrt_e = e.map_spectrum(|x| x.max(0.0).sqrt())?;
        let (_, post) = conditioned(&sqrt_e, &rho)?.ok_or_else(|| GameError::Params("effect with zero weight".into()))?;
        let td = trace_distance(&rho, &post)?;
        Ok(vec![BoundReport::new("gentle-measurement", format!("instance-{k}/dim-{dim}"), td, eps.sqrt())])
    })
}

/// Kraus operators `M_i = U_i P_i` from a random projective measurement;
/// `TD(ρ′, σ′) ≤ 3ε/(2p_i)` for every outcome, reported at the tightest one.
pub fn postmeasurement_suite(seed: u64) -> Result<Vec<BoundReport>> {
    run_instances(seed, "lemmas/postmeasurement", POSTMEAS_INSTANCES, |k, rng| {
        let dim = random_dim(rng);
        let rho = random_density::<f64, _>(dim, rng.gen_range(1..=dim), rng)?;
        let tau = random_density::<f64, _>(dim, rng.gen_range(1..=dim), rng)?;
        let t = rng.gen_range(0.0..1.0);
        let sigma = Density::mixture(&[(1.0 - t, rho.clone()), (t, tau)])?;
        let eps = trace_distance(&rho, &sigma)?;
        let outcomes = rng.gen_range(2..=dim);
        let kraus: Vec<Matrix> = random_pvm::<f64, _>(dim, outcomes, rng)
            .into_iter()
            .map(|p| haar_unitary::<f64, _>(dim, rng).matmul(&p))
            .collect();
        let mut worst: Option<BoundReport> = None;
        for (i, m) in kraus.iter().enumerate() {
            let (Some((p, rp)), Some((_, sp))) = (conditioned(m, &rho)?, conditioned(m, &sigma)?) else {
                continue;
            };
            let r = BoundReport::new(
                "post-measurement",
                format!("instance-{k}/dim-{dim}/outcome-{i}"),
                trace_distance(&rp, &sp)?,
                3.0 * eps / (2.0 * p),
            );
            if worst.as_ref().is_none_or(|w| r.slack < w.slack) {
                worst = Some(r);
            }
        }
        Ok(worst.into_iter().collect())
    })
}

/// Largest |z| over bit balance and collision counts of `H(k‖·)` and a fresh
/// table, against a family-wise threshold.
pub fn qrom_prf_suite(seed: u64) -> Result<Vec<BoundReport>> {
    run_instances(seed, "lemmas/qrom-prf", PRF_INSTANCES, |k, rng| {
        let key_bits = rng.gen_range(4..=10);
        let h = OracleTable::new(rng.gen(), key_bits + 12, 16)?;
        let key = F2Vec::random(key_bits, rng);
        let report = prf_split_check(&h, &key, PRF_PROBES)?.ok_or_else(|| GameError::Params("no probes".into()))?;
        let n = report.probes as f64;
        let sigma_bit = (0.25 / n).sqrt();
        let sigma_coll = report.expected_collisions.sqrt().max(1.0);
        let bits = report.keyed_bit_balance.iter().chain(&report.fresh_bit_balance).map(|p| ((p - 0.5) / sigma_bit).abs());
        let colls = [report.keyed_collisions, report.fresh_collisions]
            .into_iter()
            .map(|c| ((c as f64 - report.expected_collisions) / sigma_coll).abs());
        let z = bits.chain(colls).fold(0.0, f64::max);
        Ok(vec![BoundReport::new("qrom-prf", format!("key-{key_bits}-bits/{k}"), z, PRF_Z_THRESHOLD)])
    })
}

/// Every suite the `lemmas` command runs, in a fixed order.
pub fn all_lemma_suites(seed: u64) -> Result<Vec<BoundReport>> {
    let mut out = subspace_proj_suite(seed)?;
    out.extend(ztwirl_suite(seed)?);
    out.extend(gentle_suite(seed)?);
    out.extend(postmeasurement_suite(seed)?);
    out.extend(owth_bound_suite(OWTH_INSTANCES, seed)?);
    out.extend(qrom_prf_suite(seed)?);
    Ok(out)
}
