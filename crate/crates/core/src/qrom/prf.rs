//! Functional sanity check of keyed-prefix randomness `H_k(v) = H(k‖v)`.

use serde::Serialize;

use crate::f2lin::F2Vec;
use crate::rng::subseed;

use super::{Oracle, OracleError, OracleTable};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrfReport {
    pub probes: u64,
    /// Fraction of ones per output bit (leftmost first) for `H(k‖·)`.
    pub keyed_bit_balance: Vec<f64>,
    /// Same statistic for an independent table `G`.
    pub fresh_bit_balance: Vec<f64>,
    pub keyed_collisions: u64,
    pub fresh_collisions: u64,
    pub expected_collisions: f64,
    /// Every statistic is within three standard deviations of its ideal value.
    pub within_3sigma: bool,
}

fn stats(outputs: &[u64], out_bits: usize) -> (Vec<f64>, u64) {
    let n = outputs.len() as f64;
    let balance = (0..out_bits)
        .map(|b| {
            let shift = out_bits - 1 - b;
            outputs.iter().filter(|&&y| (y >> shift) & 1 == 1).count() as f64 / n
        })
        .collect();
    let mut sorted = outputs.to_vec();
    sorted.sort_unstable();
    let mut collisions = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            collisions += run * (run - 1) / 2;
            run = 1;
        }
    }
    collisions += run * (run - 1) / 2;
    (balance, collisions)
}

/// Compares `H(k‖v)` for suffixes `v = 0, 1, …, probes − 1` with a fresh
/// table on the same suffixes.
pub fn prf_split_check(h: &OracleTable, k: &F2Vec, probes: u64) -> Result<Option<PrfReport>, OracleError> {
    if k.len() >= h.in_bits {
        return Err(OracleError::FieldsTooWide(k.len()));
    }
    let suffix_bits = h.in_bits - k.len();
    if suffix_bits < 64 && probes > 1u64 << suffix_bits {
        return Err(OracleError::FieldsTooWide(suffix_bits));
    }
    if probes == 0 {
        return Ok(None);
    }
    let g = OracleTable::new(subseed(h.seed, "prf-split/fresh"), suffix_bits, h.out_bits)?;
    let kv = k.value() as u64;
    let keyed: Vec<u64> = (0..probes).map(|v| h.eval((kv << suffix_bits) | v)).collect();
    let fresh: Vec<u64> = (0..probes).map(|v| g.eval(v)).collect();
    let (kb, kc) = stats(&keyed, h.out_bits);
    let (fb, fc) = stats(&fresh, h.out_bits);
    let n = probes as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let expected = pairs / 2f64.powi(h.out_bits as i32);
    let sigma_bit = (0.25 / n).sqrt();
    let sigma_coll = expected.sqrt().max(1.0);
    let bits_ok = kb.iter().chain(&fb).all(|&p| (p - 0.5).abs() <= 3.0 * sigma_bit);
    let coll_ok = [kc, fc].iter().all(|&c| (c as f64 - expected).abs() <= 3.0 * sigma_coll);
    Ok(Some(PrfReport {
        probes,
        keyed_bit_balance: kb,
        fresh_bit_balance: fb,
        keyed_collisions: kc,
        fresh_collisions: fc,
        expected_collisions: expected,
        within_3sigma: bits_ok && coll_ok,
    }))
}
