//! Real versus simulated deniability experiments, side by side.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fs_cden::{ExperimentRecord, FsCden, NizkAdversary, NIZK_ORACLE_IN_BITS, NIZK_ORACLE_OUT_BITS};
use crate::qrom::OracleTable;
use crate::rng::{stream, subseed, trial_stream};
use crate::sig_cden::fs_sig::{FsSig, SigningOracle};
use crate::sigma::keygen;

use super::{check_trials, params, GameError, GameStats, Result, TrialOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenScheme {
    FsNizk,
    FsSig,
}

impl DenScheme {
    pub fn label(&self) -> &'static str {
        match self {
            Self::FsNizk => "fs-nizk",
            Self::FsSig => "fs-sig",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::FsNizk, Self::FsSig].into_iter().find(|x| x.label() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeniabilityPair {
    pub scheme: DenScheme,
    pub adversary: String,
    pub lambda: usize,
    pub statement: u64,
    /// The special message, for the signature variant.
    pub m_star: Option<u64>,
    /// Messages signed through ordinary queries (`M`); never contains `m_star`.
    pub signed: Vec<u64>,
    /// Messages the simulator asked its signing oracle for (`M_S`).
    pub simulator_queries: Option<Vec<u64>>,
    pub real: ExperimentRecord,
    pub sim: ExperimentRecord,
}

/// Runs the real experiment and the simulator from one master seed.
pub fn run_deniability_pair(
    scheme: DenScheme,
    adversary: &dyn NizkAdversary,
    lambda: usize,
    seed: u64,
) -> Result<DeniabilityPair> {
    let mut key_rng = stream(subseed(seed, "deniability/keys"));
    let oracle_seed = subseed(seed, "deniability/oracle");
    match scheme {
        DenScheme::FsNizk => {
            let nizk = FsCden::new(lambda)?;
            let oracle = OracleTable::new(oracle_seed, NIZK_ORACLE_IN_BITS, NIZK_ORACLE_OUT_BITS)?.view();
            let (x, w) = keygen(&nizk.group, &mut key_rng);
            let real = nizk.nizk_real_experiment(&oracle, x, w, adversary, seed)?;
            let sim = nizk.simulate_experiment(&oracle, x, adversary, seed)?;
            Ok(DeniabilityPair {
                scheme,
                adversary: adversary.name().to_string(),
                lambda,
                statement: x,
                m_star: None,
                signed: Vec::new(),
                simulator_queries: None,
                real,
                sim,
            })
        }
        DenScheme::FsSig => {
            let sig = FsSig::new(lambda)?;
            let oracle = FsSig::oracle(oracle_seed);
            let keys = sig.gen(&mut key_rng);
            let m_star = key_rng.gen_range(1..1u64 << sig.msg_bits);
            let real = sig.real_experiment(&oracle, &keys, m_star, adversary, seed)?;
            let mut signer = SigningOracle::new(&sig, &oracle, keys);
            let sim = sig.simulate_experiment(&oracle, &mut signer, keys.vk, m_star, adversary, seed)?;
            if real.signed.contains(&m_star) {
                return Err(GameError::Strategy("the special message was also signed normally".into()));
            }
            Ok(DeniabilityPair {
                scheme,
                adversary: adversary.name().to_string(),
                lambda,
                statement: keys.vk,
                m_star: Some(m_star),
                signed: real.signed,
                simulator_queries: sim.simulator_queries,
                real: real.record,
                sim: sim.record,
            })
        }
    }
}

/// Histogram comparison of the adversary's residual memo across paired runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemoComparison {
    pub runs: usize,
    pub real_accepted: usize,
    pub sim_accepted: usize,
    /// Total-variation distance between the memo histograms of accepted runs.
    pub tv: f64,
}

fn histogram<'a>(memos: impl Iterator<Item = &'a str>) -> (BTreeMap<&'a str, usize>, usize) {
    let mut h = BTreeMap::new();
    let mut n = 0;
    for m in memos {
        *h.entry(m).or_insert(0) += 1;
        n += 1;
    }
    (h, n)
}

pub fn tv_distance(a: &BTreeMap<&str, usize>, na: usize, b: &BTreeMap<&str, usize>, nb: usize) -> f64 {
    match (na, nb) {
        (0, 0) => return 0.0,
        (0, _) | (_, 0) => return 1.0,
        _ => {}
    }
    let keys: std::collections::BTreeSet<&str> = a.keys().chain(b.keys()).copied().collect();
    let sum: f64 = keys
        .into_iter()
        .map(|k| {
            let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
            let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum();
    sum / 2.0
}

/// Acceptance statistics and memo comparison over many paired runs, plus
/// the full records of the run at the master seed itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeniabilityReport {
    pub pair: DeniabilityPair,
    pub real: GameStats,
    pub sim: GameStats,
    pub memo: MemoComparison,
}

/// Runs `runs` independent pairs; run `i` uses a seed derived from `(seed, i)`.
pub fn deniability_experiment(
    scheme: DenScheme,
    adversary: &dyn NizkAdversary,
    lambda: usize,
    runs: usize,
    seed: u64,
) -> Result<DeniabilityReport> {
    check_trials(runs)?;
    let pair = run_deniability_pair(scheme, adversary, lambda, seed)?;
    let pairs: Vec<DeniabilityPair> = (0..runs as u64)
        .into_par_iter()
        .map(|i| run_deniability_pair(scheme, adversary, lambda, trial_stream(seed, "deniability/runs", i).gen()))
        .collect::<Result<_>>()?;
    let (hr, nr) = histogram(pairs.iter().filter_map(|p| p.real.residual.as_deref()));
    let (hs, ns) = histogram(pairs.iter().filter_map(|p| p.sim.residual.as_deref()));
    let memo = MemoComparison { runs, real_accepted: nr, sim_accepted: ns, tv: tv_distance(&hr, nr, &hs, ns) };
    let stats = |side: &str, pick: fn(&DeniabilityPair) -> &ExperimentRecord| {
        let outcomes = pairs.iter().map(|p| TrialOutcome::new(pick(p).accepted, Some(pick(p).accept_prob))).collect();
        let p = params([("scheme", scheme.label().into()), ("lambda", lambda.into())]);
        GameStats::from_outcomes(&format!("deniability/{side}"), adversary.name(), p, seed, outcomes)
    };
    Ok(DeniabilityReport { real: stats("real", |p| &p.real), sim: stats("sim", |p| &p.sim), memo, pair })
}
