//! The evidence-collection attack: after an accepted deletion, does the
//! adversary still hold something a third party would accept as proof that
//! a signature or proof existed?

use rand::Rng;
use serde::Serialize;

use crate::fs_cden::{
    AdversaryOutput, FsCden, FsError, NizkAdversary, ProofState, Strategy, NIZK_ORACLE_IN_BITS, NIZK_ORACLE_OUT_BITS,
    REG_A, REG_S1, REG_S2, REG_S3,
};
use crate::qrom::{Oracle, OracleTable, OracleView};
use crate::rng::{subseed, Stream};
use crate::sig_cden::strawman::{Strawman, REG_TOKEN};
use crate::sigma::{keygen, Transcript};
use crate::State;

use super::{params, run_trials, GameStats, Result, TrialOutcome};

pub const STRAWMAN_TOKEN_BITS: usize = 8;
pub const STRAWMAN_MSG_BITS: usize = 8;

/// Measures the whole proof, archives the transcript `(a, s1, s2, s3)` and
/// hands the collapsed state back as its certificate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArchiveTranscript;

impl NizkAdversary for ArchiveTranscript {
    fn name(&self) -> &str {
        "archive-transcript"
    }

    fn run(&self, _scheme: &FsCden, proof: ProofState, _oracle: &dyn Oracle, rng: &mut Stream) -> Result<AdversaryOutput, FsError> {
        let (label, _) = proof.state.measure_all(rng)?;
        let memo = [REG_A, REG_S1, REG_S2, REG_S3]
            .iter()
            .map(|r| Ok(proof.state.field(r)?.get(label) as u64))
            .collect::<Result<Vec<u64>, FsError>>()?;
        Ok(AdversaryOutput { cert: State::basis(proof.state.layout().clone(), label)?, memo })
    }
}

/// The third-party check: the memo is a transcript that verifies and is
/// hash-linked to the real oracle.
pub fn transcript_evidence_verifies(nizk: &FsCden, oracle: &dyn Oracle, x: u64, memo: &[u64]) -> Result<bool> {
    let &[a, s1, s2, s3] = memo else {
        return Ok(false);
    };
    if a == 0 || a >> nizk.lambda != 0 {
        return Ok(false);
    }
    Ok(nizk.predicate(oracle, x, a, &Transcript { s1, s2, s3 }).unwrap_or(false))
}

fn decode_memo(residual: &str) -> Vec<u64> {
    residual
        .as_bytes()
        .chunks(16)
        .filter_map(|c| std::str::from_utf8(c).ok().and_then(|s| u64::from_str_radix(s, 16).ok()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvidenceReport {
    /// Deletion accepted and the archived signature verifies.
    pub strawman: GameStats,
    /// The ideal-world adversary never saw a signature, so its rate is 0.
    pub strawman_advantage: f64,
    pub fs_honest: GameStats,
    pub fs_honest_sim: GameStats,
    pub fs_honest_advantage: f64,
    pub fs_measure: GameStats,
    pub fs_measure_sim: GameStats,
    pub fs_measure_advantage: f64,
}

fn strawman_trials(trials: usize, seed: u64) -> Result<GameStats> {
    let scheme = Strawman::new(STRAWMAN_TOKEN_BITS, STRAWMAN_MSG_BITS)?;
    let outcomes = run_trials(seed, "evidence/strawman", trials, |_, rng| {
        let sk = scheme.gen(rng);
        let m = rng.gen::<u64>() & ((1 << STRAWMAN_MSG_BITS) - 1);
        let (mut sig, dk) = scheme.sign(&sk, m, rng)?;
        let verified = rng.gen::<f64>() < scheme.verify(&sk.vk, m, &sig)?;
        let archive = sig.evidence;
        let token = sig.token.clone();
        let d = scheme.del(&mut sig, rng)?;
        let deleted = d.is_some_and(|d| scheme.delver(&dk, d));
        let evidence = scheme.evidence_verifies(&sk.vk, &archive);
        let pass_prob: f64 = match token {
            Some(t) => t
                .hadamard(REG_TOKEN)?
                .outcome_probabilities(REG_TOKEN)?
                .into_iter()
                .filter(|(d, _)| scheme.delver(&dk, *d as u64))
                .map(|(_, p)| p)
                .sum(),
            None => 0.0,
        };
        let prob = pass_prob * f64::from(u8::from(evidence && verified));
        Ok(TrialOutcome::new(verified && deleted && evidence, Some(prob)))
    })?;
    let p = params([("token_bits", STRAWMAN_TOKEN_BITS.into()), ("msg_bits", STRAWMAN_MSG_BITS.into())]);
    Ok(GameStats::from_outcomes("evidence-demo/strawman", "archive-signature", p, seed, outcomes))
}

/// `(real, sim)` joint rates of (deletion accepted ∧ evidence verifies).
fn fs_trials(adversary: &dyn NizkAdversary, lambda: usize, trials: usize, seed: u64) -> Result<(GameStats, GameStats)> {
    let nizk = FsCden::new(lambda)?;
    let run = |sim: bool| {
        let domain = if sim { "evidence/fs-sim" } else { "evidence/fs-real" };
        run_trials(seed, domain, trials, |i, rng| {
            let oracle: OracleView =
                OracleTable::new(subseed(seed ^ i, "evidence/oracle"), NIZK_ORACLE_IN_BITS, NIZK_ORACLE_OUT_BITS)?
                    .view();
            let (x, w) = keygen(&nizk.group, rng);
            let exp_seed: u64 = rng.gen();
            if sim {
                let rec = nizk.simulate_experiment(&oracle, x, adversary, exp_seed)?;
                let ok = match rec.residual.as_deref() {
                    Some(r) => transcript_evidence_verifies(&nizk, &oracle, x, &decode_memo(r))?,
                    None => false,
                };
                return Ok(TrialOutcome::new(ok, None));
            }
            let mut erng = crate::rng::stream(exp_seed);
            let (pf, dk) = nizk.prove(&oracle, x, w, &mut erng)?;
            // Exact joint probability, summed over the adversary's measurement outcomes
            // when it measures the full proof.
            let prob = if adversary.name() == ArchiveTranscript.name() {
                let mut acc = 0.0;
                for (label, amp) in pf.state.terms() {
                    let memo: Vec<u64> = [REG_A, REG_S1, REG_S2, REG_S3]
                        .iter()
                        .map(|r| Ok(pf.state.field(r)?.get(label) as u64))
                        .collect::<Result<_>>()?;
                    if transcript_evidence_verifies(&nizk, &oracle, x, &memo)? {
                        let cert = ProofState { state: State::basis(pf.state.layout().clone(), label)?, x };
                        acc += amp.norm_sqr() * nizk.delver_probability(&oracle, &dk, &cert)?;
                    }
                }
                Some(acc)
            } else {
                None
            };
            let out = adversary.run(&nizk, pf, &oracle, &mut erng)?;
            let p = nizk.delver_probability(&oracle, &dk, &ProofState { state: out.cert, x })?;
            let accepted = erng.gen::<f64>() < p;
            let ok = accepted && transcript_evidence_verifies(&nizk, &oracle, x, &out.memo)?;
            Ok(TrialOutcome::new(ok, prob.or(if adversary.name() == Strategy::HonestDeleter.label() { Some(0.0) } else { None })))
        })
    };
    let p = params([("lambda", lambda.into())]);
    let real = GameStats::from_outcomes("evidence-demo/fs-real", adversary.name(), p.clone(), seed, run(false)?);
    let sim = GameStats::from_outcomes("evidence-demo/fs-sim", adversary.name(), p, seed, run(true)?);
    Ok((real, sim))
}

/// Strawman archive attack against the FS-CDen honest deleter and the
/// transcript-archiving adversary.
pub fn evidence_collection_demo(lambda: usize, trials: usize, seed: u64) -> Result<EvidenceReport> {
    let strawman = strawman_trials(trials, seed)?;
    let (fs_honest, fs_honest_sim) = fs_trials(&Strategy::HonestDeleter, lambda, trials, seed)?;
    let (fs_measure, fs_measure_sim) = fs_trials(&ArchiveTranscript, lambda, trials, seed)?;
    Ok(EvidenceReport {
        strawman_advantage: strawman.estimate,
        strawman,
        fs_honest_advantage: fs_honest.estimate - fs_honest_sim.estimate,
        fs_honest,
        fs_honest_sim,
        fs_measure_advantage: fs_measure.estimate - fs_measure_sim.estimate,
        fs_measure,
        fs_measure_sim,
    })
}
