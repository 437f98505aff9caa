use std::time::Instant;

use serde::Serialize;

use cdenlab::fs_cden::{self, NizkAdversary, Strategy};
use cdenlab::games::adp_del::{self, run_adp_del, AdpStrategy};
use cdenlab::games::deniability::{deniability_experiment, DenScheme};
use cdenlab::games::double_ext::{self, run_double_extraction, DoubleExtStrategy, Variant};
use cdenlab::games::dph::{dph_game, DphStrategy};
use cdenlab::games::evidence::{evidence_collection_demo, ArchiveTranscript};
use cdenlab::games::lemmas::all_lemma_suites;
use cdenlab::games::soundness::{
    run_count_scenario, run_soundness_game, CountScenario, ForgerStrategy, SoundScheme, SoundnessSetup,
    VerifierStrategy,
};
use cdenlab::games::{summarize, MAX_TRIALS};
use cdenlab::sig_cden::ot::{OtParams, MAX_INDICES};

use crate::report::{emit, Output};
use crate::{CliError, Common, Format, Game};

/// The resolved configuration, echoed into every report.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<Game>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    pub lambda: usize,
    pub lambda_x: usize,
    pub reps: usize,
    pub ell: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verifier: Option<String>,
    pub seed: u64,
    pub format: Format,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_range(name: &str, v: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if v < lo || v > hi {
        return Err(usage(format!("--{name} {v} outside {lo}..={hi}")));
    }
    Ok(())
}

fn check_caps(c: &Common) -> Result<(), CliError> {
    check_range("lambda", c.lambda, 2, fs_cden::MAX_LAMBDA)?;
    check_range("lambda-x", c.lambda_x, 1, double_ext::MAX_LAMBDA_X)?;
    check_range("reps", c.reps, 1, adp_del::MAX_REPS)?;
    check_range("ell", c.ell, 1, MAX_INDICES)?;
    if let Some(t) = c.trials {
        check_range("trials", t, 1, MAX_TRIALS)?;
    }
    Ok(())
}

fn base_config(c: &Common, command: &'static str) -> RunConfig {
    RunConfig {
        command,
        game: None,
        scheme: None,
        strategy: None,
        lambda: c.lambda,
        lambda_x: c.lambda_x,
        reps: c.reps,
        ell: c.ell,
        trials: None,
        variant: None,
        verifier: None,
        seed: c.seed,
        format: c.format,
    }
}

/// `Ok(true)` when every checked bound holds.
pub fn cmd_lemmas(c: &Common) -> Result<bool, CliError> {
    check_caps(c)?;
    let start = Instant::now();
    let reports = all_lemma_suites(c.seed)?;
    let summaries = summarize(&reports);
    let ok = summaries.iter().all(|s| s.informational || s.violations == 0);
    let mut results: Vec<serde_json::Value> = summaries.iter().map(to_value).collect::<Result<_, _>>()?;
    if c.per_instance {
        results.extend(reports.iter().map(to_value).collect::<Result<Vec<_>, _>>()?);
    }
    let lines = summaries
        .iter()
        .map(|s| {
            let tag = if s.informational { " informational" } else { "" };
            format!(
                "lemma={} instances={} violations={} max_violation={:.3e}{tag}",
                s.lemma_id, s.instances, s.violations, s.max_violation
            )
        })
        .collect();
    let out = Output { results, stats: Vec::new(), reports, lines };
    emit(c, &base_config(c, "lemmas"), out, c.timing.then(|| start.elapsed()))?;
    Ok(ok)
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Failed(e.to_string()))
}

fn pick<T: Copy>(what: &str, given: Option<&str>, default: T, parse: impl Fn(&str) -> Option<T>) -> Result<T, CliError> {
    match given {
        None => Ok(default),
        Some(s) => parse(s).ok_or_else(|| usage(format!("unknown {what} {s:?}"))),
    }
}

fn nizk_adversary(s: Option<&str>) -> Result<Box<dyn NizkAdversary>, CliError> {
    match s {
        Some(l) if l == ArchiveTranscript.name() => Ok(Box::new(ArchiveTranscript)),
        _ => Ok(Box::new(pick("strategy", s, Strategy::HonestDeleter, Strategy::parse)?)),
    }
}

fn stats_lines(stats: &[cdenlab::games::GameStats]) -> Vec<String> {
    stats
        .iter()
        .map(|s| {
            format!(
                "game={} estimate={:.6} ci95=[{:.6},{:.6}] trials={} strategy={}",
                s.game, s.estimate, s.ci95[0], s.ci95[1], s.trials, s.strategy
            )
        })
        .collect()
}

pub fn cmd_experiment(c: &Common) -> Result<bool, CliError> {
    check_caps(c)?;
    let game = c.game.ok_or_else(|| usage("experiment needs --game"))?;
    let mut cfg = base_config(c, "experiment");
    cfg.game = Some(game);
    let strategy = c.strategy.as_deref();
    let start = Instant::now();
    let trials = |default: usize| c.trials.unwrap_or(default);

    let (results, stats, extra) = match game {
        Game::AdpDel => {
            let st = pick("strategy", strategy, AdpStrategy::Computational, AdpStrategy::parse)?;
            cfg.strategy = Some(st.label().into());
            cfg.trials = Some(trials(4096));
            let s = run_adp_del(&st, c.lambda_x, c.reps, trials(4096), c.seed)?;
            (vec![to_value(&s)?], vec![s], Vec::new())
        }
        Game::DoubleExt => {
            let st = pick("strategy", strategy, DoubleExtStrategy::MeasureAndGuess, DoubleExtStrategy::parse)?;
            let variant = match c.variant.as_str() {
                "tagged" => Variant::Tagged,
                "untagged" => Variant::Untagged,
                v => return Err(usage(format!("unknown variant {v:?}"))),
            };
            cfg.strategy = Some(st.label().into());
            cfg.variant = Some(c.variant.clone());
            cfg.trials = Some(trials(10_000));
            let s = run_double_extraction(&st, c.lambda_x, variant, trials(10_000), c.seed)?;
            (vec![to_value(&s)?], vec![s], Vec::new())
        }
        Game::Dph => {
            let st = pick("strategy", strategy, DphStrategy::MeasureComputational, DphStrategy::parse)?;
            cfg.strategy = Some(st.label().into());
            cfg.trials = Some(trials(4096));
            let s = dph_game(&st, c.lambda, trials(4096), c.seed)?;
            (vec![to_value(&s)?], vec![s], Vec::new())
        }
        Game::Soundness => {
            let params = OtParams { lambda_x: c.lambda_x, ell: c.ell, ..OtParams::default() };
            cfg.trials = Some(trials(1000));
            let scenario = strategy.and_then(|s| CountScenario::ALL.into_iter().find(|x| x.label() == s));
            let s = if let Some(sc) = scenario {
                cfg.strategy = Some(sc.label().into());
                cfg.scheme = Some(SoundScheme::Mult.label().into());
                run_count_scenario(sc, params, trials(1000), c.seed)?
            } else {
                let st = pick("strategy", strategy, ForgerStrategy::Replay, ForgerStrategy::parse)?;
                let scheme = pick("scheme", c.scheme.as_deref(), SoundScheme::Ot, SoundScheme::parse)?;
                let verifier = pick("verifier", Some(&c.verifier), VerifierStrategy::HonestVerify, VerifierStrategy::parse)?;
                cfg.strategy = Some(st.label().into());
                cfg.scheme = Some(scheme.label().into());
                cfg.verifier = Some(verifier.label().into());
                let setup = SoundnessSetup::new(scheme, params, c.seed)?;
                run_soundness_game(&verifier, &st, &setup, trials(1000), c.seed)?
            };
            (vec![to_value(&s)?], vec![s], Vec::new())
        }
        Game::Deniability => {
            let scheme = pick("scheme", c.scheme.as_deref(), DenScheme::FsNizk, DenScheme::parse)?;
            let adv = nizk_adversary(strategy)?;
            cfg.scheme = Some(scheme.label().into());
            cfg.strategy = Some(adv.name().into());
            cfg.trials = Some(trials(1000));
            let r = deniability_experiment(scheme, adv.as_ref(), c.lambda, trials(1000), c.seed)?;
            let extra = vec![format!(
                "real_accept_prob={:.6} sim_accept_prob={:.6} memo_tv={:.6}",
                r.pair.real.accept_prob, r.pair.sim.accept_prob, r.memo.tv
            )];
            (vec![to_value(&r)?], vec![r.real, r.sim], extra)
        }
        Game::EvidenceDemo => {
            cfg.trials = Some(trials(1000));
            let r = evidence_collection_demo(c.lambda, trials(1000), c.seed)?;
            let extra = vec![format!(
                "strawman_advantage={:.6} fs_honest_advantage={:.6} fs_measure_advantage={:.6}",
                r.strawman_advantage, r.fs_honest_advantage, r.fs_measure_advantage
            )];
            let stats = vec![r.strawman.clone(), r.fs_honest.clone(), r.fs_honest_sim.clone(), r.fs_measure.clone(), r.fs_measure_sim.clone()];
            (vec![to_value(&r)?], stats, extra)
        }
    };
    let mut lines = stats_lines(&stats);
    lines.extend(extra);
    let out = Output { results, stats, reports: Vec::new(), lines };
    emit(c, &cfg, out, c.timing.then(|| start.elapsed()))?;
    Ok(true)
}
