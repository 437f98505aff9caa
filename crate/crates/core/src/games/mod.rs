//! Security games, Monte Carlo statistics, and numerical lemma checks.
//!
//! Every game runs its trials on streams derived from `(master seed, game,
//! trial index)`, so results do not depend on scheduling. Scripted
//! strategies also report the exact probability that the trial is won given
//! the hidden values, computed on the simulator, which lets every empirical
//! rate be compared with its exact expectation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::f2lin::F2Error;
use crate::fs_cden::FsError;
use crate::qrom::OracleError;
use crate::rng::{trial_stream, Stream};
use crate::sig_cden::SigError;
use crate::sigma::SigmaError;
use crate::statevec::StateError;

pub mod adp_del;
pub mod deniability;
pub mod double_ext;
pub mod dph;
pub mod evidence;
pub mod lemmas;
pub mod owth;
pub mod soundness;

/// Tolerance below which a negative slack still counts as holding.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Largest number of trials a single game will run.
pub const MAX_TRIALS: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("malformed strategy output: {0}")]
    Strategy(String),
    #[error("unknown identifier {0:?}")]
    Unknown(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Fs(#[from] FsError),
    #[error(transparent)]
    Sig(#[from] SigError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error(transparent)]
    F2(#[from] F2Error),
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;

/// 95% Wilson score interval for `wins` successes in `trials`.
pub fn wilson(wins: usize, trials: usize) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = wins as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

/// One trial: whether it was won and, when known, the exact win probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub win: bool,
    pub prob: Option<f64>,
}

impl TrialOutcome {
    pub fn new(win: bool, prob: Option<f64>) -> Self {
        Self { win, prob }
    }
}

/// Result of a Monte Carlo game.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameStats {
    pub game: String,
    pub strategy: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub trials: usize,
    pub wins: usize,
    pub estimate: f64,
    pub ci95: [f64; 2],
    /// Mean of the per-trial exact probabilities, when every trial has one.
    pub exact: Option<f64>,
    /// Standard deviation of the win rate implied by the per-trial probabilities.
    pub exact_sigma: Option<f64>,
    pub seed: u64,
    pub wall_time_ms: Option<u64>,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

impl GameStats {
    pub fn from_outcomes(
        game: &str,
        strategy: &str,
        params: BTreeMap<String, serde_json::Value>,
        seed: u64,
        outcomes: Vec<TrialOutcome>,
    ) -> Self {
        let trials = outcomes.len();
        let wins = outcomes.iter().filter(|o| o.win).count();
        let estimate = if trials == 0 { 0.0 } else { wins as f64 / trials as f64 };
        let probs: Option<Vec<f64>> = outcomes.iter().map(|o| o.prob).collect();
        let (exact, exact_sigma) = match probs {
            Some(ps) if !ps.is_empty() => {
                let n = ps.len() as f64;
                let mean = ps.iter().sum::<f64>() / n;
                let var: f64 = ps.iter().map(|p| p * (1.0 - p)).sum::<f64>() / (n * n);
                (Some(mean), Some(var.max(0.0).sqrt()))
            }
            _ => (None, None),
        };
        Self {
            game: game.to_string(),
            strategy: strategy.to_string(),
            params,
            trials,
            wins,
            estimate,
            ci95: wilson(wins, trials),
            exact,
            exact_sigma,
            seed,
            wall_time_ms: None,
            outcomes,
        }
    }

    /// Whether the empirical rate lies within three standard deviations of
    /// the exact expectation. A zero deviation demands equality.
    pub fn matches_exact(&self) -> Option<bool> {
        let (mean, sigma) = (self.exact?, self.exact_sigma?);
        Some((self.estimate - mean).abs() <= 3.0 * sigma + 1e-12)
    }

    /// `p + 3·√(p(1−p)/trials)`.
    pub fn three_sigma_above(&self, p: f64) -> f64 {
        p + 3.0 * (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// One inequality instance: `lhs ≤ rhs` up to [`BOUND_TOLERANCE`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub lemma: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// A companion form reported alongside a stated bound; not counted as a check.
    pub informational: bool,
}

impl BoundReport {
    pub fn new(lemma: &str, instance: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            lemma: lemma.to_string(),
            instance: instance.into(),
            lhs,
            rhs,
            slack,
            holds: slack >= -BOUND_TOLERANCE,
            informational: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

/// Per-lemma summary of a list of reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSummary {
    pub lemma_id: String,
    pub instances: usize,
    pub violations: usize,
    /// Largest `lhs − rhs` over violating instances, zero when none.
    pub max_violation: f64,
    pub informational: bool,
}

/// Groups reports by lemma, keeping first-appearance order.
pub fn summarize(reports: &[BoundReport]) -> Vec<LemmaSummary> {
    let mut out: Vec<LemmaSummary> = Vec::new();
    for r in reports {
        let idx = match out.iter().position(|s| s.lemma_id == r.lemma) {
            Some(i) => i,
            None => {
                out.push(LemmaSummary {
                    lemma_id: r.lemma.clone(),
                    instances: 0,
                    violations: 0,
                    max_violation: 0.0,
                    informational: r.informational,
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.instances += 1;
        if !r.holds {
            s.violations += 1;
            s.max_violation = s.max_violation.max(-r.slack);
        }
    }
    out
}

pub(crate) fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(GameError::Params(format!("trials {trials} outside 1..={MAX_TRIALS}")));
    }
    Ok(())
}

/// Runs `trials` independent trials in parallel; results come back in index order.
pub(crate) fn run_trials<F>(master: u64, domain: &str, trials: usize, f: F) -> Result<Vec<TrialOutcome>>
where
    F: Fn(u64, &mut Stream) -> Result<TrialOutcome> + Sync,
{
    check_trials(trials)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_stream(master, domain, i);
            f(i, &mut rng)
        })
        .collect()
}

pub(crate) fn params<const N: usize>(kv: [(&str, serde_json::Value); N]) -> BTreeMap<String, serde_json::Value> {
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests;
