//! Direct-product hardness for subspace states: from one copy of `|A⟩` and
//! membership oracles for `A` and `A⊥`, output nonzero `v₁ ∈ A`, `v₂ ∈ A⊥`.

use rand::Rng;
use serde::Serialize;

use crate::f2lin::{sample_subspace, F2Subspace, F2Vec};
use crate::rng::Stream;
use crate::State;

use super::{params, run_trials, GameError, GameStats, Result, TrialOutcome};

pub const REG_A: &str = "A";
pub const MAX_LAMBDA: usize = 12;

/// Classical membership oracle for a subspace.
pub struct Membership<'a> {
    space: &'a F2Subspace,
}

impl Membership<'_> {
    pub fn contains(&self, v: u128) -> bool {
        self.space.contains_value(v)
    }
}

pub struct DphView<'a> {
    pub lambda: usize,
    pub state: &'a State,
    pub in_a: Membership<'a>,
    pub in_dual: Membership<'a>,
    /// The subspace itself, only for strategies that ask for it.
    pub hint: Option<&'a F2Subspace>,
}

pub trait DphAdversary: Send + Sync {
    fn name(&self) -> &str;
    fn wants_hint(&self) -> bool {
        false
    }
    fn run(&self, view: &DphView<'_>, rng: &mut Stream) -> Result<(u128, u128)>;
    fn win_probability(&self, _view: &DphView<'_>, _a: &F2Subspace) -> Result<Option<f64>> {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DphStrategy {
    /// Measures `|A⟩` for `v₁` and guesses a nonzero `v₂`.
    MeasureComputational,
    /// Measures `H|A⟩ = |A⊥⟩` for `v₂` and guesses a nonzero `v₁`.
    MeasureHadamard,
    OracleCheat,
}

impl DphStrategy {
    pub const ALL: [DphStrategy; 3] = [Self::MeasureComputational, Self::MeasureHadamard, Self::OracleCheat];

    pub fn label(&self) -> &'static str {
        match self {
            Self::MeasureComputational => "measure-computational",
            Self::MeasureHadamard => "measure-hadamard",
            Self::OracleCheat => "oracle-cheat",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.label() == s)
    }
}

fn nonzero_guess<R: Rng + ?Sized>(lambda: usize, rng: &mut R) -> u128 {
    rng.gen_range(1..1u128 << lambda)
}

/// Born probability of a nonzero outcome, times the chance a uniform nonzero
/// guess lands in `target ∖ {0}`.
fn measure_and_guess_probability(st: &State, target: &F2Subspace) -> Result<f64> {
    let nonzero: f64 = st.outcome_probabilities(REG_A)?.into_iter().filter(|(v, _)| *v != 0).map(|(_, p)| p).sum();
    let lambda = target.ambient_dim() as i32;
    Ok(nonzero * (target.size() as f64 - 1.0) / (2f64.powi(lambda) - 1.0))
}

impl DphAdversary for DphStrategy {
    fn name(&self) -> &str {
        self.label()
    }

    fn wants_hint(&self) -> bool {
        matches!(self, Self::OracleCheat)
    }

    fn run(&self, view: &DphView<'_>, rng: &mut Stream) -> Result<(u128, u128)> {
        match self {
            Self::MeasureComputational => {
                let v1 = view.state.measure(REG_A, rng)?.outcome.value();
                Ok((v1, nonzero_guess(view.lambda, rng)))
            }
            Self::MeasureHadamard => {
                let v2 = view.state.hadamard(REG_A)?.measure(REG_A, rng)?.outcome.value();
                Ok((nonzero_guess(view.lambda, rng), v2))
            }
            Self::OracleCheat => {
                let a = view.hint.ok_or_else(|| GameError::Strategy("oracle-cheat needs the hint".into()))?;
                let first = |s: &F2Subspace| s.basis().first().map_or(0, F2Vec::value);
                Ok((first(a), first(&a.dual())))
            }
        }
    }

    fn win_probability(&self, view: &DphView<'_>, a: &F2Subspace) -> Result<Option<f64>> {
        Ok(Some(match self {
            Self::MeasureComputational => measure_and_guess_probability(view.state, &a.dual())?,
            Self::MeasureHadamard => measure_and_guess_probability(&view.state.hadamard(REG_A)?, a)?,
            Self::OracleCheat => 1.0,
        }))
    }
}

/// `A` is uniform of dimension `λ/2` in `{0,1}^λ`.
pub fn dph_game(adversary: &dyn DphAdversary, lambda: usize, trials: usize, seed: u64) -> Result<GameStats> {
    if !(2..=MAX_LAMBDA).contains(&lambda) || !lambda.is_multiple_of(2) {
        return Err(GameError::Params(format!("lambda {lambda} must be even in 2..={MAX_LAMBDA}")));
    }
    let outcomes = run_trials(seed, "dph", trials, |_, rng| {
        let a = sample_subspace(lambda, lambda / 2, rng)?;
        let dual = a.dual();
        let state = State::coset_state(REG_A, &a, &F2Vec::zero(lambda), false)?;
        let view = DphView {
            lambda,
            state: &state,
            in_a: Membership { space: &a },
            in_dual: Membership { space: &dual },
            hint: adversary.wants_hint().then_some(&a),
        };
        let prob = adversary.win_probability(&view, &a)?;
        let (v1, v2) = adversary.run(&view, rng)?;
        let win = v1 != 0 && v2 != 0 && view.in_a.contains(v1) && view.in_dual.contains(v2);
        Ok(TrialOutcome::new(win, prob))
    })?;
    Ok(GameStats::from_outcomes("dph", adversary.name(), params([("lambda", lambda.into())]), seed, outcomes))
}
