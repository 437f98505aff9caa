//! The double extraction problem: from `(|0⟩|x₀⟩ + (−1)^b|1⟩|x₁⟩)/√2`
//! together with `H(x₀), H(x₁)` and access to `H`, output both `x₀` and `x₁`.

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::qrom::{Oracle, OracleTable};
use crate::rng::Stream;
use crate::statevec::RegisterLayout;
use crate::State;

use super::{params, run_trials, GameError, GameStats, Result, TrialOutcome};

pub const REG_B: &str = "B";
pub const REG_X: &str = "X";
pub const MAX_LAMBDA_X: usize = 16;
pub const HASH_OUT_BITS: usize = 16;

/// Shape of the challenge state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `(|0⟩|x₀⟩ + (−1)^b|1⟩|x₁⟩)/√2`, slot tagged by a qubit.
    Tagged,
    /// `(|x₀⟩ + (−1)^b|x₁⟩)/√2`.
    Untagged,
}

pub struct DoubleExtView<'a> {
    pub lambda_x: usize,
    pub variant: Variant,
    pub state: &'a State,
    pub h0: u64,
    pub h1: u64,
    pub oracle: &'a dyn Oracle,
    /// `(x₀, x₁)`, only for strategies that ask for it.
    pub hint: Option<(u64, u64)>,
}

pub trait DoubleExtAdversary: Send + Sync {
    fn name(&self) -> &str;
    fn wants_hint(&self) -> bool {
        false
    }
    fn run(&self, view: &DoubleExtView<'_>, rng: &mut Stream) -> Result<(u64, u64)>;
    fn win_probability(&self, _view: &DoubleExtView<'_>, _x0: u64, _x1: u64) -> Result<Option<f64>> {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoubleExtStrategy {
    /// Measures, places the value by its tag (or by comparing hashes), and
    /// guesses the other value uniformly.
    MeasureAndGuess,
    OracleCheat,
    /// Outputs the measured value in both slots.
    MeasuredTwice,
}

impl DoubleExtStrategy {
    pub const ALL: [DoubleExtStrategy; 3] = [Self::MeasureAndGuess, Self::OracleCheat, Self::MeasuredTwice];

    pub fn label(&self) -> &'static str {
        match self {
            Self::MeasureAndGuess => "measure-and-guess",
            Self::OracleCheat => "oracle-cheat",
            Self::MeasuredTwice => "measured-twice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.label() == s)
    }
}

/// Which slot a measured label belongs to, and its value.
fn read_label(view: &DoubleExtView<'_>, label: u128) -> Result<(usize, u64)> {
    let x = view.state.field(REG_X)?.get(label) as u64;
    let slot = match view.variant {
        Variant::Tagged => view.state.field(REG_B)?.get(label) as usize,
        Variant::Untagged => usize::from(view.oracle.eval(x) != view.h0),
    };
    Ok((slot, x))
}

impl DoubleExtAdversary for DoubleExtStrategy {
    fn name(&self) -> &str {
        self.label()
    }

    fn wants_hint(&self) -> bool {
        matches!(self, Self::OracleCheat)
    }

    fn run(&self, view: &DoubleExtView<'_>, rng: &mut Stream) -> Result<(u64, u64)> {
        let mask = (1u64 << view.lambda_x) - 1;
        match self {
            Self::OracleCheat => view.hint.ok_or_else(|| GameError::Strategy("oracle-cheat needs the hint".into())),
            Self::MeasureAndGuess => {
                let (label, _) = view.state.measure_all(rng)?;
                let (slot, x) = read_label(view, label)?;
                let guess = rng.gen::<u64>() & mask;
                Ok(if slot == 0 { (x, guess) } else { (guess, x) })
            }
            Self::MeasuredTwice => {
                let (label, _) = view.state.measure_all(rng)?;
                let (_, x) = read_label(view, label)?;
                Ok((x, x))
            }
        }
    }

    fn win_probability(&self, view: &DoubleExtView<'_>, x0: u64, x1: u64) -> Result<Option<f64>> {
        let guess = 1.0 / (1u64 << view.lambda_x) as f64;
        let mut acc = 0.0;
        for (label, amp) in view.state.terms() {
            let p = amp.norm_sqr();
            let (slot, x) = read_label(view, label)?;
            acc += p * match self {
                Self::OracleCheat => 1.0,
                Self::MeasureAndGuess => {
                    let placed = if slot == 0 { x == x0 } else { x == x1 };
                    if placed {
                        guess
                    } else {
                        0.0
                    }
                }
                Self::MeasuredTwice => f64::from(u8::from(x == x0 && x == x1)),
            };
        }
        Ok(Some(acc))
    }
}

pub fn challenge_state(lambda_x: usize, variant: Variant, x0: u64, x1: u64, b: bool) -> Result<State> {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let s = if b { -amp } else { amp };
    let (layout, l0, l1) = match variant {
        Variant::Tagged => (
            RegisterLayout::new(&[(REG_B, 1), (REG_X, lambda_x)])?,
            x0 as u128,
            (1u128 << lambda_x) | x1 as u128,
        ),
        Variant::Untagged => (RegisterLayout::new(&[(REG_X, lambda_x)])?, x0 as u128, x1 as u128),
    };
    Ok(State::from_terms(layout, [(l0, Complex::new(amp, 0.0)), (l1, Complex::new(s, 0.0))])?)
}

/// Samples `x₀ ≠ x₁`, `b`, and a fresh oracle per trial.
pub fn run_double_extraction(
    adversary: &dyn DoubleExtAdversary,
    lambda_x: usize,
    variant: Variant,
    trials: usize,
    seed: u64,
) -> Result<GameStats> {
    if lambda_x == 0 || lambda_x > MAX_LAMBDA_X {
        return Err(GameError::Params(format!("lambda_x {lambda_x} outside 1..={MAX_LAMBDA_X}")));
    }
    let mask = (1u64 << lambda_x) - 1;
    let outcomes = run_trials(seed, "double-ext", trials, |_, rng| {
        let oracle = OracleTable::new(rng.gen(), lambda_x, HASH_OUT_BITS)?;
        let x0 = rng.gen::<u64>() & mask;
        let x1 = loop {
            let x = rng.gen::<u64>() & mask;
            if x != x0 {
                break x;
            }
        };
        let state = challenge_state(lambda_x, variant, x0, x1, rng.gen())?;
        let view = DoubleExtView {
            lambda_x,
            variant,
            state: &state,
            h0: oracle.eval(x0),
            h1: oracle.eval(x1),
            oracle: &oracle,
            hint: adversary.wants_hint().then_some((x0, x1)),
        };
        let prob = adversary.win_probability(&view, x0, x1)?;
        let (g0, g1) = adversary.run(&view, rng)?;
        Ok(TrialOutcome::new(g0 == x0 && g1 == x1, prob))
    })?;
    let p = params([
        ("lambda_x", lambda_x.into()),
        ("variant", serde_json::to_value(variant).expect("variant serializes")),
    ]);
    Ok(GameStats::from_outcomes("double-ext", adversary.name(), p, seed, outcomes))
}
