//! The adaptive classical deletion game.
//!
//! For each of `reps` indices the challenger samples `x⁰ ≠ x¹` and a bit `c`
//! and hands over `(|x⁰⟩ + (−1)^c|x¹⟩)/√2`. The adversary answers with a
//! function `f` (as a truth table) and strings `y, d¹, d²`; index `i` passes
//! when `y ∈ {x⁰, x¹}` and `c = d¹·(x⁰⊕x¹) ⊕ d²·(f(x⁰)⊕f(x¹))`.

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::rng::Stream;
use crate::statevec::RegisterLayout;
use crate::State;

use super::{params, run_trials, GameError, GameStats, Result, TrialOutcome};

pub const REG_X: &str = "X";
/// Truth tables have `2^λx` entries, so λx stays small.
pub const MAX_LAMBDA_X: usize = 12;
pub const MAX_REPS: usize = 16;

/// When the strategy fixes its functions `f_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChoiceMode {
    /// Chosen before looking at the states.
    PreCommitted,
    /// Chosen after operating on the states.
    PostState,
}

/// The challenger's secrets for one index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AdpHidden {
    pub x0: u64,
    pub x1: u64,
    pub c: bool,
}

/// What the adversary sees.
pub struct AdpView<'a> {
    pub lambda_x: usize,
    pub states: &'a [State],
    /// The hidden values; only handed to strategies that ask for them.
    pub hint: Option<&'a [AdpHidden]>,
}

/// The adversary's answer for one index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdpIndexOutput {
    /// Truth table of `f: {0,1}^λx → {0,1}^f_bits`.
    pub f: Vec<u64>,
    pub f_bits: usize,
    pub y: u64,
    pub d1: u64,
    pub d2: u64,
}

impl AdpIndexOutput {
    fn constant(y: u64, d1: u64, d2: u64, lambda_x: usize) -> Self {
        Self { f: vec![0; 1 << lambda_x], f_bits: 1, y, d1, d2 }
    }
}

pub trait AdpAdversary: Send + Sync {
    fn name(&self) -> &str;
    fn mode(&self) -> ChoiceMode;
    fn wants_hint(&self) -> bool {
        false
    }
    fn run(&self, view: &AdpView<'_>, rng: &mut Stream) -> Result<Vec<AdpIndexOutput>>;
    /// Probability, over the strategy's own measurements and coins, that it
    /// wins against `hidden`.
    fn win_probability(&self, _view: &AdpView<'_>, _hidden: &[AdpHidden]) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// Scripted strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdpStrategy {
    /// Reads the hidden values and answers correctly.
    OracleCheat,
    /// Measures each index in the computational basis for `y`, then measures
    /// the collapsed state in the Hadamard basis for `d¹`; `f` is constant.
    Computational,
    /// Measures each index in the Hadamard basis for `d¹` with `f` the
    /// identity and `d² = 0`, and guesses `y` uniformly.
    Hadamard,
}

impl AdpStrategy {
    pub const ALL: [AdpStrategy; 3] = [Self::OracleCheat, Self::Computational, Self::Hadamard];

    pub fn label(&self) -> &'static str {
        match self {
            Self::OracleCheat => "oracle-cheat",
            Self::Computational => "computational",
            Self::Hadamard => "hadamard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.label() == s)
    }
}

fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

/// Probability that a Hadamard-basis measurement of `st` gives `d` with `d·δ = c`.
fn hadamard_parity_probability(st: &State, delta: u64, c: bool) -> Result<f64> {
    let probs = st.hadamard(REG_X)?.outcome_probabilities(REG_X)?;
    Ok(probs.into_iter().filter(|(d, _)| parity(*d as u64 & delta) == c).map(|(_, p)| p).sum())
}

impl AdpAdversary for AdpStrategy {
    fn name(&self) -> &str {
        self.label()
    }

    fn mode(&self) -> ChoiceMode {
        match self {
            Self::Computational => ChoiceMode::PostState,
            Self::OracleCheat | Self::Hadamard => ChoiceMode::PreCommitted,
        }
    }

    fn wants_hint(&self) -> bool {
        matches!(self, Self::OracleCheat)
    }

    fn run(&self, view: &AdpView<'_>, rng: &mut Stream) -> Result<Vec<AdpIndexOutput>> {
        let lx = view.lambda_x;
        let mask = (1u64 << lx) - 1;
        match self {
            Self::OracleCheat => {
                let hint = view.hint.ok_or_else(|| GameError::Strategy("oracle-cheat needs the hint".into()))?;
                Ok(hint
                    .iter()
                    .map(|h| {
                        let delta = h.x0 ^ h.x1;
                        let d1 = if h.c { 1 << delta.trailing_zeros() } else { 0 };
                        AdpIndexOutput::constant(h.x0, d1, 0, lx)
                    })
                    .collect())
            }
            Self::Computational => view
                .states
                .iter()
                .map(|st| {
                    let m = st.measure(REG_X, rng)?;
                    let d1 = m.post.measure_hadamard_basis(rng)? as u64;
                    Ok(AdpIndexOutput::constant(m.outcome.value_u64(), d1, rng.gen::<u64>() & 1, lx))
                })
                .collect(),
            Self::Hadamard => view
                .states
                .iter()
                .map(|st| {
                    let d1 = st.measure_hadamard_basis(rng)? as u64;
                    let y = rng.gen::<u64>() & mask;
                    Ok(AdpIndexOutput { f: (0..1u64 << lx).collect(), f_bits: lx, y, d1, d2: 0 })
                })
                .collect(),
        }
    }

    fn win_probability(&self, view: &AdpView<'_>, hidden: &[AdpHidden]) -> Result<Option<f64>> {
        let mut total = 1.0;
        for (st, h) in view.states.iter().zip(hidden) {
            let delta = h.x0 ^ h.x1;
            let p = match self {
                Self::OracleCheat => 1.0,
                Self::Computational => {
                    let mut acc = 0.0;
                    for (y, py) in st.outcome_probabilities(REG_X)? {
                        if y as u64 == h.x0 || y as u64 == h.x1 {
                            let collapsed = State::basis(st.layout().clone(), y)?;
                            acc += py * hadamard_parity_probability(&collapsed, delta, h.c)?;
                        }
                    }
                    acc
                }
                Self::Hadamard => {
                    // f is the identity and d² = 0, so only d¹ matters.
                    hadamard_parity_probability(st, delta, h.c)? * 2.0 / (1u64 << view.lambda_x) as f64
                }
            };
            total *= p;
        }
        Ok(Some(total))
    }
}

/// `(|x⁰⟩ + (−1)^c|x¹⟩)/√2` on a `λx`-bit register.
pub fn index_state(lambda_x: usize, h: &AdpHidden) -> Result<State> {
    let layout = RegisterLayout::new(&[(REG_X, lambda_x)])?;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if h.c { -amp } else { amp };
    Ok(State::from_terms(
        layout,
        [(h.x0 as u128, Complex::new(amp, 0.0)), (h.x1 as u128, Complex::new(sign, 0.0))],
    )?)
}

/// Samples `x⁰ ≠ x¹` and `c`.
pub fn sample_hidden<R: Rng + ?Sized>(lambda_x: usize, rng: &mut R) -> AdpHidden {
    let mask = (1u64 << lambda_x) - 1;
    let x0 = rng.gen::<u64>() & mask;
    let x1 = loop {
        let x = rng.gen::<u64>() & mask;
        if x != x0 {
            break x;
        }
    };
    AdpHidden { x0, x1, c: rng.gen() }
}

/// The challenger's check for one index.
pub fn index_passes(lambda_x: usize, h: &AdpHidden, out: &AdpIndexOutput) -> Result<bool> {
    let wide = |v: u64, bits: usize| bits < 64 && v >> bits != 0;
    if out.f.len() != 1 << lambda_x {
        return Err(GameError::Strategy(format!("truth table has {} entries, expected {}", out.f.len(), 1u64 << lambda_x)));
    }
    if out.f_bits == 0 || out.f_bits > 64 || out.f.iter().any(|&v| wide(v, out.f_bits)) {
        return Err(GameError::Strategy(format!("truth table values exceed {} bits", out.f_bits)));
    }
    if wide(out.y, lambda_x) || wide(out.d1, lambda_x) || wide(out.d2, out.f_bits) {
        return Err(GameError::Strategy("answer wider than its register".into()));
    }
    let fd = out.f[h.x0 as usize] ^ out.f[h.x1 as usize];
    let membership = out.y == h.x0 || out.y == h.x1;
    Ok(membership && (parity(out.d1 & (h.x0 ^ h.x1)) ^ parity(out.d2 & fd)) == h.c)
}

pub fn run_adp_del(
    adversary: &dyn AdpAdversary,
    lambda_x: usize,
    reps: usize,
    trials: usize,
    seed: u64,
) -> Result<GameStats> {
    if lambda_x == 0 || lambda_x > MAX_LAMBDA_X {
        return Err(GameError::Params(format!("lambda_x {lambda_x} outside 1..={MAX_LAMBDA_X}")));
    }
    if reps == 0 || reps > MAX_REPS {
        return Err(GameError::Params(format!("reps {reps} outside 1..={MAX_REPS}")));
    }
    let outcomes = run_trials(seed, "adp-del", trials, |_, rng| {
        let hidden: Vec<AdpHidden> = (0..reps).map(|_| sample_hidden(lambda_x, rng)).collect();
        let states = hidden.iter().map(|h| index_state(lambda_x, h)).collect::<Result<Vec<_>>>()?;
        let view = AdpView { lambda_x, states: &states, hint: adversary.wants_hint().then_some(hidden.as_slice()) };
        let prob = adversary.win_probability(&view, &hidden)?;
        let outputs = adversary.run(&view, rng)?;
        if outputs.len() != reps {
            return Err(GameError::Strategy(format!("{} answers for {reps} indices", outputs.len())));
        }
        let mut win = true;
        for (h, out) in hidden.iter().zip(&outputs) {
            win &= index_passes(lambda_x, h, out)?;
        }
        Ok(TrialOutcome::new(win, prob))
    })?;
    let p = params([
        ("lambda_x", lambda_x.into()),
        ("reps", reps.into()),
        ("mode", serde_json::to_value(adversary.mode()).expect("mode serializes")),
    ]);
    Ok(GameStats::from_outcomes("adp-del", adversary.name(), p, seed, outcomes))
}
