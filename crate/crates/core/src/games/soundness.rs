//! Verifier soundness: the adversary holds one signature on `m_dummy`
//! (whose format reveals the signing secrets) and must get a verifier to
//! accept some other message. Also a handful of scripted runs of the
//! many-time deletion game with small counts.

use rand::Rng;
use serde::Serialize;

use crate::rng::{subseed, Stream};
use crate::sig_cden::mult::{DelVerVerdict, MultScheme, MultSignature, MultSigningKey};
use crate::sig_cden::ot::{OtParams, OtScheme, OtSignature, M_DUMMY};
use crate::sigma::{DsSigningKey, DsVerifyKey};

use super::{params, run_trials, GameError, GameStats, Result, TrialOutcome};

/// A voided trial is redrawn at most this many times.
pub const MAX_REDRAWS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SoundScheme {
    Ot,
    Mult,
}

impl SoundScheme {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ot => "ot",
            Self::Mult => "mult",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Ot, Self::Mult].into_iter().find(|x| x.label() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SchemeKey {
    Ot(DsSigningKey),
    Mult(MultSigningKey),
}

impl SchemeKey {
    pub fn vk(&self) -> &DsVerifyKey {
        match self {
            Self::Ot(sk) => &sk.vk,
            Self::Mult(sk) => sk.vk(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignedObject {
    Ot(OtSignature),
    Mult(MultSignature),
}

/// The scheme under test, shared by challenger, adversary and verifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SoundnessSetup {
    pub scheme: SoundScheme,
    pub ot: OtScheme,
}

impl SoundnessSetup {
    pub fn new(scheme: SoundScheme, params: OtParams, seed: u64) -> Result<Self> {
        Ok(Self { scheme, ot: OtScheme::new(params, subseed(seed, "soundness/hash"))? })
    }

    pub fn gen<R: Rng + ?Sized>(&self, rng: &mut R) -> SchemeKey {
        match self.scheme {
            SoundScheme::Ot => SchemeKey::Ot(self.ot.gen(rng)),
            SoundScheme::Mult => SchemeKey::Mult(MultScheme::new(self.ot).gen(rng)),
        }
    }

    pub fn sign<R: Rng + ?Sized>(&self, sk: &SchemeKey, m: u64, rng: &mut R) -> Result<SignedObject> {
        Ok(match sk {
            SchemeKey::Ot(sk) => SignedObject::Ot(self.ot.sign(sk, m, rng)?.0),
            SchemeKey::Mult(sk) => SignedObject::Mult(MultScheme::new(self.ot).sign(sk, m, rng)?),
        })
    }

    /// Acceptance probability of the scheme's own `Verify`.
    pub fn verify(&self, vk: &DsVerifyKey, m: u64, obj: &SignedObject) -> Result<f64> {
        Ok(match obj {
            SignedObject::Ot(sig) => self.ot.verify(vk, m, sig)?.accept_prob,
            SignedObject::Mult(sig) => MultScheme::new(self.ot).verify(vk, m, sig)?,
        })
    }
}

pub struct ForgeView<'a> {
    pub setup: &'a SoundnessSetup,
    pub vk: &'a DsVerifyKey,
    pub dummy: &'a SignedObject,
    /// The signing key, only for strategies that ask for it.
    pub sk: Option<&'a SchemeKey>,
}

pub trait SoundnessAdversary: Send + Sync {
    fn name(&self) -> &str;
    fn wants_sk(&self) -> bool {
        false
    }
    fn run(&self, view: &ForgeView<'_>, rng: &mut Stream) -> Result<(u64, SignedObject)>;
}

pub trait SoundnessVerifier: Send + Sync {
    fn name(&self) -> &str;
    fn accept_probability(&self, setup: &SoundnessSetup, vk: &DsVerifyKey, m: u64, obj: &SignedObject) -> Result<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForgerStrategy {
    /// Submits the `m_dummy` signature unchanged under message 1.
    Replay,
    /// Handed the signing key; signs message 1 honestly.
    OracleCheat,
}

impl ForgerStrategy {
    pub const ALL: [ForgerStrategy; 2] = [Self::Replay, Self::OracleCheat];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Replay => "replay",
            Self::OracleCheat => "oracle-cheat",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.label() == s)
    }
}

impl SoundnessAdversary for ForgerStrategy {
    fn name(&self) -> &str {
        self.label()
    }

    fn wants_sk(&self) -> bool {
        matches!(self, Self::OracleCheat)
    }

    fn run(&self, view: &ForgeView<'_>, rng: &mut Stream) -> Result<(u64, SignedObject)> {
        match self {
            Self::Replay => Ok((1, view.dummy.clone())),
            Self::OracleCheat => {
                let sk = view.sk.ok_or_else(|| GameError::Strategy("oracle-cheat needs the signing key".into()))?;
                Ok((1, view.setup.sign(sk, 1, rng)?))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifierStrategy {
    HonestVerify,
    AlwaysAccept,
}

impl VerifierStrategy {
    pub const ALL: [VerifierStrategy; 2] = [Self::HonestVerify, Self::AlwaysAccept];

    pub fn label(&self) -> &'static str {
        match self {
            Self::HonestVerify => "honest-verify",
            Self::AlwaysAccept => "always-accept",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.label() == s)
    }
}

impl SoundnessVerifier for VerifierStrategy {
    fn name(&self) -> &str {
        self.label()
    }

    fn accept_probability(&self, setup: &SoundnessSetup, vk: &DsVerifyKey, m: u64, obj: &SignedObject) -> Result<f64> {
        match self {
            Self::HonestVerify => setup.verify(vk, m, obj),
            Self::AlwaysAccept => Ok(1.0),
        }
    }
}

/// Trials where the adversary names `m_dummy` are voided and redrawn.
pub fn run_soundness_game(
    verifier: &dyn SoundnessVerifier,
    adversary: &dyn SoundnessAdversary,
    setup: &SoundnessSetup,
    trials: usize,
    seed: u64,
) -> Result<GameStats> {
    let outcomes = run_trials(seed, "soundness", trials, |_, rng| {
        for _ in 0..MAX_REDRAWS {
            let sk = setup.gen(rng);
            let dummy = setup.sign(&sk, M_DUMMY, rng)?;
            let view = ForgeView { setup, vk: sk.vk(), dummy: &dummy, sk: adversary.wants_sk().then_some(&sk) };
            let (m, obj) = adversary.run(&view, rng)?;
            if m == M_DUMMY {
                continue;
            }
            let p = verifier.accept_probability(setup, sk.vk(), m, &obj)?;
            return Ok(TrialOutcome::new(rng.gen::<f64>() < p, Some(p)));
        }
        Err(GameError::Strategy(format!("adversary named m_dummy {MAX_REDRAWS} times in a row")))
    })?;
    let p = params([
        ("scheme", setup.scheme.label().into()),
        ("verifier", verifier.name().into()),
        ("lambda_x", setup.ot.params.lambda_x.into()),
        ("ell", setup.ot.params.ell.into()),
    ]);
    Ok(GameStats::from_outcomes("soundness", adversary.name(), p, seed, outcomes))
}

/// Scripted runs of the many-time deletion game on the upgraded scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountScenario {
    /// One signature, deleted honestly (`k₁ = 1, k₂ = 0`).
    DeleteOne,
    /// Two signatures, both deleted honestly (`k₁ = 2, k₂ = 0`).
    DeleteBoth,
    /// Deletes the first, re-submits the second as a forgery on its own message (`k₁ = 1, k₂ = 1`).
    DeleteOneKeepOther,
    /// Measures the first signature, deletes from the collapsed copy, and
    /// submits the collapsed copy as a forgery on the first message (`k₁ = 1, k₂ = 1`).
    MeasureThenDelete,
}

impl CountScenario {
    pub const ALL: [CountScenario; 4] =
        [Self::DeleteOne, Self::DeleteBoth, Self::DeleteOneKeepOther, Self::MeasureThenDelete];

    pub fn label(&self) -> &'static str {
        match self {
            Self::DeleteOne => "delete-one",
            Self::DeleteBoth => "delete-both",
            Self::DeleteOneKeepOther => "delete-one-keep-other",
            Self::MeasureThenDelete => "measure-then-delete",
        }
    }

    /// `(k₁, k₂)`.
    pub fn counts(&self) -> (usize, usize) {
        match self {
            Self::DeleteOne => (1, 0),
            Self::DeleteBoth => (2, 0),
            Self::DeleteOneKeepOther | Self::MeasureThenDelete => (1, 1),
        }
    }
}

/// The challenger of the many-time game with the honest verifier as `AdvVer`.
pub fn run_count_scenario(scenario: CountScenario, params_ot: OtParams, trials: usize, seed: u64) -> Result<GameStats> {
    let scheme = MultScheme::new(OtScheme::new(params_ot, subseed(seed, "count-game/hash"))?);
    let outcomes = run_trials(seed, scenario.label(), trials, |_, rng| {
        let sk = scheme.gen(rng);
        let (m1, m2) = (1u64, 2u64);
        let s1 = scheme.sign(&sk, m1, rng)?;
        let mut list = vec![m1];
        let mut deletions = Vec::new();
        let mut forgeries = Vec::new();
        let mut prob = None;
        match scenario {
            CountScenario::DeleteOne => deletions.push((m1, scheme.del(&s1, rng)?)),
            CountScenario::DeleteBoth => {
                let s2 = scheme.sign(&sk, m2, rng)?;
                list.push(m2);
                deletions.push((m1, scheme.del(&s1, rng)?));
                deletions.push((m2, scheme.del(&s2, rng)?));
            }
            CountScenario::DeleteOneKeepOther => {
                let s2 = scheme.sign(&sk, m2, rng)?;
                list.push(m2);
                deletions.push((m1, scheme.del(&s1, rng)?));
                forgeries.push((m2, s2));
                prob = Some(0.0);
            }
            CountScenario::MeasureThenDelete => {
                // The second signature is kept, neither deleted nor forged.
                scheme.sign(&sk, m2, rng)?;
                list.push(m2);
                let mut collapsed = s1.clone();
                for st in &mut collapsed.sig.states {
                    let (label, _) = st.measure_all(rng)?;
                    *st = crate::State::basis(st.layout().clone(), label)?;
                }
                deletions.push((m1, scheme.del(&collapsed, rng)?));
                forgeries.push((m1, collapsed));
                // Each index of a collapsed state passes its parity check with probability 1/2.
                prob = Some(0.5f64.powi(params_ot.ell as i32));
            }
        }
        for (m, cert) in &deletions {
            if scheme.delver(&sk, cert) != DelVerVerdict::Accept {
                return Ok(TrialOutcome::new(false, prob));
            }
            list.retain(|x| x != m);
        }
        for (m, sig) in &forgeries {
            let p = scheme.verify(sk.vk(), *m, sig)?;
            if rng.gen::<f64>() >= p {
                return Ok(TrialOutcome::new(false, prob));
            }
        }
        let fresh = forgeries.iter().any(|(m, _)| !list.contains(m));
        Ok(TrialOutcome::new(fresh, prob.or(Some(0.0))))
    })?;
    let (k1, k2) = scenario.counts();
    let p = params([
        ("k1", k1.into()),
        ("k2", k2.into()),
        ("lambda_x", params_ot.lambda_x.into()),
        ("ell", params_ot.ell.into()),
    ]);
    Ok(GameStats::from_outcomes("count-game", scenario.label(), p, seed, outcomes))
}
