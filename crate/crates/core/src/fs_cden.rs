//! Fiat–Shamir with certified deniability.
//!
//! A proof is the superposition `Σ_{a∈A} (−1)^{a·s} |a⟩|s1^a, s2^a, s3^a⟩`
//! over a random subspace `A` of dimension `λ/2`, where each branch carries a
//! Schnorr transcript whose challenge is `H(a‖x‖s1)` and whose prover
//! randomness is `H(k‖a)`. Deletion hands the state back; the deletion key
//! uncomputes the transcripts and projects onto `|A_{0,s}⟩`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::f2lin::{sample_subspace, F2Error, F2Subspace, F2Vec};
use crate::qrom::{pack_fields, Oracle, OracleError, OracleSpec, OracleView};
use crate::rng::{stream, Stream};
use crate::sigma::{self, GroupParams, SigmaError, Transcript};
use crate::statevec::{RegisterLayout, StateError};
use crate::State;

/// Width of the randomness key `k` and the challenge key `k_ch`.
pub const KEY_BITS: usize = 16;
pub const MAX_LAMBDA: usize = 12;
/// Oracle shape used by the NIZK: 32-bit inputs, 16-bit outputs.
pub const NIZK_ORACLE_IN_BITS: usize = 32;
pub const NIZK_ORACLE_OUT_BITS: usize = 16;

pub const REG_A: &str = "A";
pub const REG_S1: &str = "S1";
pub const REG_S2: &str = "S2";
pub const REG_S3: &str = "S3";
/// Fresh register receiving the coherently computed verification predicate.
pub const REG_VERDICT: &str = "V";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FsError {
    #[error("lambda must be even and in 2..={MAX_LAMBDA}, got {0}")]
    Lambda(usize),
    #[error("certificate layout does not carry the proof registers")]
    LayoutMismatch,
    #[error("deletion key does not match lambda {0}")]
    KeyMismatch(usize),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error(transparent)]
    F2(#[from] F2Error),
}

/// A (possibly adversarial) proof: a state over `A, S1, S2, S3` for statement `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofState {
    pub state: State,
    pub x: u64,
}

/// Certificates are proof states handed back.
pub type CertState = ProofState;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FsDeletionKey {
    pub a: F2Subspace,
    pub s: F2Vec,
    pub k: u64,
    pub w: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimKeys {
    pub a: F2Subspace,
    pub s: F2Vec,
    pub k: u64,
    pub k_ch: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DelVerOutcome {
    pub accepted: bool,
    pub accept_prob: f64,
}

/// What an adversary hands back: the certificate plus a classical memo it keeps.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryOutput {
    pub cert: State,
    pub memo: Vec<u64>,
}

/// A scripted adversary in the deniability experiment.
pub trait NizkAdversary: Send + Sync {
    fn name(&self) -> &str;
    fn run(
        &self,
        scheme: &FsCden,
        proof: ProofState,
        oracle: &dyn Oracle,
        rng: &mut Stream,
    ) -> Result<AdversaryOutput, FsError>;
}

/// The built-in adversary menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Verifies, remembers the verdict, returns the proof as certificate.
    HonestDeleter,
    /// Measures `A` in the computational basis, remembers the outcome, returns the rest.
    MeasureOnePoint,
    /// Measures the whole proof, remembers it, returns all-zero registers.
    NonDeleting,
    /// Returns a uniformly random basis state.
    Garbage,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Self::HonestDeleter, Self::MeasureOnePoint, Self::NonDeleting, Self::Garbage];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.label() == s)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::HonestDeleter => "honest-deleter",
            Self::MeasureOnePoint => "measure-one-point",
            Self::NonDeleting => "non-deleting",
            Self::Garbage => "garbage",
        }
    }
}

impl NizkAdversary for Strategy {
    fn name(&self) -> &str {
        self.label()
    }

    fn run(
        &self,
        scheme: &FsCden,
        proof: ProofState,
        oracle: &dyn Oracle,
        rng: &mut Stream,
    ) -> Result<AdversaryOutput, FsError> {
        match self {
            Self::HonestDeleter => {
                let (p, post) = scheme.verify(&proof, oracle)?;
                let accepted = post.is_some() && rng.gen::<f64>() < p;
                let cert = if accepted { post.expect("accepted proofs have a post-state").state } else { proof.state };
                Ok(AdversaryOutput { cert, memo: vec![u64::from(accepted)] })
            }
            Self::MeasureOnePoint => {
                let m = proof.state.measure(REG_A, rng)?;
                Ok(AdversaryOutput { cert: m.post, memo: vec![m.outcome.value_u64()] })
            }
            Self::NonDeleting => {
                let (label, _) = proof.state.measure_all(rng)?;
                let memo = proof.state.layout().unpack(label).into_iter().map(|v| v as u64).collect();
                Ok(AdversaryOutput { cert: State::zero(scheme.layout()?), memo })
            }
            Self::Garbage => {
                let layout = scheme.layout()?;
                let label = rng.gen::<u128>() & ((1u128 << layout.total_width()) - 1);
                Ok(AdversaryOutput { cert: State::basis(layout, label)?, memo: Vec::new() })
            }
        }
    }
}

/// Outcome of one deniability experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub accepted: bool,
    pub accept_prob: f64,
    /// The adversary's memo as concatenated 16-digit hex words; `None` is ⊥.
    pub residual: Option<String>,
    pub lambda: usize,
    pub seed: u64,
    pub oracle_spec: OracleSpec,
}

fn memo_hex(memo: &[u64]) -> String {
    memo.iter().map(|m| format!("{m:016x}")).collect()
}

/// The construction at security parameter `lambda` over a Schnorr group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FsCden {
    pub group: GroupParams,
    pub lambda: usize,
}

impl FsCden {
    pub fn new(lambda: usize) -> Result<Self, FsError> {
        Self::with_group(GroupParams::default(), lambda)
    }

    pub fn with_group(group: GroupParams, lambda: usize) -> Result<Self, FsError> {
        if !(2..=MAX_LAMBDA).contains(&lambda) || !lambda.is_multiple_of(2) {
            return Err(FsError::Lambda(lambda));
        }
        group.validate()?;
        Ok(Self { group, lambda })
    }

    /// `A (λ) | S1 | S2 | S3`.
    pub fn layout(&self) -> Result<RegisterLayout, FsError> {
        let eb = self.group.elem_bits();
        let sb = self.group.scalar_bits();
        Ok(RegisterLayout::new(&[(REG_A, self.lambda), (REG_S1, eb), (REG_S2, sb), (REG_S3, sb)])?)
    }

    /// `H(a‖x‖s1) mod q`.
    pub fn challenge(&self, oracle: &dyn Oracle, a: u64, x: u64, s1: u64) -> Result<u64, FsError> {
        Ok(oracle.eval(self.challenge_input(oracle, a, x, s1)?) % self.group.q)
    }

    fn challenge_input(&self, oracle: &dyn Oracle, a: u64, x: u64, s1: u64) -> Result<u64, FsError> {
        let eb = self.group.elem_bits();
        Ok(pack_fields(oracle.in_bits(), &[(a, self.lambda), (x, eb), (s1, eb)])?)
    }

    /// Raw `H(key‖a)`.
    pub fn keyed(&self, oracle: &dyn Oracle, key: u64, a: u64) -> Result<u64, FsError> {
        Ok(oracle.eval_fields(&[(key, KEY_BITS), (a, self.lambda)])?)
    }

    /// The honest branch transcript `FS^{H(a‖·)}(x, w; H(k‖a))`.
    pub fn transcript(&self, oracle: &dyn Oracle, x: u64, w: u64, k: u64, a: u64) -> Result<Transcript, FsError> {
        let r = self.keyed(oracle, k, a)? % self.group.q;
        let s1 = sigma::p1(&self.group, r)?;
        let s2 = self.challenge(oracle, a, x, s1)?;
        Ok(Transcript { s1, s2, s3: sigma::p3(&self.group, w, r, s2)? })
    }

    /// The simulated branch transcript `S_Σ(x, H(k_ch‖a); H(k‖a))`.
    pub fn sim_transcript(&self, oracle: &dyn Oracle, x: u64, keys: &SimKeys, a: u64) -> Result<Transcript, FsError> {
        let s2 = self.keyed(oracle, keys.k_ch, a)? % self.group.q;
        let rand = self.keyed(oracle, keys.k, a)?;
        Ok(sigma::simulate(&self.group, x, s2, rand)?)
    }

    /// XORs `f(a)` into the transcript registers of every support term.
    fn xor_transcripts(
        &self,
        st: &State,
        f: impl Fn(u64) -> Result<Transcript, FsError>,
    ) -> Result<State, FsError> {
        let mut table = BTreeMap::new();
        for a in st.register_values(REG_A)? {
            table.insert(a, f(a as u64)?);
        }
        let st = st.apply_classical_isometry(&[REG_A], REG_S1, |v| table[&v[0]].s1 as u128)?;
        let st = st.apply_classical_isometry(&[REG_A], REG_S2, |v| table[&v[0]].s2 as u128)?;
        Ok(st.apply_classical_isometry(&[REG_A], REG_S3, |v| table[&v[0]].s3 as u128)?)
    }

    fn sample_coset<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(F2Subspace, F2Vec), FsError> {
        let a = sample_subspace(self.lambda, self.lambda / 2, rng)?;
        Ok((a, F2Vec::random(self.lambda, rng)))
    }

    fn check_witness(&self, x: u64, w: u64) -> Result<(), FsError> {
        if w >= self.group.q || self.group.pow(self.group.g, w) != x {
            return Err(SigmaError::BadWitness.into());
        }
        Ok(())
    }

    pub fn prove<R: Rng + ?Sized>(
        &self,
        oracle: &dyn Oracle,
        x: u64,
        w: u64,
        rng: &mut R,
    ) -> Result<(ProofState, FsDeletionKey), FsError> {
        self.check_witness(x, w)?;
        let (a, s) = self.sample_coset(rng)?;
        let dk = FsDeletionKey { a, s, k: rng.gen_range(0..1 << KEY_BITS), w };
        Ok((self.prove_with_key(oracle, x, &dk)?, dk))
    }

    /// Prove with the coset, phase and key fixed by `dk`.
    pub fn prove_with_key(&self, oracle: &dyn Oracle, x: u64, dk: &FsDeletionKey) -> Result<ProofState, FsError> {
        self.check_witness(x, dk.w)?;
        self.check_key(&dk.a, &dk.s)?;
        let coset = State::coset_state(REG_A, &dk.a, &dk.s, false)?;
        let st = self.attach_zero_transcripts(&coset)?;
        let st = self.xor_transcripts(&st, |a| self.transcript(oracle, x, dk.w, dk.k, a))?;
        Ok(ProofState { state: st, x })
    }

    fn attach_zero_transcripts(&self, coset: &State) -> Result<State, FsError> {
        let sig = RegisterLayout::new(&[
            (REG_S1, self.group.elem_bits()),
            (REG_S2, self.group.scalar_bits()),
            (REG_S3, self.group.scalar_bits()),
        ])?;
        Ok(coset.tensor(&State::zero(sig))?)
    }

    fn check_key(&self, a: &F2Subspace, s: &F2Vec) -> Result<(), FsError> {
        if a.ambient_dim() != self.lambda || a.dim() != self.lambda / 2 || s.len() != self.lambda {
            return Err(FsError::KeyMismatch(self.lambda));
        }
        Ok(())
    }

    fn check_layout(&self, st: &State) -> Result<(), FsError> {
        let want = self.layout()?;
        for (name, width) in want.registers() {
            if st.layout().width(name).ok() != Some(*width) {
                return Err(FsError::LayoutMismatch);
            }
        }
        Ok(())
    }

    /// `[s2 = H(a‖x‖s1) mod q] ∧ g^{s3} = s1·x^{s2}`.
    pub fn predicate(&self, oracle: &dyn Oracle, x: u64, a: u64, t: &Transcript) -> Result<bool, FsError> {
        Ok(t.s2 == self.challenge(oracle, a, x, t.s1)? && sigma::verify(&self.group, x, t))
    }

    /// Computes the predicate into a fresh verdict register.
    pub fn with_verdict(&self, pf: &ProofState, oracle: &dyn Oracle) -> Result<State, FsError> {
        self.check_layout(&pf.state)?;
        let mut verdicts = BTreeMap::new();
        let fields = [REG_A, REG_S1, REG_S2, REG_S3].map(|r| pf.state.field(r)).map(Result::unwrap);
        for (label, _) in pf.state.terms() {
            let [a, s1, s2, s3] = fields.map(|f| f.get(label) as u64);
            let ok = self.predicate(oracle, pf.x, a, &Transcript { s1, s2, s3 })?;
            verdicts.insert((a, s1, s2, s3), ok);
        }
        let st = pf.state.with_register(REG_VERDICT, 1)?;
        Ok(st.apply_classical_isometry(&[REG_A, REG_S1, REG_S2, REG_S3], REG_VERDICT, |v| {
            u128::from(verdicts[&(v[0] as u64, v[1] as u64, v[2] as u64, v[3] as u64)])
        })?)
    }

    /// Born probability of acceptance and the post-acceptance proof (predicate uncomputed).
    pub fn verify(&self, pf: &ProofState, oracle: &dyn Oracle) -> Result<(f64, Option<ProofState>), FsError> {
        let st = self.with_verdict(pf, oracle)?;
        let vf = st.field(REG_VERDICT)?;
        let total = st.norm_sqr();
        let accepted = st.filter(|l| vf.get(l) == 1);
        let p = accepted.norm_sqr() / total;
        if p <= 0.0 {
            return Ok((0.0, None));
        }
        let cleared = accepted.apply_permutation(|l| vf.set(l, 0))?.normalized()?;
        let (_, state) = cleared.remove_register(REG_VERDICT)?;
        Ok((p, Some(ProofState { state, x: pf.x })))
    }

    pub fn del(pf: ProofState) -> CertState {
        pf
    }

    /// Uncomputes `f`, rejects unless the transcript registers are zero,
    /// then projects `A` onto `|A_{0,s}⟩`. Returns the exact acceptance probability.
    fn certificate_probability(
        &self,
        cert: &State,
        a: &F2Subspace,
        s: &F2Vec,
        f: impl Fn(u64) -> Result<Transcript, FsError>,
    ) -> Result<f64, FsError> {
        self.check_layout(cert)?;
        self.check_key(a, s)?;
        let total = cert.norm_sqr();
        if total <= 0.0 {
            return Err(StateError::ZeroNorm.into());
        }
        let st = self.xor_transcripts(cert, f)?;
        let sig = [REG_S1, REG_S2, REG_S3].map(|r| st.field(r)).map(Result::unwrap);
        let zeroed = st.filter(|l| sig.iter().all(|f| f.get(l) == 0));
        let kept = zeroed.norm_sqr();
        if kept <= 0.0 {
            return Ok(0.0);
        }
        let (p, _) = zeroed.subspace_pvm(REG_A, a, s)?;
        Ok(p * kept / total)
    }

    pub fn delver<R: Rng + ?Sized>(
        &self,
        oracle: &dyn Oracle,
        dk: &FsDeletionKey,
        cert: &CertState,
        rng: &mut R,
    ) -> Result<DelVerOutcome, FsError> {
        let p = self.delver_probability(oracle, dk, cert)?;
        Ok(DelVerOutcome { accepted: rng.gen::<f64>() < p, accept_prob: p })
    }

    pub fn delver_probability(&self, oracle: &dyn Oracle, dk: &FsDeletionKey, cert: &CertState) -> Result<f64, FsError> {
        self.certificate_probability(&cert.state, &dk.a, &dk.s, |a| self.transcript(oracle, cert.x, dk.w, dk.k, a))
    }

    /// Samples `(A, s, k, k_ch)` with `k_ch ≠ k`.
    pub fn sim_keys<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimKeys, FsError> {
        let (a, s) = self.sample_coset(rng)?;
        let k = rng.gen_range(0..1 << KEY_BITS);
        let k_ch = loop {
            let c = rng.gen_range(0..1 << KEY_BITS);
            if c != k {
                break c;
            }
        };
        Ok(SimKeys { a, s, k, k_ch })
    }

    /// `Σ_{a∈A∖{0}} (−1)^{a·s} |a⟩|S_Σ(x, H(k_ch‖a); H(k‖a))⟩`.
    pub fn sim_proof(&self, oracle: &dyn Oracle, x: u64, keys: &SimKeys) -> Result<ProofState, FsError> {
        self.check_key(&keys.a, &keys.s)?;
        let coset = State::coset_state(REG_A, &keys.a, &keys.s, true)?;
        let st = self.attach_zero_transcripts(&coset)?;
        let st = self.xor_transcripts(&st, |a| self.sim_transcript(oracle, x, keys, a))?;
        Ok(ProofState { state: st, x })
    }

    /// `H′(a‖x‖s̃1^a) = H(k_ch‖a)` for `a ∈ A∖{0}`; `H` elsewhere.
    pub fn sim_oracle(&self, oracle: &OracleView, keys: &SimKeys, x: u64) -> Result<OracleView, FsError> {
        Ok(oracle.point_map(self.sim_oracle_entries(oracle, keys, x)?)?)
    }

    /// The `(input, output)` pairs reprogrammed by [`Self::sim_oracle`].
    pub fn sim_oracle_entries(&self, oracle: &dyn Oracle, keys: &SimKeys, x: u64) -> Result<Vec<(u64, u64)>, FsError> {
        let mut entries = Vec::new();
        for e in keys.a.enumerate()?.into_iter().filter(|e| !e.is_zero()) {
            let a = e.value_u64();
            let t = self.sim_transcript(oracle, x, keys, a)?;
            entries.push((self.challenge_input(oracle, a, x, t.s1)?, self.keyed(oracle, keys.k_ch, a)?));
        }
        Ok(entries)
    }

    pub fn sim_delver_probability(
        &self,
        oracle: &dyn Oracle,
        keys: &SimKeys,
        cert: &CertState,
    ) -> Result<f64, FsError> {
        self.certificate_probability(&cert.state, &keys.a, &keys.s, |a| self.sim_transcript(oracle, cert.x, keys, a))
    }

    /// The simulator: simulated proof, reprogrammed oracle, simulated uncompute.
    pub fn simulate_experiment(
        &self,
        oracle: &OracleView,
        x: u64,
        adversary: &dyn NizkAdversary,
        seed: u64,
    ) -> Result<ExperimentRecord, FsError> {
        let mut rng = stream(seed);
        let keys = self.sim_keys(&mut rng)?;
        let pf = self.sim_proof(oracle, x, &keys)?;
        let h_prime = self.sim_oracle(oracle, &keys, x)?;
        let out = adversary.run(self, pf, &h_prime, &mut rng)?;
        let cert = ProofState { state: out.cert, x };
        let p = self.sim_delver_probability(oracle, &keys, &cert)?;
        Ok(self.record(p, &out.memo, seed, h_prime.spec(), &mut rng))
    }

    /// The real experiment: honest proof, true oracle, honest deletion check.
    pub fn nizk_real_experiment(
        &self,
        oracle: &OracleView,
        x: u64,
        w: u64,
        adversary: &dyn NizkAdversary,
        seed: u64,
    ) -> Result<ExperimentRecord, FsError> {
        let mut rng = stream(seed);
        let (pf, dk) = self.prove(oracle, x, w, &mut rng)?;
        let out = adversary.run(self, pf, oracle, &mut rng)?;
        let cert = ProofState { state: out.cert, x };
        let p = self.delver_probability(oracle, &dk, &cert)?;
        Ok(self.record(p, &out.memo, seed, oracle.spec(), &mut rng))
    }

    pub(crate) fn record(&self, p: f64, memo: &[u64], seed: u64, oracle_spec: OracleSpec, rng: &mut Stream) -> ExperimentRecord {
        let accepted = rng.gen::<f64>() < p;
        ExperimentRecord {
            accepted,
            accept_prob: p,
            residual: accepted.then(|| memo_hex(memo)),
            lambda: self.lambda,
            seed,
            oracle_spec,
        }
    }
}

#[cfg(test)]
mod tests;
