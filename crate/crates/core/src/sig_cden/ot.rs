//! One-time signatures with classical deletion certificates.
//!
//! Per index `i` the signature holds `|x_i⁰⟩|σ_i⁰⟩ + (−1)^{c_i}|x_i¹⟩|σ_i¹⟩`
//! with `σ_i^b = DS.Sign(sk, H(x_i^b‖m_i‖i))` for additive shares `m_i` of
//! `m`. A Hadamard-basis measurement yields `(d¹, d²)` with
//! `d¹·(x⁰⊕x¹) ⊕ d²·(σ⁰⊕σ¹) = c`.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qrom::{Oracle, OracleTable};
use crate::sigma::{DsSigningKey, DsVerifyKey, GroupParams};
use crate::statevec::RegisterLayout;
use crate::State;

use super::{check_message, SigError};

pub const REG_X: &str = "X";
pub const REG_S: &str = "S";
/// Output width of the per-index hash whose value DS signs.
pub const OT_HASH_OUT_BITS: usize = 16;
pub const MAX_LAMBDA_X: usize = 16;
pub const MAX_SHARE_BITS: usize = 16;
pub const MAX_INDICES: usize = 64;
/// The distinguished message whose signature reveals its secrets.
pub const M_DUMMY: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtParams {
    pub lambda_x: usize,
    pub share_bits: usize,
    pub ell: usize,
}

impl Default for OtParams {
    fn default() -> Self {
        Self { lambda_x: 8, share_bits: 8, ell: 8 }
    }
}

impl OtParams {
    pub fn validate(&self) -> Result<(), SigError> {
        if self.lambda_x == 0 || self.lambda_x > MAX_LAMBDA_X {
            return Err(SigError::Params(format!("lambda_x {} not in 1..={MAX_LAMBDA_X}", self.lambda_x)));
        }
        if self.share_bits == 0 || self.share_bits > MAX_SHARE_BITS {
            return Err(SigError::Params(format!("share width {} not in 1..={MAX_SHARE_BITS}", self.share_bits)));
        }
        if self.ell == 0 || self.ell > MAX_INDICES {
            return Err(SigError::Params(format!("ell {} not in 1..={MAX_INDICES}", self.ell)));
        }
        Ok(())
    }

    /// `⌈log₂ ℓ⌉`.
    pub fn index_bits(&self) -> usize {
        (usize::BITS - (self.ell - 1).leading_zeros()) as usize
    }

    pub fn hash_in_bits(&self) -> usize {
        self.lambda_x + self.share_bits + self.index_bits()
    }
}

/// Per-index secrets of one deletion key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtKeyEntry {
    #[serde(with = "super::hex")]
    pub a1: u64,
    #[serde(with = "super::hex")]
    pub a2: u64,
    pub c: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtDeletionKey {
    pub entries: Vec<OtKeyEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtCertEntry {
    #[serde(with = "super::hex")]
    pub d1: u64,
    #[serde(with = "super::hex")]
    pub d2: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtCertificate {
    pub entries: Vec<OtCertEntry>,
}

/// What a signature on `m_dummy` additionally reveals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DummyReveal {
    #[serde(with = "super::hex::vec")]
    pub x0: Vec<u64>,
    #[serde(with = "super::hex::vec")]
    pub x1: Vec<u64>,
    pub dk: OtDeletionKey,
}

/// Index-factored signature state: `states[i]` lives on `X (λx) | S`.
#[derive(Clone, Debug, PartialEq)]
pub struct OtSignature {
    pub states: Vec<State>,
    pub shares: Vec<u64>,
    pub reveal: Option<DummyReveal>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OtVerifyOutcome {
    pub accept_prob: f64,
    /// Per-index acceptance probabilities (empty when the shares do not sum to `m`).
    pub per_index: Vec<f64>,
    /// The signature conditioned on acceptance.
    pub post: Option<OtSignature>,
}

/// The scheme: parameters, the DS group, and the public hash `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtScheme {
    pub params: OtParams,
    pub group: GroupParams,
    pub hash: OracleTable,
}

impl OtScheme {
    pub fn new(params: OtParams, hash_seed: u64) -> Result<Self, SigError> {
        params.validate()?;
        let hash = OracleTable::new(hash_seed, params.hash_in_bits(), OT_HASH_OUT_BITS)?;
        Ok(Self { params, group: GroupParams::default(), hash })
    }

    pub fn gen<R: Rng + ?Sized>(&self, rng: &mut R) -> DsSigningKey {
        DsSigningKey::generate(self.group, OT_HASH_OUT_BITS, rng)
    }

    pub fn sig_bits(&self) -> usize {
        self.group.elem_bits() + self.group.scalar_bits()
    }

    pub fn layout(&self) -> RegisterLayout {
        RegisterLayout::new(&[(REG_X, self.params.lambda_x), (REG_S, self.sig_bits())]).expect("widths are capped")
    }

    /// `H(x‖m_i‖i)`.
    pub fn digest(&self, x: u64, share: u64, index: usize) -> Result<u64, SigError> {
        let p = &self.params;
        Ok(self.hash.eval_fields(&[(x, p.lambda_x), (share, p.share_bits), (index as u64, p.index_bits())])?)
    }

    pub fn sign<R: Rng + ?Sized>(
        &self,
        sk: &DsSigningKey,
        m: u64,
        rng: &mut R,
    ) -> Result<(OtSignature, OtDeletionKey), SigError> {
        let p = &self.params;
        check_message(m, p.share_bits)?;
        let lx_mask = (1u64 << p.lambda_x) - 1;
        let mut xs = Vec::with_capacity(p.ell);
        let mut cs = Vec::with_capacity(p.ell);
        for _ in 0..p.ell {
            let x0 = rng.gen::<u64>() & lx_mask;
            let x1 = loop {
                let x = rng.gen::<u64>() & lx_mask;
                if x != x0 {
                    break x;
                }
            };
            xs.push((x0, x1));
            cs.push(rng.gen::<bool>());
        }
        let share_mask = (1u64 << p.share_bits) - 1;
        let mut shares: Vec<u64> = (0..p.ell - 1).map(|_| rng.gen::<u64>() & share_mask).collect();
        shares.push(shares.iter().fold(m, |acc, s| acc ^ s));

        let sb = self.sig_bits();
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let mut states = Vec::with_capacity(p.ell);
        let mut entries = Vec::with_capacity(p.ell);
        for i in 0..p.ell {
            let (x0, x1) = xs[i];
            let sign_of = |x: u64| -> Result<u64, SigError> { Ok(sk.sign(self.digest(x, shares[i], i)?)?) };
            let (s0, s1) = (sign_of(x0)?, sign_of(x1)?);
            let phase = if cs[i] { -amp } else { amp };
            let xreg = State::from_terms(
                self.layout(),
                [((x0 as u128) << sb, Complex::new(amp, 0.0)), ((x1 as u128) << sb, Complex::new(phase, 0.0))],
            )?;
            let st = xreg.apply_classical_isometry(&[REG_X], REG_S, |v| {
                u128::from(if v[0] as u64 == x0 { s0 } else { s1 })
            })?;
            states.push(st);
            entries.push(OtKeyEntry { a1: x0 ^ x1, a2: s0 ^ s1, c: cs[i] });
        }
        let dk = OtDeletionKey { entries };
        let reveal = (m == M_DUMMY).then(|| DummyReveal {
            x0: xs.iter().map(|x| x.0).collect(),
            x1: xs.iter().map(|x| x.1).collect(),
            dk: dk.clone(),
        });
        Ok((OtSignature { states, shares, reveal }, dk))
    }

    /// `DS.Verify(vk, H(x‖m_i‖i), σ)` on one basis label of index `i`.
    fn branch_ok(&self, vk: &DsVerifyKey, share: u64, index: usize, label: u128) -> bool {
        let sb = self.sig_bits();
        let x = (label >> sb) as u64;
        let sig = (label & ((1u128 << sb) - 1)) as u64;
        self.digest(x, share, index).map(|h| vk.verify(h, sig)).unwrap_or(false)
    }

    pub fn verify(&self, vk: &DsVerifyKey, m: u64, sig: &OtSignature) -> Result<OtVerifyOutcome, SigError> {
        let ell = self.params.ell;
        if sig.shares.len() != ell || sig.states.len() != ell {
            return Err(SigError::CountMismatch { expected: ell, got: sig.shares.len().min(sig.states.len()) });
        }
        if sig.shares.iter().fold(0, |acc, s| acc ^ s) != m {
            return Ok(OtVerifyOutcome { accept_prob: 0.0, per_index: Vec::new(), post: None });
        }
        let mut per_index = Vec::with_capacity(ell);
        let mut post = Vec::with_capacity(ell);
        for (i, st) in sig.states.iter().enumerate() {
            if st.layout() != &self.layout() {
                return Err(crate::statevec::StateError::LayoutMismatch.into());
            }
            let good = st.filter(|l| self.branch_ok(vk, sig.shares[i], i, l));
            let p = good.norm_sqr() / st.norm_sqr();
            per_index.push(p);
            if p > 0.0 {
                post.push(good.normalized()?);
            }
        }
        let accept_prob = per_index.iter().product();
        let post = (post.len() == ell).then(|| OtSignature { states: post, shares: sig.shares.clone(), reveal: sig.reveal.clone() });
        Ok(OtVerifyOutcome { accept_prob, per_index, post })
    }

    /// Hadamard-basis measurement of every `(X_i, S_i)`.
    pub fn del<R: Rng + ?Sized>(&self, sig: &OtSignature, rng: &mut R) -> Result<OtCertificate, SigError> {
        let sb = self.sig_bits();
        let entries = sig
            .states
            .iter()
            .map(|st| {
                let d = st.measure_hadamard_basis(rng)?;
                Ok(OtCertEntry { d1: (d >> sb) as u64, d2: (d & ((1u128 << sb) - 1)) as u64 })
            })
            .collect::<Result<_, SigError>>()?;
        Ok(OtCertificate { entries })
    }

    pub fn delver(&self, dk: &OtDeletionKey, cert: &OtCertificate) -> Result<bool, SigError> {
        if dk.entries.len() != cert.entries.len() {
            return Err(SigError::CountMismatch { expected: dk.entries.len(), got: cert.entries.len() });
        }
        Ok(dk.entries.iter().zip(&cert.entries).all(|(k, d)| entry_passes(k, d)))
    }

    /// Measures every `(X_i, S_i)` in the computational basis, keeping the
    /// classical `(x, σ)` pairs, then deletes the collapsed states.
    pub fn computational_attack<R: Rng + ?Sized>(
        &self,
        sig: &OtSignature,
        rng: &mut R,
    ) -> Result<(Vec<(u64, u64)>, OtCertificate), SigError> {
        let sb = self.sig_bits();
        let mut evidence = Vec::with_capacity(sig.states.len());
        let mut collapsed = Vec::with_capacity(sig.states.len());
        for st in &sig.states {
            let (label, _) = st.measure_all(rng)?;
            evidence.push(((label >> sb) as u64, (label & ((1u128 << sb) - 1)) as u64));
            collapsed.push(State::basis(st.layout().clone(), label)?);
        }
        let cert = self.del(&OtSignature { states: collapsed, shares: sig.shares.clone(), reveal: None }, rng)?;
        Ok((evidence, cert))
    }
}

pub fn entry_passes(k: &OtKeyEntry, d: &OtCertEntry) -> bool {
    (((d.d1 & k.a1).count_ones() + (d.d2 & k.a2).count_ones()) & 1 == 1) == k.c
}
