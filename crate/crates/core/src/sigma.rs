//! Schnorr identification over a small prime-order subgroup, and the
//! deterministic Schnorr signature derived from it.
//!
//! At desk scale the group offers no hardness; it exists to exercise
//! completeness, simulation, extraction and the Fiat–Shamir plumbing.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qrom::{Oracle, OracleError, OracleTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SigmaError {
    #[error("invalid group parameters: {0}")]
    Params(String),
    #[error("value {value} out of range for modulus {modulus}")]
    OutOfRange { value: u64, modulus: u64 },
    #[error("witness does not match statement")]
    BadWitness,
    #[error("challenges are equal")]
    EqualChallenges,
    #[error("transcripts do not verify or do not share a first message")]
    BadTranscripts,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `(p, q, g)` with `g` generating the order-`q` subgroup of `Z_p^*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupParams {
    pub p: u64,
    pub q: u64,
    pub g: u64,
}

impl Default for GroupParams {
    fn default() -> Self {
        Self { p: 23, q: 11, g: 2 }
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn bits_for(n: u64) -> usize {
    (64 - (n - 1).leading_zeros()) as usize
}

impl GroupParams {
    pub fn new(p: u64, q: u64, g: u64) -> Result<Self, SigmaError> {
        let params = Self { p, q, g };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SigmaError> {
        let Self { p, q, g } = *self;
        if p >= 1 << 31 {
            return Err(SigmaError::Params("p must be below 2^31".into()));
        }
        if !is_prime(p) || !is_prime(q) {
            return Err(SigmaError::Params("p and q must be prime".into()));
        }
        if (p - 1) % q != 0 {
            return Err(SigmaError::Params("q must divide p - 1".into()));
        }
        if g <= 1 || g >= p || self.pow(g, q) != 1 {
            return Err(SigmaError::Params("g must have order q".into()));
        }
        Ok(())
    }

    /// Bits needed to encode a group element (`⌈log₂ p⌉`).
    pub fn elem_bits(&self) -> usize {
        bits_for(self.p)
    }

    /// Bits needed to encode an element of `Z_q`.
    pub fn scalar_bits(&self) -> usize {
        bits_for(self.q)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        let mut b = base % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % self.p;
            }
            b = b * b % self.p;
            e >>= 1;
        }
        acc
    }

    /// `a^{-1} mod p` for a group element.
    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    /// `a^{-1} mod q` for a nonzero scalar.
    pub fn inv_q(&self, a: u64) -> u64 {
        let mut acc = 1u64;
        let mut b = a % self.q;
        let mut e = self.q - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % self.q;
            }
            b = b * b % self.q;
            e >>= 1;
        }
        acc
    }

    /// Membership in the order-`q` subgroup.
    pub fn in_group(&self, a: u64) -> bool {
        a >= 1 && a < self.p && self.pow(a, self.q) == 1
    }

    fn check_scalar(&self, v: u64) -> Result<(), SigmaError> {
        if v >= self.q {
            return Err(SigmaError::OutOfRange { value: v, modulus: self.q });
        }
        Ok(())
    }
}

/// A sigma-protocol transcript `(s1, s2, s3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transcript {
    pub s1: u64,
    pub s2: u64,
    pub s3: u64,
}

/// `w` uniform in `Z_q \ {0}`, `x = g^w`.
pub fn keygen<R: Rng + ?Sized>(params: &GroupParams, rng: &mut R) -> (u64, u64) {
    let w = rng.gen_range(1..params.q);
    (params.pow(params.g, w), w)
}

/// First message `g^r`.
pub fn p1(params: &GroupParams, r: u64) -> Result<u64, SigmaError> {
    params.check_scalar(r)?;
    Ok(params.pow(params.g, r))
}

/// Response `r + s2·w mod q`.
pub fn p3(params: &GroupParams, w: u64, r: u64, s2: u64) -> Result<u64, SigmaError> {
    params.check_scalar(w)?;
    params.check_scalar(r)?;
    params.check_scalar(s2)?;
    Ok((r + s2 * w) % params.q)
}

/// `g^{s3} = s1 · x^{s2}` with every field in range.
pub fn verify(params: &GroupParams, x: u64, t: &Transcript) -> bool {
    if t.s2 >= params.q || t.s3 >= params.q || t.s1 == 0 || t.s1 >= params.p {
        return false;
    }
    params.pow(params.g, t.s3) == params.mul(t.s1, params.pow(x, t.s2))
}

/// HVZK simulator: `s3 = rand mod q`, `s1 = g^{s3} x^{−s2}`.
pub fn simulate(params: &GroupParams, x: u64, s2: u64, rand: u64) -> Result<Transcript, SigmaError> {
    params.check_scalar(s2)?;
    let s3 = rand % params.q;
    let s1 = params.mul(params.pow(params.g, s3), params.inv(params.pow(x, s2)));
    Ok(Transcript { s1, s2, s3 })
}

/// Special-soundness extractor from two accepting transcripts sharing `s1`.
pub fn extract(params: &GroupParams, x: u64, a: &Transcript, b: &Transcript) -> Result<u64, SigmaError> {
    if a.s2 % params.q == b.s2 % params.q {
        return Err(SigmaError::EqualChallenges);
    }
    if a.s1 != b.s1 || !verify(params, x, a) || !verify(params, x, b) {
        return Err(SigmaError::BadTranscripts);
    }
    let q = params.q;
    let num = (a.s3 + q - b.s3) % q;
    let den = (a.s2 + q - b.s2) % q;
    Ok(num * params.inv_q(den) % q)
}

/// Honest prover transcript for randomness `r` and challenge `s2`.
pub fn prove_with(params: &GroupParams, w: u64, r: u64, s2: u64) -> Result<Transcript, SigmaError> {
    Ok(Transcript { s1: p1(params, r)?, s2, s3: p3(params, w, r, s2)? })
}

/// Deterministic Schnorr signature over fixed-width messages.
///
/// The nonce is `H_nonce(msg) mod q` with `H_nonce` keyed by the signing
/// seed; the challenge is `H_ch(R‖msg) mod q`. A signature packs `R` in the
/// high bits and `z` in the low bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsVerifyKey {
    pub params: GroupParams,
    pub x: u64,
    pub msg_bits: usize,
    pub challenge_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsSigningKey {
    pub vk: DsVerifyKey,
    pub w: u64,
    pub nonce_seed: u64,
}

pub const DS_CHALLENGE_OUT_BITS: usize = 16;

impl DsVerifyKey {
    pub fn sig_bits(&self) -> usize {
        self.params.elem_bits() + self.params.scalar_bits()
    }

    fn challenge_oracle(&self) -> Result<OracleTable, SigmaError> {
        Ok(OracleTable::new(self.challenge_seed, self.params.elem_bits() + self.msg_bits, DS_CHALLENGE_OUT_BITS)?)
    }

    fn challenge(&self, r_elem: u64, msg: u64) -> Result<u64, SigmaError> {
        let h = self.challenge_oracle()?;
        Ok(h.eval_fields(&[(r_elem, self.params.elem_bits()), (msg, self.msg_bits)])? % self.params.q)
    }

    /// Accepts iff `sig` is a well-formed signature on `msg`.
    pub fn verify(&self, msg: u64, sig: u64) -> bool {
        if self.msg_bits < 64 && msg >> self.msg_bits != 0 {
            return false;
        }
        let sb = self.params.scalar_bits();
        if sig >> self.sig_bits() != 0 {
            return false;
        }
        let r_elem = sig >> sb;
        let z = sig & ((1 << sb) - 1);
        if z >= self.params.q || !self.params.in_group(r_elem) {
            return false;
        }
        let Ok(e) = self.challenge(r_elem, msg) else {
            return false;
        };
        verify(&self.params, self.x, &Transcript { s1: r_elem, s2: e, s3: z })
    }
}

impl DsSigningKey {
    pub fn generate<R: Rng + ?Sized>(params: GroupParams, msg_bits: usize, rng: &mut R) -> Self {
        let (x, w) = keygen(&params, rng);
        let vk = DsVerifyKey { params, x, msg_bits, challenge_seed: rng.gen() };
        Self { vk, w, nonce_seed: rng.gen() }
    }

    pub fn sign(&self, msg: u64) -> Result<u64, SigmaError> {
        let params = &self.vk.params;
        let nonce = OracleTable::new(self.nonce_seed, self.vk.msg_bits, DS_CHALLENGE_OUT_BITS)?;
        if self.vk.msg_bits < 64 && msg >> self.vk.msg_bits != 0 {
            return Err(OracleError::InputTooWide { input: msg, bits: self.vk.msg_bits }.into());
        }
        let r = nonce.eval(msg) % params.q;
        let r_elem = p1(params, r)?;
        let e = self.vk.challenge(r_elem, msg)?;
        let z = p3(params, self.w, r, e)?;
        Ok((r_elem << params.scalar_bits()) | z)
    }
}
