//! A token-plus-classical-signature scheme in the style of revocable
//! signatures built from tokenized signatures.
//!
//! A signature is a fresh two-term token `|t⁰⟩ + (−1)^c|t¹⟩`, its public
//! serial `(t⁰, t¹)`, and a classical DS signature on `serial‖m`. Deleting
//! the token leaves the classical signature intact.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sigma::{DsSigningKey, DsVerifyKey, GroupParams};
use crate::statevec::RegisterLayout;
use crate::State;

use super::{check_message, SigError};

pub const REG_TOKEN: &str = "T";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Serial {
    pub t0: u64,
    pub t1: u64,
}

/// The classical part of a signature: everything that survives deletion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalEvidence {
    pub serial: Serial,
    pub m: u64,
    pub sigma: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrawmanSignature {
    pub evidence: ClassicalEvidence,
    /// `None` once the token has been handed back.
    pub token: Option<State>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrawmanDeletionKey {
    pub serial: Serial,
    pub c: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strawman {
    pub token_bits: usize,
    pub msg_bits: usize,
    pub group: GroupParams,
}

impl Strawman {
    pub fn new(token_bits: usize, msg_bits: usize) -> Result<Self, SigError> {
        if token_bits == 0 || token_bits > 16 || msg_bits == 0 || msg_bits > 16 {
            return Err(SigError::Params(format!("token width {token_bits}, message width {msg_bits}")));
        }
        Ok(Self { token_bits, msg_bits, group: GroupParams::default() })
    }

    fn ds_message(&self, serial: &Serial, m: u64) -> u64 {
        (((serial.t0 << self.token_bits) | serial.t1) << self.msg_bits) | m
    }

    pub fn gen<R: Rng + ?Sized>(&self, rng: &mut R) -> DsSigningKey {
        DsSigningKey::generate(self.group, 2 * self.token_bits + self.msg_bits, rng)
    }

    pub fn sign<R: Rng + ?Sized>(
        &self,
        sk: &DsSigningKey,
        m: u64,
        rng: &mut R,
    ) -> Result<(StrawmanSignature, StrawmanDeletionKey), SigError> {
        check_message(m, self.msg_bits)?;
        let mask = (1u64 << self.token_bits) - 1;
        let t0 = rng.gen::<u64>() & mask;
        let t1 = loop {
            let t = rng.gen::<u64>() & mask;
            if t != t0 {
                break t;
            }
        };
        let c = rng.gen::<bool>();
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let layout = RegisterLayout::new(&[(REG_TOKEN, self.token_bits)])?;
        let token = State::from_terms(
            layout,
            [(t0 as u128, Complex::new(amp, 0.0)), (t1 as u128, Complex::new(if c { -amp } else { amp }, 0.0))],
        )?;
        let serial = Serial { t0, t1 };
        let sigma = sk.sign(self.ds_message(&serial, m))?;
        Ok((
            StrawmanSignature { evidence: ClassicalEvidence { serial, m, sigma }, token: Some(token) },
            StrawmanDeletionKey { serial, c },
        ))
    }

    /// The checker a third party runs on archived classical data alone.
    pub fn evidence_verifies(&self, vk: &DsVerifyKey, ev: &ClassicalEvidence) -> bool {
        vk.verify(self.ds_message(&ev.serial, ev.m), ev.sigma)
    }

    /// Honest verification: the classical signature verifies and the token
    /// lies on its serial (probability of the token measuring to `t⁰` or `t¹`).
    pub fn verify(&self, vk: &DsVerifyKey, m: u64, sig: &StrawmanSignature) -> Result<f64, SigError> {
        let ev = &sig.evidence;
        if ev.m != m || !self.evidence_verifies(vk, ev) {
            return Ok(0.0);
        }
        let Some(token) = &sig.token else {
            return Ok(0.0);
        };
        let on_serial = token.filter(|l| l == ev.serial.t0 as u128 || l == ev.serial.t1 as u128);
        Ok(on_serial.norm_sqr() / token.norm_sqr())
    }

    /// Hadamard-measures the token; the classical evidence is untouched.
    pub fn del<R: Rng + ?Sized>(&self, sig: &mut StrawmanSignature, rng: &mut R) -> Result<Option<u64>, SigError> {
        match sig.token.take() {
            Some(t) => Ok(Some(t.measure_hadamard_basis(rng)? as u64)),
            None => Ok(None),
        }
    }

    pub fn delver(&self, dk: &StrawmanDeletionKey, d: u64) -> bool {
        ((d & (dk.serial.t0 ^ dk.serial.t1)).count_ones() & 1 == 1) == dk.c
    }
}
