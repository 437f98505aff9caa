//! Many-time signatures from one-time ones: every signature carries a fresh
//! one-time key certified by a global DS key, and its deletion key travels
//! encrypted and MACed so the signer needs no per-signature state.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::sigma::{DsSigningKey, DsVerifyKey};

use super::ot::{OtCertificate, OtDeletionKey, OtScheme, OtSignature};
use super::ske_mac::{Ciphertext, MacKey, SkeKey, Tag};
use super::SigError;

/// Width of the digest of a one-time verification key signed by the global key.
pub const VK_DIGEST_BITS: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultSigningKey {
    pub sk_g: DsSigningKey,
    pub sk_mac: MacKey,
    pub sk_enc: SkeKey,
}

impl MultSigningKey {
    pub fn vk(&self) -> &DsVerifyKey {
        &self.sk_g.vk
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultSignature {
    pub sig: OtSignature,
    pub vk_ot: DsVerifyKey,
    pub sig_vk: u64,
    pub ct: Ciphertext,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultCertificate {
    pub cert: OtCertificate,
    pub ct: Ciphertext,
    pub tag: Tag,
}

/// Why a deletion certificate was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelVerVerdict {
    Accept,
    BadTag,
    MalformedCiphertext,
    BadCertificate,
}

/// Digest of a one-time verification key, the message the global key signs.
pub fn vk_digest(vk: &DsVerifyKey) -> u64 {
    let mut h = Sha256::new();
    h.update(b"cdenlab/vk-digest");
    for v in [vk.params.p, vk.params.q, vk.params.g, vk.x, vk.msg_bits as u64, vk.challenge_seed] {
        h.update(v.to_le_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes")) & ((1 << VK_DIGEST_BITS) - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultScheme {
    pub ot: OtScheme,
}

impl MultScheme {
    pub fn new(ot: OtScheme) -> Self {
        Self { ot }
    }

    pub fn gen<R: Rng + ?Sized>(&self, rng: &mut R) -> MultSigningKey {
        MultSigningKey {
            sk_g: DsSigningKey::generate(self.ot.group, VK_DIGEST_BITS, rng),
            sk_enc: SkeKey::generate(rng),
            sk_mac: MacKey::generate(rng),
        }
    }

    pub fn sign<R: Rng + ?Sized>(&self, sk: &MultSigningKey, m: u64, rng: &mut R) -> Result<MultSignature, SigError> {
        let sk_ot = self.ot.gen(rng);
        let sig_vk = sk.sk_g.sign(vk_digest(&sk_ot.vk))?;
        let (sig, dk) = self.ot.sign(&sk_ot, m, rng)?;
        let plain = serde_json::to_vec(&dk).expect("deletion keys serialize");
        let ct = sk.sk_enc.encrypt(&plain, rng);
        let tag = sk.sk_mac.sign(&ct);
        Ok(MultSignature { sig, vk_ot: sk_ot.vk, sig_vk, ct, tag })
    }

    /// Probability that verification accepts; zero when the one-time key is not certified.
    pub fn verify(&self, vk: &DsVerifyKey, m: u64, sig: &MultSignature) -> Result<f64, SigError> {
        if !vk.verify(vk_digest(&sig.vk_ot), sig.sig_vk) {
            return Ok(0.0);
        }
        Ok(self.ot.verify(&sig.vk_ot, m, &sig.sig)?.accept_prob)
    }

    pub fn del<R: Rng + ?Sized>(&self, sig: &MultSignature, rng: &mut R) -> Result<MultCertificate, SigError> {
        Ok(MultCertificate { cert: self.ot.del(&sig.sig, rng)?, ct: sig.ct.clone(), tag: sig.tag.clone() })
    }

    pub fn delver(&self, sk: &MultSigningKey, cert: &MultCertificate) -> DelVerVerdict {
        if !sk.sk_mac.verify(&cert.ct, &cert.tag) {
            return DelVerVerdict::BadTag;
        }
        let Ok(dk) = serde_json::from_slice::<OtDeletionKey>(&sk.sk_enc.decrypt(&cert.ct)) else {
            return DelVerVerdict::MalformedCiphertext;
        };
        match self.ot.delver(&dk, &cert.cert) {
            Ok(true) => DelVerVerdict::Accept,
            Ok(false) => DelVerVerdict::BadCertificate,
            Err(_) => DelVerVerdict::MalformedCiphertext,
        }
    }
}
