//! Toy symmetric encryption and MAC built from seeded hashes.
//!
//! Encryption XORs the plaintext with an oracle keystream under a fresh
//! 32-bit nonce, so ciphertexts look uniform. The MAC is a keyed SHA-256.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::qrom::{Oracle, OracleTable};

pub const MAC_TAG_BYTES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ciphertext {
    pub nonce: u32,
    #[serde(with = "super::hex::bytes")]
    pub body: Vec<u8>,
}

impl Ciphertext {
    fn bytes(&self) -> Vec<u8> {
        let mut out = self.nonce.to_le_bytes().to_vec();
        out.extend_from_slice(&self.body);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeKey(pub u64);

impl SkeKey {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self(rng.gen())
    }

    fn keystream(&self, nonce: u32, len: usize) -> Vec<u8> {
        let prf = OracleTable::new(self.0, 48, 64).expect("fixed widths are valid");
        (0..len.div_ceil(8) as u64)
            .flat_map(|block| prf.eval(((nonce as u64) << 16) | block).to_le_bytes())
            .take(len)
            .collect()
    }

    pub fn encrypt<R: Rng + ?Sized>(&self, plaintext: &[u8], rng: &mut R) -> Ciphertext {
        let nonce = rng.gen();
        let body = plaintext.iter().zip(self.keystream(nonce, plaintext.len())).map(|(p, k)| p ^ k).collect();
        Ciphertext { nonce, body }
    }

    pub fn decrypt(&self, ct: &Ciphertext) -> Vec<u8> {
        ct.body.iter().zip(self.keystream(ct.nonce, ct.body.len())).map(|(c, k)| c ^ k).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacKey(pub u64);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tag(#[serde(with = "super::hex::bytes")] pub Vec<u8>);

impl MacKey {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self(rng.gen())
    }

    pub fn sign(&self, ct: &Ciphertext) -> Tag {
        let mut h = Sha256::new();
        h.update(b"cdenlab/mac");
        h.update(self.0.to_le_bytes());
        h.update(ct.bytes());
        Tag(h.finalize()[..MAC_TAG_BYTES].to_vec())
    }

    pub fn verify(&self, ct: &Ciphertext, tag: &Tag) -> bool {
        self.sign(ct) == *tag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn round_trip_and_fresh_nonces() {
        let mut rng = stream(1);
        let k = SkeKey::generate(&mut rng);
        let msg = b"deletion key material".to_vec();
        let a = k.encrypt(&msg, &mut rng);
        let b = k.encrypt(&msg, &mut rng);
        assert_eq!(k.decrypt(&a), msg);
        assert_ne!(a.body, b.body);
        assert_ne!(SkeKey(k.0 ^ 1).decrypt(&a), msg);
    }

    #[test]
    fn ciphertext_bits_are_balanced() {
        let mut rng = stream(2);
        let k = SkeKey::generate(&mut rng);
        let ct = k.encrypt(&vec![0u8; 4096], &mut rng);
        let ones: u32 = ct.body.iter().map(|b| b.count_ones()).sum();
        let n = 4096.0 * 8.0;
        assert!((ones as f64 / n - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn mac_rejects_any_bit_flip() {
        let mut rng = stream(3);
        let (k, m) = (SkeKey::generate(&mut rng), MacKey::generate(&mut rng));
        let ct = k.encrypt(b"abc", &mut rng);
        let tag = m.sign(&ct);
        assert!(m.verify(&ct, &tag));
        for i in 0..24 {
            let mut bad = ct.clone();
            bad.body[i / 8] ^= 1 << (i % 8);
            assert!(!m.verify(&bad, &tag));
        }
        let mut bad = ct.clone();
        bad.nonce ^= 1;
        assert!(!m.verify(&bad, &tag));
        assert!(!MacKey(m.0 ^ 1).verify(&ct, &tag));
    }
}
