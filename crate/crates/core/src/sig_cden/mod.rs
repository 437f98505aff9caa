//! Signature schemes: the coset-state Fiat–Shamir signature, the one-time
//! scheme with classical certificates, its many-time upgrade, and a strawman
//! whose classical component survives deletion.

use thiserror::Error;

use crate::f2lin::F2Error;
use crate::fs_cden::FsError;
use crate::qrom::OracleError;
use crate::sigma::SigmaError;
use crate::statevec::StateError;

pub mod fs_sig;
pub mod mult;
pub mod ot;
pub mod ske_mac;
pub mod strawman;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SigError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("message {message:#x} wider than {bits} bits")]
    MessageTooWide { message: u64, bits: usize },
    #[error("expected {expected} entries, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Fs(#[from] FsError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    F2(#[from] F2Error),
}

pub(crate) fn check_message(m: u64, bits: usize) -> Result<(), SigError> {
    if bits < 64 && m >> bits != 0 {
        return Err(SigError::MessageTooWide { message: m, bits });
    }
    Ok(())
}

/// Serde helpers writing integers and byte strings as lowercase hex.
pub mod hex {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn encode(bytes: &[u8]) -> String {
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn decode(s: &str) -> Option<Vec<u8>> {
        if !s.len().is_multiple_of(2) {
            return None;
        }
        (0..s.len()).step_by(2).map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok()).collect()
    }

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16).map_err(D::Error::custom)
    }

    pub mod bytes {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&encode(v))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
            let s = String::deserialize(d)?;
            decode(&s).ok_or_else(|| D::Error::custom("bad hex"))
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[u64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|x| format!("{x:x}")))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| u64::from_str_radix(s, 16).map_err(D::Error::custom)).collect()
        }
    }
}
