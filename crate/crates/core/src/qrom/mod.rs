//! Simulated random oracles with reprogramming overlays.
//!
//! An [`OracleTable`] is a keyed pseudorandom function of `(seed, x)`; it is
//! never materialised. An [`OracleView`] stacks overlays on a table: point
//! maps, input swaps, and fixed prefixes. Multi-field inputs are packed
//! left-aligned and zero-padded on the right, so `H(a‖b)` on a wide oracle is
//! `H(a‖b‖0…0)`.

mod algorithm;
mod prf;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::f2lin::F2Vec;
use crate::scalar::Scalar;
use crate::statevec::{SparseState, StateError};

pub use algorithm::{
    extract_by_random_query, query_weight, OracleAlgorithm, QueryOracle, QueryRecord, QueryTrace, Run,
    MAX_SCHMIDT_SUPPORT,
};
pub use prf::{prf_split_check, PrfReport};

pub const MAX_ORACLE_BITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle width {0} exceeds {MAX_ORACLE_BITS} bits")]
    TooWide(usize),
    #[error("input {input:#x} wider than {bits} bits")]
    InputTooWide { input: u64, bits: usize },
    #[error("output {output:#x} wider than {bits} bits")]
    OutputTooWide { output: u64, bits: usize },
    #[error("fields of {0} bits do not fit the oracle input")]
    FieldsTooWide(usize),
    #[error("prefix of {prefix} bits leaves no input on a {in_bits}-bit view")]
    PrefixTooLong { prefix: usize, in_bits: usize },
    #[error("invalid hex string {0:?}")]
    Hex(String),
    #[error("algorithm made no queries")]
    NoQueries,
    #[error(transparent)]
    State(#[from] StateError),
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Anything that answers classical queries `{0,1}^n → {0,1}^m`.
pub trait Oracle: Send + Sync {
    fn in_bits(&self) -> usize;
    fn out_bits(&self) -> usize;
    /// Output on an input of exactly `in_bits` bits.
    fn eval(&self, x: u64) -> u64;

    /// Output on the left-aligned concatenation of `(value, width)` fields.
    fn eval_fields(&self, fields: &[(u64, usize)]) -> Result<u64, OracleError> {
        Ok(self.eval(pack_fields(self.in_bits(), fields)?))
    }
}

/// Packs `(value, width)` fields left-aligned into an `in_bits`-bit input.
pub fn pack_fields(in_bits: usize, fields: &[(u64, usize)]) -> Result<u64, OracleError> {
    let used: usize = fields.iter().map(|(_, w)| w).sum();
    if used > in_bits {
        return Err(OracleError::FieldsTooWide(used));
    }
    let mut x: u128 = 0;
    for &(v, w) in fields {
        if v & !mask(w) != 0 {
            return Err(OracleError::InputTooWide { input: v, bits: w });
        }
        x = (x << w) | v as u128;
    }
    Ok((x << (in_bits - used)) as u64)
}

/// Seeded pseudorandom function table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleTable {
    pub seed: u64,
    pub in_bits: usize,
    pub out_bits: usize,
}

impl OracleTable {
    pub fn new(seed: u64, in_bits: usize, out_bits: usize) -> Result<Self, OracleError> {
        if in_bits > MAX_ORACLE_BITS || in_bits == 0 {
            return Err(OracleError::TooWide(in_bits));
        }
        if out_bits > MAX_ORACLE_BITS || out_bits == 0 {
            return Err(OracleError::TooWide(out_bits));
        }
        Ok(Self { seed, in_bits, out_bits })
    }

    pub fn view(&self) -> OracleView {
        OracleView { base: *self, overlays: Vec::new() }
    }
}

impl Oracle for OracleTable {
    fn in_bits(&self) -> usize {
        self.in_bits
    }

    fn out_bits(&self) -> usize {
        self.out_bits
    }

    fn eval(&self, x: u64) -> u64 {
        debug_assert!(x & !mask(self.in_bits) == 0, "input wider than the oracle");
        let mut h = Sha256::new();
        h.update(b"cdenlab/oracle");
        h.update(self.seed.to_le_bytes());
        h.update([self.in_bits as u8, self.out_bits as u8]);
        h.update(x.to_le_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes")) & mask(self.out_bits)
    }
}

/// One reprogramming layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Overlay {
    /// `view(x) = map[x]` where defined.
    PointMap(BTreeMap<u64, u64>),
    /// `view(a) = below(b)`, `view(b) = below(a)`.
    Swap(u64, u64),
    /// `view(w) = below(p‖w)`; the view's input shrinks by `|p|`.
    Prefix(F2Vec),
}

/// A table with a stack of overlays, applied in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleView {
    base: OracleTable,
    overlays: Vec<Overlay>,
}

impl OracleView {
    pub fn base(&self) -> &OracleTable {
        &self.base
    }

    pub fn overlays(&self) -> &[Overlay] {
        &self.overlays
    }

    fn width_below(&self, depth: usize) -> usize {
        self.overlays[..depth].iter().fold(self.base.in_bits, |w, o| match o {
            Overlay::Prefix(p) => w - p.len(),
            _ => w,
        })
    }

    /// Adds an overlay on top of the stack.
    pub fn reprogram(&self, overlay: Overlay) -> Result<Self, OracleError> {
        let n = self.in_bits();
        let m = self.out_bits();
        let check_in = |x: u64| {
            if x & !mask(n) != 0 {
                Err(OracleError::InputTooWide { input: x, bits: n })
            } else {
                Ok(())
            }
        };
        match &overlay {
            Overlay::PointMap(map) => {
                for (&x, &y) in map {
                    check_in(x)?;
                    if y & !mask(m) != 0 {
                        return Err(OracleError::OutputTooWide { output: y, bits: m });
                    }
                }
            }
            Overlay::Swap(a, b) => {
                check_in(*a)?;
                check_in(*b)?;
            }
            Overlay::Prefix(p) => {
                if p.len() >= n {
                    return Err(OracleError::PrefixTooLong { prefix: p.len(), in_bits: n });
                }
            }
        }
        let mut overlays = self.overlays.clone();
        overlays.push(overlay);
        Ok(Self { base: self.base, overlays })
    }

    pub fn point_map(&self, entries: impl IntoIterator<Item = (u64, u64)>) -> Result<Self, OracleError> {
        self.reprogram(Overlay::PointMap(entries.into_iter().collect()))
    }

    pub fn swap(&self, a: u64, b: u64) -> Result<Self, OracleError> {
        self.reprogram(Overlay::Swap(a, b))
    }

    pub fn prefix(&self, p: F2Vec) -> Result<Self, OracleError> {
        self.reprogram(Overlay::Prefix(p))
    }

    /// Inputs on which some overlay differs from pass-through, as seen at the
    /// top of the stack. Prefix layers do not count as reprogramming.
    pub fn reprogrammed_inputs(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for (depth, o) in self.overlays.iter().enumerate() {
            let lift = |x: u64| self.lift_to_top(depth, x);
            match o {
                Overlay::PointMap(map) => out.extend(map.keys().filter_map(|&x| lift(x))),
                Overlay::Swap(a, b) if a != b => {
                    out.extend(lift(*a));
                    out.extend(lift(*b));
                }
                _ => {}
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Maps an input at layer `depth` to the top-level input that reaches it
    /// unchanged through later prefix layers, if any.
    fn lift_to_top(&self, depth: usize, mut x: u64) -> Option<u64> {
        let mut w = self.width_below(depth + 1);
        for o in &self.overlays[depth + 1..] {
            if let Overlay::Prefix(p) = o {
                let pv = p.value() as u64;
                let rest = w - p.len();
                if x >> rest != pv {
                    return None;
                }
                x &= mask(rest);
                w = rest;
            }
        }
        Some(x)
    }

    fn eval_at(&self, depth: usize, x: u64) -> u64 {
        if depth == 0 {
            return self.base.eval(x);
        }
        match &self.overlays[depth - 1] {
            Overlay::PointMap(map) => match map.get(&x) {
                Some(&y) => y,
                None => self.eval_at(depth - 1, x),
            },
            Overlay::Swap(a, b) => {
                let x = if x == *a {
                    *b
                } else if x == *b {
                    *a
                } else {
                    x
                };
                self.eval_at(depth - 1, x)
            }
            Overlay::Prefix(p) => {
                let below = self.width_below(depth - 1);
                let rest = below - p.len();
                self.eval_at(depth - 1, ((p.value() as u64) << rest) | x)
            }
        }
    }

    pub fn spec(&self) -> OracleSpec {
        OracleSpec {
            seed: self.base.seed,
            in_bits: self.base.in_bits,
            out_bits: self.base.out_bits,
            overlays: self
                .overlays
                .iter()
                .map(|o| match o {
                    Overlay::PointMap(map) => OverlaySpec::PointMap {
                        entries: map.iter().map(|(x, y)| (format!("{x:x}"), format!("{y:x}"))).collect(),
                    },
                    Overlay::Swap(a, b) => OverlaySpec::Swap { a: format!("{a:x}"), b: format!("{b:x}") },
                    Overlay::Prefix(p) => OverlaySpec::Prefix { bits: p.to_string() },
                })
                .collect(),
        }
    }

    pub fn from_spec(spec: &OracleSpec) -> Result<Self, OracleError> {
        let mut view = OracleTable::new(spec.seed, spec.in_bits, spec.out_bits)?.view();
        let hex = |s: &str| u64::from_str_radix(s, 16).map_err(|_| OracleError::Hex(s.to_string()));
        for o in &spec.overlays {
            view = match o {
                OverlaySpec::PointMap { entries } => {
                    let map = entries.iter().map(|(x, y)| Ok((hex(x)?, hex(y)?))).collect::<Result<_, OracleError>>()?;
                    view.reprogram(Overlay::PointMap(map))?
                }
                OverlaySpec::Swap { a, b } => view.swap(hex(a)?, hex(b)?)?,
                OverlaySpec::Prefix { bits } => {
                    view.prefix(bits.parse().map_err(|_| OracleError::Hex(bits.clone()))?)?
                }
            };
        }
        Ok(view)
    }
}

impl Oracle for OracleView {
    fn in_bits(&self) -> usize {
        self.width_below(self.overlays.len())
    }

    fn out_bits(&self) -> usize {
        self.base.out_bits
    }

    fn eval(&self, x: u64) -> u64 {
        self.eval_at(self.overlays.len(), x)
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn in_bits(&self) -> usize {
        (**self).in_bits()
    }
    fn out_bits(&self) -> usize {
        (**self).out_bits()
    }
    fn eval(&self, x: u64) -> u64 {
        (**self).eval(x)
    }
}

/// Serialisable oracle description; overlays listed in application order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub seed: u64,
    pub in_bits: usize,
    pub out_bits: usize,
    pub overlays: Vec<OverlaySpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OverlaySpec {
    PointMap { entries: BTreeMap<String, String> },
    Swap { a: String, b: String },
    Prefix { bits: String },
}

/// Coherent oracle query `|x⟩_in |y⟩_out ↦ |x⟩_in |y ⊕ O(x)⟩_out`.
///
/// Oracle values are computed only for inputs on the state's support.
pub fn coherent_query<T: Scalar>(
    st: &SparseState<T>,
    in_reg: &str,
    out_reg: &str,
    oracle: &dyn Oracle,
) -> Result<SparseState<T>, OracleError> {
    let iw = st.layout().width(in_reg)?;
    let ow = st.layout().width(out_reg)?;
    if iw != oracle.in_bits() {
        return Err(StateError::WidthMismatch { expected: oracle.in_bits(), got: iw }.into());
    }
    if ow != oracle.out_bits() {
        return Err(StateError::WidthMismatch { expected: oracle.out_bits(), got: ow }.into());
    }
    Ok(st.apply_classical_isometry(&[in_reg], out_reg, |x| oracle.eval(x[0] as u64) as u128)?)
}

#[cfg(test)]
mod tests;
