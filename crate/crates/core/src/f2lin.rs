//! Exact linear algebra over GF(2).
//!
//! Vectors are bit strings of a declared length up to 128. Coordinate 0 is the
//! leftmost character of the textual form and the most significant bit of the
//! packed integer, so lexicographic order on strings is numeric order on
//! [`F2Vec::value`].
//!
//! Subspaces are kept as a canonical reduced row-echelon basis: two spans are
//! equal exactly when their bases are equal.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MAX_BITS: usize = 128;
pub const MAX_ENUMERATE_DIM: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum F2Error {
    #[error("vector length {0} exceeds {MAX_BITS} bits")]
    TooWide(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("requested dimension {dim} exceeds ambient dimension {ambient}")]
    DimensionTooLarge { dim: usize, ambient: usize },
    #[error("cannot enumerate a subspace of dimension {0} (cap {MAX_ENUMERATE_DIM})")]
    EnumerationCap(usize),
    #[error("invalid bit string {0:?}")]
    Parse(String),
    #[error("empty basis list carries no ambient dimension")]
    EmptyBasis,
}

fn mask(len: usize) -> u128 {
    if len == MAX_BITS {
        u128::MAX
    } else {
        (1u128 << len) - 1
    }
}

/// A vector in GF(2)^n.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct F2Vec {
    len: usize,
    bits: u128,
}

impl F2Vec {
    pub fn zero(len: usize) -> Self {
        assert!(len <= MAX_BITS, "vector length {len} exceeds {MAX_BITS}");
        Self { len, bits: 0 }
    }

    /// Builds a vector from its packed value; bits above `len` must be clear.
    pub fn from_value(len: usize, value: u128) -> Result<Self, F2Error> {
        if len > MAX_BITS {
            return Err(F2Error::TooWide(len));
        }
        if value & !mask(len) != 0 {
            return Err(F2Error::Parse(format!("value {value:#x} wider than {len} bits")));
        }
        Ok(Self { len, bits: value })
    }

    /// Packed value, truncating silently to `len` bits.
    pub fn from_value_truncated(len: usize, value: u128) -> Self {
        assert!(len <= MAX_BITS);
        Self { len, bits: value & mask(len) }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::from_value_truncated(len, rng.gen::<u128>())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u128 {
        self.bits
    }

    /// Value as `u64`; panics when the vector is wider than 64 bits.
    pub fn value_u64(&self) -> u64 {
        assert!(self.len <= 64, "vector of {} bits does not fit u64", self.len);
        self.bits as u64
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Coordinate `i`, counted from the left.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.bits >> (self.len - 1 - i)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, v: bool) {
        assert!(i < self.len);
        let m = 1u128 << (self.len - 1 - i);
        if v {
            self.bits |= m;
        } else {
            self.bits &= !m;
        }
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Index of the leftmost 1, if any.
    pub fn leading_index(&self) -> Option<usize> {
        if self.bits == 0 {
            None
        } else {
            Some(self.bits.leading_zeros() as usize - (MAX_BITS - self.len))
        }
    }

    fn check_len(&self, other: &Self) -> Result<(), F2Error> {
        if self.len != other.len {
            return Err(F2Error::LengthMismatch { expected: self.len, got: other.len });
        }
        Ok(())
    }

    pub fn try_xor(&self, other: &Self) -> Result<Self, F2Error> {
        self.check_len(other)?;
        Ok(Self { len: self.len, bits: self.bits ^ other.bits })
    }

    pub fn try_dot(&self, other: &Self) -> Result<bool, F2Error> {
        self.check_len(other)?;
        Ok((self.bits & other.bits).count_ones() & 1 == 1)
    }

    /// XOR; panics on length mismatch.
    pub fn xor(&self, other: &Self) -> Self {
        self.try_xor(other).expect("F2Vec length mismatch")
    }

    /// Inner product mod 2; panics on length mismatch.
    pub fn dot(&self, other: &Self) -> bool {
        self.try_dot(other).expect("F2Vec length mismatch")
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let len = self.len + other.len;
        assert!(len <= MAX_BITS, "concatenation of {len} bits exceeds {MAX_BITS}");
        let high = if other.len == MAX_BITS { 0 } else { self.bits << other.len };
        Self { len, bits: high | other.bits }
    }

    /// Sub-vector of coordinates `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len);
        let shift = self.len - start - len;
        Self::from_value_truncated(len, self.bits >> shift)
    }

    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4).max(1);
        format!("{:0width$x}", self.bits, width = digits)
    }
}

impl fmt::Display for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F2Vec({self})")
    }
}

impl FromStr for F2Vec {
    type Err = F2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() > MAX_BITS {
            return Err(F2Error::TooWide(s.len()));
        }
        let mut bits = 0u128;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(F2Error::Parse(s.to_string())),
                };
        }
        Ok(Self { len: s.len(), bits })
    }
}

impl Serialize for F2Vec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for F2Vec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a vector from a literal; test and example convenience.
pub fn v(s: &str) -> F2Vec {
    s.parse().expect("valid bit string")
}

/// A linear subspace of GF(2)^n with canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Subspace {
    ambient_dim: usize,
    basis: Vec<F2Vec>,
}

impl fmt::Debug for F2Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.basis.iter().map(|b| b.to_string()).collect();
        write!(f, "F2Subspace(n={}, [{}])", self.ambient_dim, rows.join(", "))
    }
}

/// Span of `rows` as a canonical RREF subspace of GF(2)^n.
pub fn rref(ambient_dim: usize, rows: &[F2Vec]) -> Result<F2Subspace, F2Error> {
    if ambient_dim > MAX_BITS {
        return Err(F2Error::TooWide(ambient_dim));
    }
    for r in rows {
        if r.len() != ambient_dim {
            return Err(F2Error::LengthMismatch { expected: ambient_dim, got: r.len() });
        }
    }
    // Reduced echelon rows keyed by pivot; values are packed bits.
    let mut pivots: Vec<(usize, u128)> = Vec::new();
    for r in rows {
        let mut x = r.value();
        for &(p, row) in &pivots {
            if (x >> (ambient_dim - 1 - p)) & 1 == 1 {
                x ^= row;
            }
        }
        if x == 0 {
            continue;
        }
        let p = F2Vec::from_value_truncated(ambient_dim, x).leading_index().unwrap();
        let pbit = ambient_dim - 1 - p;
        for entry in pivots.iter_mut() {
            if (entry.1 >> pbit) & 1 == 1 {
                entry.1 ^= x;
            }
        }
        pivots.push((p, x));
    }
    pivots.sort_by_key(|&(p, _)| p);
    let basis = pivots
        .into_iter()
        .map(|(_, x)| F2Vec::from_value_truncated(ambient_dim, x))
        .collect();
    Ok(F2Subspace { ambient_dim, basis })
}

/// Uniformly random `dim`-dimensional subspace of GF(2)^n.
///
/// Draws random `dim × n` matrices until one has full rank.
pub fn sample_subspace<R: Rng + ?Sized>(
    ambient_dim: usize,
    dim: usize,
    rng: &mut R,
) -> Result<F2Subspace, F2Error> {
    if dim > ambient_dim {
        return Err(F2Error::DimensionTooLarge { dim, ambient: ambient_dim });
    }
    loop {
        let rows: Vec<F2Vec> = (0..dim).map(|_| F2Vec::random(ambient_dim, rng)).collect();
        let span = rref(ambient_dim, &rows)?;
        if span.dim() == dim {
            return Ok(span);
        }
    }
}

impl F2Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut e = F2Vec::zero(ambient_dim);
                e.set_bit(i, true);
                e
            })
            .collect();
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[F2Vec] {
        &self.basis
    }

    /// Number of elements, `2^dim`.
    pub fn size(&self) -> u128 {
        1u128 << self.dim()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|b| b.leading_index().expect("basis rows are nonzero")).collect()
    }

    fn reduce(&self, v: &F2Vec) -> u128 {
        let mut x = v.value();
        for b in &self.basis {
            let p = b.leading_index().unwrap();
            if (x >> (self.ambient_dim - 1 - p)) & 1 == 1 {
                x ^= b.value();
            }
        }
        x
    }

    pub fn try_contains(&self, v: &F2Vec) -> Result<bool, F2Error> {
        if v.len() != self.ambient_dim {
            return Err(F2Error::LengthMismatch { expected: self.ambient_dim, got: v.len() });
        }
        Ok(self.reduce(v) == 0)
    }

    /// Membership test; panics on length mismatch.
    pub fn contains(&self, v: &F2Vec) -> bool {
        self.try_contains(v).expect("F2Vec length mismatch")
    }

    /// Membership for a packed value of the ambient width.
    pub fn contains_value(&self, value: u128) -> bool {
        self.contains(&F2Vec::from_value_truncated(self.ambient_dim, value))
    }

    /// The orthogonal complement `{v : v·a = 0 for all a in A}`.
    pub fn dual(&self) -> F2Subspace {
        let n = self.ambient_dim;
        let pivots = self.pivots();
        let mut rows = Vec::with_capacity(n - self.dim());
        for free in (0..n).filter(|c| !pivots.contains(c)) {
            let mut v = F2Vec::zero(n);
            v.set_bit(free, true);
            for (row, &p) in self.basis.iter().zip(&pivots) {
                if row.bit(free) {
                    v.set_bit(p, true);
                }
            }
            rows.push(v);
        }
        rref(n, &rows).expect("rows have ambient length")
    }

    /// Element for a coefficient vector: bit `dim-1-j` of `coeffs` selects basis row `j`.
    pub fn element(&self, coeffs: u64) -> F2Vec {
        let d = self.dim();
        let mut x = 0u128;
        for (j, b) in self.basis.iter().enumerate() {
            if (coeffs >> (d - 1 - j)) & 1 == 1 {
                x ^= b.value();
            }
        }
        F2Vec::from_value_truncated(self.ambient_dim, x)
    }

    /// All `2^dim` elements in coefficient order; the first is zero.
    pub fn enumerate(&self) -> Result<Vec<F2Vec>, F2Error> {
        if self.dim() > MAX_ENUMERATE_DIM {
            return Err(F2Error::EnumerationCap(self.dim()));
        }
        Ok((0..(1u64 << self.dim())).map(|c| self.element(c)).collect())
    }

    /// Uniformly random element.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> F2Vec {
        let d = self.dim();
        let coeffs = if d == 0 { 0 } else { rng.gen::<u64>() >> (64 - d) };
        self.element(coeffs)
    }

    pub fn basis_strings(&self) -> Vec<String> {
        self.basis.iter().map(|b| b.to_string()).collect()
    }

    /// Rebuilds a subspace from basis strings; the ambient dimension is given
    /// explicitly because an empty basis does not carry it.
    pub fn from_basis_strings(ambient_dim: usize, rows: &[String]) -> Result<Self, F2Error> {
        let rows: Vec<F2Vec> = rows.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        rref(ambient_dim, &rows)
    }
}

impl Serialize for F2Subspace {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.basis.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for F2Subspace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<F2Vec>::deserialize(deserializer)?;
        let n = rows.first().map(|r| r.len()).ok_or_else(|| serde::de::Error::custom(F2Error::EmptyBasis))?;
        rref(n, &rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use std::collections::{BTreeMap, BTreeSet};

    /// Brute-force span: every XOR combination of the rows.
    fn brute_span(n: usize, rows: &[F2Vec]) -> BTreeSet<F2Vec> {
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << rows.len()) {
            let mut x = F2Vec::zero(n);
            for (j, r) in rows.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    x = x.xor(r);
                }
            }
            out.insert(x);
        }
        out
    }

    fn all_vectors(n: usize) -> Vec<F2Vec> {
        (0..(1u128 << n)).map(|x| F2Vec::from_value(n, x).unwrap()).collect()
    }

    /// All dim-2 subspaces of GF(2)^4 by brute force over pairs.
    fn all_dim2_subspaces_of_4() -> BTreeSet<BTreeSet<F2Vec>> {
        let vs = all_vectors(4);
        let mut out = BTreeSet::new();
        for a in &vs[1..] {
            for b in &vs[1..] {
                if a != b {
                    out.insert(brute_span(4, &[*a, *b]));
                }
            }
        }
        out
    }

    #[test]
    fn text_encoding_is_leftmost_first() {
        let x = v("1000");
        assert!(x.bit(0));
        assert_eq!(x.value(), 8);
        assert_eq!(x.to_string(), "1000");
        assert_eq!(v("0110").leading_index(), Some(1));
        assert_eq!(v("01").concat(&v("10")), v("0110"));
        assert_eq!(v("011010").slice(1, 3), v("110"));
        assert!("10a".parse::<F2Vec>().is_err());
    }

    #[test]
    fn rref_examples() {
        assert_eq!(rref(4, &[v("0000")]).unwrap().dim(), 0);
        let s = rref(4, &[v("1010"), v("0101"), v("1111")]).unwrap();
        assert_eq!(s.basis(), &[v("1010"), v("0101")]);
        let full = rref(4, &all_vectors(4)).unwrap();
        assert_eq!(full, F2Subspace::full(4));
        assert_eq!(full.basis(), &[v("1000"), v("0100"), v("0010"), v("0001")]);
        assert!(matches!(
            rref(4, &[v("1010"), v("101")]),
            Err(F2Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rref_is_canonical_for_equal_spans() {
        let a = rref(5, &[v("11000"), v("01100")]).unwrap();
        let b = rref(5, &[v("10100"), v("11000"), v("01100")]).unwrap();
        assert_eq!(a, b);
        assert_eq!(rref(5, a.basis()).unwrap(), a);
    }

    #[test]
    fn sample_subspace_edges() {
        let mut rng = stream(1);
        assert_eq!(sample_subspace(4, 0, &mut rng).unwrap(), F2Subspace::zero(4));
        for _ in 0..5 {
            assert_eq!(sample_subspace(4, 4, &mut rng).unwrap(), F2Subspace::full(4));
        }
        assert!(matches!(
            sample_subspace(3, 4, &mut rng),
            Err(F2Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn sample_subspace_is_uniform_over_dim2_subspaces_of_4() {
        let oracle = all_dim2_subspaces_of_4();
        assert_eq!(oracle.len(), 35);
        let mut counts: BTreeMap<BTreeSet<F2Vec>, usize> = BTreeMap::new();
        let mut rng = stream(2024);
        let samples = 35_000;
        for _ in 0..samples {
            let s = sample_subspace(4, 2, &mut rng).unwrap();
            let elems: BTreeSet<F2Vec> = s.enumerate().unwrap().into_iter().collect();
            *counts.entry(elems).or_default() += 1;
        }
        assert_eq!(counts.len(), 35);
        let p = 1.0 / 35.0;
        let sigma = (samples as f64 * p * (1.0 - p)).sqrt();
        for (s, c) in &counts {
            assert!(oracle.contains(s));
            assert!((*c as f64 - samples as f64 * p).abs() <= 3.5 * sigma, "count {c}");
        }
    }

    #[test]
    fn dual_examples() {
        assert_eq!(F2Subspace::full(4).dual(), F2Subspace::zero(4));
        let s = rref(4, &[v("1010"), v("0101")]).unwrap();
        let brute: BTreeSet<F2Vec> = all_vectors(4)
            .into_iter()
            .filter(|x| !x.dot(&v("1010")) && !x.dot(&v("0101")))
            .collect();
        let dual: BTreeSet<F2Vec> = s.dual().enumerate().unwrap().into_iter().collect();
        assert_eq!(dual, brute);
        assert_eq!(s.dual(), s);
        assert_eq!(F2Subspace::zero(3).dual(), F2Subspace::full(3));
    }

    #[test]
    fn contains_examples() {
        let s = rref(4, &[v("1010"), v("0101")]).unwrap();
        assert!(s.contains(&v("0000")));
        assert!(s.contains(&v("1111")));
        assert!(!s.contains(&v("1000")));
        let elems = brute_span(4, &[v("1010"), v("0101")]);
        for x in all_vectors(4) {
            assert_eq!(s.contains(&x), elems.contains(&x));
        }
        assert!(s.try_contains(&v("101")).is_err());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(F2Subspace::zero(3).enumerate().unwrap(), vec![v("000")]);
        assert_eq!(rref(2, &[v("11")]).unwrap().enumerate().unwrap(), vec![v("00"), v("11")]);
        let s = rref(4, &[v("1010"), v("0101")]).unwrap();
        assert_eq!(s.enumerate().unwrap(), vec![v("0000"), v("0101"), v("1010"), v("1111")]);
        assert!(matches!(F2Subspace::full(21).enumerate(), Err(F2Error::EnumerationCap(21))));
    }

    #[test]
    fn random_subspace_duality_properties() {
        let mut rng = stream(99);
        for i in 0..200 {
            let n = 2 + i % 9;
            let d = rng.gen_range(0..=n);
            let a = sample_subspace(n, d, &mut rng).unwrap();
            let ad = a.dual();
            assert_eq!(a.dim() + ad.dim(), n);
            assert_eq!(ad.dual(), a);
            let elems = a.enumerate().unwrap();
            for x in &elems {
                assert!(a.contains(x));
            }
            for y in ad.enumerate().unwrap() {
                assert!(elems.iter().all(|x| !x.dot(&y)));
            }
            assert_eq!(rref(n, a.basis()).unwrap(), a);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = rref(4, &[v("1010"), v("0101")]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"["1010","0101"]"#);
        let back: F2Subspace = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        assert_eq!(F2Subspace::from_basis_strings(4, &[]).unwrap(), F2Subspace::zero(4));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn span_membership_matches_brute_force(n in 1usize..8, raw in proptest::collection::vec(any::<u8>(), 0..5)) {
                let rows: Vec<F2Vec> = raw.iter().map(|&r| F2Vec::from_value_truncated(n, r as u128)).collect();
                let s = rref(n, &rows).unwrap();
                let brute = brute_span(n, &rows);
                prop_assert_eq!(s.size() as usize, brute.len());
                for x in all_vectors(n) {
                    prop_assert_eq!(s.contains(&x), brute.contains(&x));
                }
            }
        }
    }
}
