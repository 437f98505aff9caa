//! Sparse pure-state simulation over named bit registers.
//!
//! A [`SparseState`] maps packed basis labels to complex amplitudes. Every
//! operation returns a new state; amplitudes below the scalar's pruning
//! threshold are dropped afterwards. Amplitudes live in a `BTreeMap`, so
//! iteration order (and therefore measurement sampling) is deterministic.

mod density;
mod layout;
mod linalg;
pub mod random;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;
use rand::Rng;
use thiserror::Error;

use crate::f2lin::{F2Error, F2Subspace, F2Vec};
use crate::scalar::Scalar;

pub use density::{pure_trace_distance, trace_distance, ztwirl_mixture, DensityMatrix, MAX_DENSITY_BITS};
pub use layout::{Field, RegisterLayout, MAX_LABEL_BITS};
pub use linalg::CMatrix;

use layout::mask;

/// Widest register the explicit Hadamard transform will expand.
pub const MAX_HADAMARD_BITS: usize = 16;
/// Largest support a single Hadamard may produce before pruning.
pub const MAX_HADAMARD_TERMS: usize = 1 << 22;
/// Largest subspace dimension for coset-state preparation.
pub const MAX_COSET_DIM: usize = 16;
/// Widest register a dense unitary may act on.
pub const MAX_UNITARY_BITS: usize = 10;
/// Widest register a subspace PVM may act on.
pub const MAX_PVM_BITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("unknown register {0:?}")]
    UnknownRegister(String),
    #[error("duplicate register {0:?}")]
    DuplicateRegister(String),
    #[error("register {0:?} has zero width")]
    ZeroWidth(String),
    #[error("layout of {0} bits exceeds the label width")]
    LayoutTooWide(usize),
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("value does not fit register {register:?} of width {width}")]
    ValueTooWide { register: String, width: usize },
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("layouts differ")]
    LayoutMismatch,
    #[error("register width {width} exceeds the cap of {cap} bits for {op}")]
    WidthCap { op: &'static str, width: usize, cap: usize },
    #[error("operation would create {0} terms")]
    SupportCap(usize),
    #[error("classical map is not injective on the support")]
    NotInjective,
    #[error("register {0:?} is not in a single classical value")]
    NotClassical(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("density matrix dimension {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error(transparent)]
    F2(#[from] F2Error),
}

/// Outcome of a computational-basis measurement.
#[derive(Clone, Debug)]
pub struct Measurement<T: Scalar> {
    pub outcome: F2Vec,
    pub prob: T,
    pub post: SparseState<T>,
    /// The input was not normalised and was rescaled before sampling.
    pub renormalized: bool,
}

/// A pure state, possibly subnormalised after a projection.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState<T: Scalar> {
    layout: RegisterLayout,
    amps: BTreeMap<u128, Complex<T>>,
}

fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn creal<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

impl<T: Scalar> SparseState<T> {
    /// State from explicit terms; repeated labels add up. Not renormalised.
    pub fn from_terms(
        layout: RegisterLayout,
        terms: impl IntoIterator<Item = (u128, Complex<T>)>,
    ) -> Result<Self, StateError> {
        let width = layout.total_width();
        let mut amps: BTreeMap<u128, Complex<T>> = BTreeMap::new();
        for (label, amp) in terms {
            if label & !mask(width) != 0 {
                return Err(StateError::LayoutTooWide(width));
            }
            let e = amps.entry(label).or_insert_with(czero);
            *e = *e + amp;
        }
        Ok(Self { layout, amps }.pruned())
    }

    /// `|label⟩`.
    pub fn basis(layout: RegisterLayout, label: u128) -> Result<Self, StateError> {
        Self::from_terms(layout, [(label, creal(T::one()))])
    }

    /// `|v_1⟩|v_2⟩…` with one value per register.
    pub fn classical(layout: RegisterLayout, values: &[u128]) -> Result<Self, StateError> {
        let label = layout.pack(values)?;
        Self::basis(layout, label)
    }

    /// All registers zero.
    pub fn zero(layout: RegisterLayout) -> Self {
        Self::basis(layout, 0).expect("zero label fits any layout")
    }

    /// The coset state `Σ_{a∈A} (−1)^{a·s} |a⟩` on a single register, normalised,
    /// optionally with `a = 0` removed.
    pub fn coset_state(
        reg: &str,
        a: &F2Subspace,
        s: &F2Vec,
        exclude_zero: bool,
    ) -> Result<Self, StateError> {
        if a.dim() > MAX_COSET_DIM {
            return Err(StateError::WidthCap { op: "coset_state", width: a.dim(), cap: MAX_COSET_DIM });
        }
        if s.len() != a.ambient_dim() {
            return Err(StateError::WidthMismatch { expected: a.ambient_dim(), got: s.len() });
        }
        if exclude_zero && a.dim() == 0 {
            return Err(StateError::ZeroNorm);
        }
        let layout = RegisterLayout::new(&[(reg, a.ambient_dim())])?;
        let elems = a.enumerate()?;
        let count = elems.len() - usize::from(exclude_zero);
        let amp = T::one() / T::from_f64_lossy(count as f64).sqrt();
        let terms = elems
            .into_iter()
            .filter(|e| !(exclude_zero && e.is_zero()))
            .map(|e| (e.value(), creal(if e.dot(s) { -amp } else { amp })));
        Self::from_terms(layout, terms)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, Complex<T>)> + '_ {
        self.amps.iter().map(|(&l, &a)| (l, a))
    }

    pub fn amplitude(&self, label: u128) -> Complex<T> {
        self.amps.get(&label).copied().unwrap_or_else(czero)
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.values().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= T::tolerance()
    }

    pub fn normalized(&self) -> Result<Self, StateError> {
        let n = self.norm_sqr();
        if n <= T::zero() {
            return Err(StateError::ZeroNorm);
        }
        let k = T::one() / n.sqrt();
        Ok(self.map_amps(|_, a| a * k))
    }

    fn pruned(mut self) -> Self {
        let thr = T::prune_threshold();
        self.amps.retain(|_, a| a.norm() >= thr);
        self
    }

    fn map_amps(&self, f: impl Fn(u128, Complex<T>) -> Complex<T>) -> Self {
        let amps = self.amps.iter().map(|(&l, &a)| (l, f(l, a))).collect();
        Self { layout: self.layout.clone(), amps }.pruned()
    }

    pub fn field(&self, reg: &str) -> Result<Field, StateError> {
        self.layout.field(reg)
    }

    /// Values a register takes on the support, in label order.
    pub fn register_values(&self, reg: &str) -> Result<Vec<u128>, StateError> {
        let f = self.field(reg)?;
        let mut out: Vec<u128> = self.amps.keys().map(|&l| f.get(l)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>, StateError> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        let (small, large, conj_small) =
            if self.len() <= other.len() { (self, other, true) } else { (other, self, false) };
        let mut acc = czero();
        for (l, a) in small.terms() {
            if let Some(&b) = large.amps.get(&l) {
                acc = acc + if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// Largest amplitude difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T, StateError> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        let mut worst = T::zero();
        for (l, a) in self.terms() {
            worst = worst.max((a - other.amplitude(l)).norm());
        }
        for (l, b) in other.terms() {
            if !self.amps.contains_key(&l) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }

    /// `self ⊗ other`; `other`'s registers become the low bits.
    pub fn tensor(&self, other: &Self) -> Result<Self, StateError> {
        let layout = self.layout.concat(&other.layout)?;
        let w = other.layout.total_width();
        let mut amps = BTreeMap::new();
        for (la, a) in self.terms() {
            for (lb, b) in other.terms() {
                amps.insert(layout::shl(la, w) | lb, a * b);
            }
        }
        Ok(Self { layout, amps }.pruned())
    }

    /// Appends a zeroed register.
    pub fn with_register(&self, name: &str, width: usize) -> Result<Self, StateError> {
        let reg = RegisterLayout::new(&[(name, width)])?;
        self.tensor(&Self::zero(reg))
    }

    /// Removes a register that holds one classical value on the whole support.
    pub fn remove_register(&self, name: &str) -> Result<(u128, Self), StateError> {
        let values = self.register_values(name)?;
        if values.len() > 1 {
            return Err(StateError::NotClassical(name.to_string()));
        }
        let value = values.first().copied().unwrap_or(0);
        let regs: Vec<(String, usize)> =
            self.layout.registers().iter().filter(|(n, _)| n != name).cloned().collect();
        let layout = RegisterLayout::new(&regs)?;
        let fields: Vec<Field> = regs.iter().map(|(n, _)| self.layout.field(n)).collect::<Result<_, _>>()?;
        let amps = self
            .amps
            .iter()
            .map(|(&l, &a)| {
                let vals: Vec<u128> = fields.iter().map(|f| f.get(l)).collect();
                (layout.pack(&vals).expect("values fit their registers"), a)
            })
            .collect();
        Ok((value, Self { layout, amps }))
    }

    /// Reorders and relabels registers to match `target`, which must hold the
    /// same names and widths.
    pub fn permute_to(&self, target: &RegisterLayout) -> Result<Self, StateError> {
        let mut names: Vec<&str> = target.names().collect();
        let mut mine: Vec<&str> = self.layout.names().collect();
        names.sort_unstable();
        mine.sort_unstable();
        if names != mine {
            return Err(StateError::LayoutMismatch);
        }
        let mut fields = Vec::new();
        for (n, w) in target.registers() {
            if self.layout.width(n)? != *w {
                return Err(StateError::LayoutMismatch);
            }
            fields.push(self.layout.field(n)?);
        }
        let amps = self
            .amps
            .iter()
            .map(|(&l, &a)| {
                let vals: Vec<u128> = fields.iter().map(|f| f.get(l)).collect();
                (target.pack(&vals).expect("widths match"), a)
            })
            .collect();
        Ok(Self { layout: target.clone(), amps })
    }

    /// `|x⟩_in |y⟩_out ↦ |x⟩_in |y ⊕ f(x)⟩_out`, with `f` seeing the input
    /// register values in the order given.
    pub fn apply_classical_isometry(
        &self,
        in_regs: &[&str],
        out_reg: &str,
        f: impl Fn(&[u128]) -> u128,
    ) -> Result<Self, StateError> {
        let ins: Vec<Field> = in_regs.iter().map(|r| self.field(r)).collect::<Result<_, _>>()?;
        let out = self.field(out_reg)?;
        if in_regs.contains(&out_reg) {
            return Err(StateError::DuplicateRegister(out_reg.to_string()));
        }
        let mut amps = BTreeMap::new();
        let mut vals = vec![0u128; ins.len()];
        for (&l, &a) in &self.amps {
            for (v, fld) in vals.iter_mut().zip(&ins) {
                *v = fld.get(l);
            }
            let y = f(&vals);
            if y & !mask(out.width) != 0 {
                return Err(StateError::ValueTooWide { register: out_reg.to_string(), width: out.width });
            }
            amps.insert(l ^ (y << out.shift), a);
        }
        Ok(Self { layout: self.layout.clone(), amps })
    }

    /// Applies a classical reversible map on whole labels.
    pub fn apply_permutation(&self, f: impl Fn(u128) -> u128) -> Result<Self, StateError> {
        let width = self.layout.total_width();
        let mut amps = BTreeMap::new();
        for (&l, &a) in &self.amps {
            let y = f(l);
            if y & !mask(width) != 0 {
                return Err(StateError::LayoutTooWide(width));
            }
            if amps.insert(y, a).is_some() {
                return Err(StateError::NotInjective);
            }
        }
        Ok(Self { layout: self.layout.clone(), amps })
    }

    /// Multiplies each amplitude by `(−1)^{s·x}` where `x` is the register value.
    pub fn apply_phase(&self, reg: &str, s: &F2Vec) -> Result<Self, StateError> {
        let f = self.field(reg)?;
        if s.len() != f.width {
            return Err(StateError::WidthMismatch { expected: f.width, got: s.len() });
        }
        let sv = s.value();
        Ok(self.map_amps(|l, a| if (f.get(l) & sv).count_ones() & 1 == 1 { -a } else { a }))
    }

    /// Multiplies each amplitude by a label-dependent factor.
    pub fn apply_diagonal(&self, f: impl Fn(u128) -> Complex<T>) -> Self {
        self.map_amps(|l, a| a * f(l))
    }

    /// Keeps only terms whose label satisfies `keep`; the result is subnormalised.
    pub fn filter(&self, keep: impl Fn(u128) -> bool) -> Self {
        let amps = self.amps.iter().filter(|(&l, _)| keep(l)).map(|(&l, &a)| (l, a)).collect();
        Self { layout: self.layout.clone(), amps }
    }

    /// Walsh–Hadamard transform on one register.
    pub fn hadamard(&self, reg: &str) -> Result<Self, StateError> {
        let f = self.field(reg)?;
        if f.width > MAX_HADAMARD_BITS {
            return Err(StateError::WidthCap { op: "hadamard", width: f.width, cap: MAX_HADAMARD_BITS });
        }
        let outputs = 1usize << f.width;
        let mut groups: BTreeMap<u128, Vec<(u128, Complex<T>)>> = BTreeMap::new();
        for (&l, &a) in &self.amps {
            groups.entry(l & !f.mask()).or_default().push((f.get(l), a));
        }
        let work = groups.len().saturating_mul(outputs);
        if work > MAX_HADAMARD_TERMS {
            return Err(StateError::SupportCap(work));
        }
        let norm = T::one() / T::from_f64_lossy(outputs as f64).sqrt();
        let mut amps = BTreeMap::new();
        for (rest, terms) in groups {
            let mut dense = vec![czero::<T>(); outputs];
            for (x, a) in terms {
                dense[x as usize] = dense[x as usize] + a;
            }
            fwht(&mut dense);
            for (d, a) in dense.into_iter().enumerate() {
                amps.insert(rest | ((d as u128) << f.shift), a * norm);
            }
        }
        Ok(Self { layout: self.layout.clone(), amps }.pruned())
    }

    /// Applies a dense unitary to one register.
    pub fn apply_unitary(&self, reg: &str, u: &CMatrix<T>) -> Result<Self, StateError> {
        let f = self.field(reg)?;
        if f.width > MAX_UNITARY_BITS {
            return Err(StateError::WidthCap { op: "apply_unitary", width: f.width, cap: MAX_UNITARY_BITS });
        }
        let dim = 1usize << f.width;
        if u.dim() != dim {
            return Err(StateError::DimMismatch(u.dim(), dim));
        }
        let mut groups: BTreeMap<u128, Vec<Complex<T>>> = BTreeMap::new();
        for (&l, &a) in &self.amps {
            let v = groups.entry(l & !f.mask()).or_insert_with(|| vec![czero(); dim]);
            v[f.get(l) as usize] = a;
        }
        let mut amps = BTreeMap::new();
        for (rest, v) in groups {
            for (x, a) in u.apply(&v).into_iter().enumerate() {
                amps.insert(rest | ((x as u128) << f.shift), a);
            }
        }
        Ok(Self { layout: self.layout.clone(), amps }.pruned())
    }

    /// Applies a dense unitary to the whole register space.
    pub fn apply_unitary_all(&self, u: &CMatrix<T>) -> Result<Self, StateError> {
        let w = self.layout.total_width();
        if w > MAX_UNITARY_BITS {
            return Err(StateError::WidthCap { op: "apply_unitary_all", width: w, cap: MAX_UNITARY_BITS });
        }
        if u.dim() != 1usize << w {
            return Err(StateError::DimMismatch(u.dim(), 1usize << w));
        }
        let out = u.apply(&self.to_dense()?);
        Self::from_terms(self.layout.clone(), out.into_iter().enumerate().map(|(i, a)| (i as u128, a)))
    }

    /// Born probabilities of each value of `reg`.
    pub fn outcome_probabilities(&self, reg: &str) -> Result<BTreeMap<u128, T>, StateError> {
        let f = self.field(reg)?;
        let mut out: BTreeMap<u128, T> = BTreeMap::new();
        for (&l, a) in &self.amps {
            let e = out.entry(f.get(l)).or_insert_with(T::zero);
            *e = *e + a.norm_sqr();
        }
        Ok(out)
    }

    /// Computational-basis measurement of one register.
    ///
    /// Outcomes are sampled by inverse CDF over values in increasing order with
    /// a single uniform draw.
    pub fn measure<R: Rng + ?Sized>(&self, reg: &str, rng: &mut R) -> Result<Measurement<T>, StateError> {
        let f = self.field(reg)?;
        let total = self.norm_sqr();
        if total <= T::zero() {
            return Err(StateError::ZeroNorm);
        }
        let renormalized = (total - T::one()).abs() > T::tolerance();
        let probs = self.outcome_probabilities(reg)?;
        let u = rng.gen::<f64>() * total.to_f64_lossy();
        let mut acc = 0.0;
        let mut chosen = *probs.keys().next_back().expect("nonempty support");
        for (&v, p) in &probs {
            acc += p.to_f64_lossy();
            if u < acc {
                chosen = v;
                break;
            }
        }
        let prob = probs[&chosen] / total;
        let post = self.filter(|l| f.get(l) == chosen).normalized()?;
        Ok(Measurement { outcome: F2Vec::from_value(f.width, chosen)?, prob, post, renormalized })
    }

    /// Measures every register in turn (equivalent to one joint measurement).
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(u128, T), StateError> {
        let total = self.norm_sqr();
        if total <= T::zero() {
            return Err(StateError::ZeroNorm);
        }
        let u = rng.gen::<f64>() * total.to_f64_lossy();
        let mut acc = 0.0;
        let mut chosen = None;
        for (&l, a) in &self.amps {
            acc += a.norm_sqr().to_f64_lossy();
            if u < acc {
                chosen = Some((l, *a));
                break;
            }
        }
        let (l, a) = chosen.unwrap_or_else(|| {
            let (&l, &a) = self.amps.iter().next_back().expect("nonempty support");
            (l, a)
        });
        Ok((l, a.norm_sqr() / total))
    }

    /// Measures the whole state in the Hadamard basis and returns the outcome label.
    ///
    /// One- and two-term states are sampled directly: for
    /// `α|u⟩ + β|v⟩` the parity `d·(u⊕v)` is `b` with probability
    /// `|α + (−1)^b β|² / 2` and `d` is uniform on that affine hyperplane.
    /// Wider supports fall back to explicit transforms.
    pub fn measure_hadamard_basis<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u128, StateError> {
        let width = self.layout.total_width();
        let terms: Vec<(u128, Complex<T>)> = self.terms().collect();
        match terms.as_slice() {
            [] => Err(StateError::ZeroNorm),
            [_] => Ok(rng.gen::<u128>() & mask(width)),
            [(u, a), (v, b)] => {
                let n = a.norm_sqr() + b.norm_sqr();
                let p0 = ((a + b).norm_sqr() / (n + n)).to_f64_lossy();
                let parity = rng.gen::<f64>() >= p0;
                Ok(sample_affine(width, u ^ v, parity, rng))
            }
            _ => {
                let mut st = self.clone();
                let names: Vec<String> = self.layout.names().map(str::to_string).collect();
                for n in &names {
                    st = st.hadamard(n)?;
                }
                Ok(st.measure_all(rng)?.0)
            }
        }
    }

    /// Projects `regs` onto `phi`; returns the acceptance probability and, when
    /// positive, the renormalised post-measurement state.
    ///
    /// `phi`'s layout names the projected registers and fixes their order.
    pub fn project_pure(&self, phi: &SparseState<T>) -> Result<(T, Option<Self>), StateError> {
        let (prob, residual) = self.project_pure_unnormalized(phi)?;
        if prob <= T::zero() {
            return Ok((prob, None));
        }
        let post = residual.normalized()?;
        Ok((prob / self.norm_sqr(), Some(post)))
    }

    fn project_pure_unnormalized(&self, phi: &SparseState<T>) -> Result<(T, Self), StateError> {
        let mut proj = Vec::new();
        for (n, w) in phi.layout.registers() {
            if self.layout.width(n)? != *w {
                return Err(StateError::LayoutMismatch);
            }
            proj.push(self.field(n)?);
        }
        let proj_mask = proj.iter().fold(0u128, |m, f| m | f.mask());
        let phi_label = |l: u128| {
            let vals: Vec<u128> = proj.iter().map(|f| f.get(l)).collect();
            phi.layout.pack(&vals).expect("widths match")
        };
        let mut residual: BTreeMap<u128, Complex<T>> = BTreeMap::new();
        for (&l, &a) in &self.amps {
            let c = phi.amplitude(phi_label(l));
            if c.norm_sqr() == T::zero() {
                continue;
            }
            let e = residual.entry(l & !proj_mask).or_insert_with(czero);
            *e = *e + c.conj() * a;
        }
        let mut amps = BTreeMap::new();
        for (rest, r) in &residual {
            for (pl, pa) in phi.terms() {
                let vals = phi.layout.unpack(pl);
                let mut label = *rest;
                for (f, v) in proj.iter().zip(vals) {
                    label = f.set(label, v);
                }
                amps.insert(label, pa * *r);
            }
        }
        let st = Self { layout: self.layout.clone(), amps }.pruned();
        let prob = st.norm_sqr();
        Ok((prob, st))
    }

    /// Projects `reg` onto the coset state `|A_{0,s}⟩` through the circuit
    /// `Z^s H P_{A⊥} H P_A Z^s`, without materialising the coset state.
    pub fn subspace_pvm(&self, reg: &str, a: &F2Subspace, s: &F2Vec) -> Result<(T, Option<Self>), StateError> {
        let f = self.field(reg)?;
        if f.width != a.ambient_dim() {
            return Err(StateError::WidthMismatch { expected: f.width, got: a.ambient_dim() });
        }
        if f.width > MAX_PVM_BITS {
            return Err(StateError::WidthCap { op: "subspace_pvm", width: f.width, cap: MAX_PVM_BITS });
        }
        let dual = a.dual();
        let st = self.apply_phase(reg, s)?;
        let st = st.filter(|l| a.contains_value(f.get(l)));
        let st = st.hadamard(reg)?;
        let st = st.filter(|l| dual.contains_value(f.get(l)));
        let st = st.hadamard(reg)?.apply_phase(reg, s)?;
        let prob = st.norm_sqr();
        if prob <= T::zero() {
            return Ok((prob, None));
        }
        Ok((prob / self.norm_sqr(), Some(st.normalized()?)))
    }

    /// Reduced density matrix on `keep` (in that order), tracing out the rest.
    pub fn density(&self, keep: &[&str]) -> Result<DensityMatrix<T>, StateError> {
        let fields: Vec<Field> = keep.iter().map(|r| self.field(r)).collect::<Result<_, _>>()?;
        let bits: usize = fields.iter().map(|f| f.width).sum();
        if bits > MAX_DENSITY_BITS {
            return Err(StateError::WidthCap { op: "density", width: bits, cap: MAX_DENSITY_BITS });
        }
        let keep_mask = fields.iter().fold(0u128, |m, f| m | f.mask());
        let index = |l: u128| fields.iter().fold(0usize, |acc, f| (acc << f.width) | f.get(l) as usize);
        let mut groups: BTreeMap<u128, Vec<(usize, Complex<T>)>> = BTreeMap::new();
        for (&l, &a) in &self.amps {
            groups.entry(l & !keep_mask).or_default().push((index(l), a));
        }
        let dim = 1usize << bits;
        let mut m = CMatrix::zeros(dim);
        for terms in groups.values() {
            for &(i, a) in terms {
                for &(j, b) in terms {
                    m[(i, j)] = m[(i, j)] + a * b.conj();
                }
            }
        }
        let n = self.norm_sqr();
        if n <= T::zero() {
            return Err(StateError::ZeroNorm);
        }
        DensityMatrix::new(m.scale(T::one() / n))
    }

    /// Dense amplitude vector over the whole layout (small layouts only).
    pub fn to_dense(&self) -> Result<Vec<Complex<T>>, StateError> {
        let w = self.layout.total_width();
        if w > MAX_DENSITY_BITS + 4 {
            return Err(StateError::WidthCap { op: "to_dense", width: w, cap: MAX_DENSITY_BITS + 4 });
        }
        let mut v = vec![czero(); 1usize << w];
        for (&l, &a) in &self.amps {
            v[l as usize] = a;
        }
        Ok(v)
    }

    /// One line per term, `label(re,im)`, registers separated by `|`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (&l, a) in &self.amps {
            let _ = writeln!(out, "{}({},{})", self.layout.render(l), a.re, a.im);
        }
        out
    }
}

/// In-place unnormalised Walsh–Hadamard transform.
fn fwht<T: Scalar>(v: &mut [Complex<T>]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Uniform `d ∈ {0,1}^width` with `d·delta = parity`; `delta` must be nonzero.
pub fn sample_affine<R: Rng + ?Sized>(width: usize, delta: u128, parity: bool, rng: &mut R) -> u128 {
    assert!(delta != 0, "affine hyperplane needs a nonzero normal");
    let pivot = 127 - delta.leading_zeros() as usize;
    let mut d = rng.gen::<u128>() & mask(width) & !(1u128 << pivot);
    if ((d & delta).count_ones() & 1 == 1) != parity {
        d |= 1u128 << pivot;
    }
    d
}
