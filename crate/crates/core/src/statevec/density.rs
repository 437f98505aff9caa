use num_complex::Complex;

use crate::f2lin::F2Vec;
use crate::scalar::Scalar;

use super::linalg::CMatrix;
use super::{SparseState, StateError};

/// Widest set of kept registers a dense density matrix may cover.
pub const MAX_DENSITY_BITS: usize = 12;
/// Widest phase register `ztwirl_mixture` averages over.
pub const MAX_TWIRL_BITS: usize = 8;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    m: CMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates hermiticity and trace; positivity is checked by [`Self::validate_psd`].
    pub fn new(m: CMatrix<T>) -> Result<Self, StateError> {
        let tol = T::tolerance();
        if !m.is_hermitian(tol) {
            return Err(StateError::NotHermitian);
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(StateError::InvalidDensity(format!("trace {}", tr.re)));
        }
        Ok(Self { m })
    }

    /// `|v⟩⟨v|` for a normalised dense vector.
    pub fn pure(v: &[Complex<T>]) -> Result<Self, StateError> {
        Self::new(CMatrix::outer(v, v))
    }

    /// Checks that no eigenvalue is below `−tolerance`.
    pub fn validate_psd(&self) -> Result<(), StateError> {
        let min = self.m.eigvalsh()?.first().copied().unwrap_or(T::zero());
        if min < -T::tolerance() {
            return Err(StateError::InvalidDensity(format!("eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn trace(&self) -> T {
        self.m.trace().re
    }

    /// Convex combination `Σ w_i ρ_i` with weights summing to one.
    pub fn mixture(parts: &[(T, DensityMatrix<T>)]) -> Result<Self, StateError> {
        let dim = parts.first().map(|(_, d)| d.dim()).ok_or(StateError::ZeroNorm)?;
        let mut acc = CMatrix::zeros(dim);
        for (w, d) in parts {
            if d.dim() != dim {
                return Err(StateError::DimMismatch(dim, d.dim()));
            }
            acc = acc.add(&d.m.scale(*w));
        }
        Self::new(acc)
    }
}

/// `½‖ρ − σ‖₁` from the eigenvalues of the difference.
pub fn trace_distance<T: Scalar>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T, StateError> {
    if rho.dim() != sigma.dim() {
        return Err(StateError::DimMismatch(rho.dim(), sigma.dim()));
    }
    let half = T::one() / (T::one() + T::one());
    Ok(rho.m.sub(&sigma.m).trace_norm()? * half)
}

/// `√(1 − |⟨ψ|φ⟩|²)` for two normalised pure states on the same layout.
pub fn pure_trace_distance<T: Scalar>(psi: &SparseState<T>, phi: &SparseState<T>) -> Result<T, StateError> {
    let ov = psi.inner(phi)?.norm_sqr() / (psi.norm_sqr() * phi.norm_sqr());
    Ok((T::one() - ov).max(T::zero()).sqrt())
}

/// Average of `density(builder(s), keep)` over all `s ∈ {0,1}^width`.
pub fn ztwirl_mixture<T: Scalar>(
    width: usize,
    keep: &[&str],
    builder: impl Fn(&F2Vec) -> Result<SparseState<T>, StateError>,
) -> Result<DensityMatrix<T>, StateError> {
    if width > MAX_TWIRL_BITS {
        return Err(StateError::WidthCap { op: "ztwirl_mixture", width, cap: MAX_TWIRL_BITS });
    }
    let count = 1u128 << width;
    let w = T::one() / T::from_f64_lossy(count as f64);
    let mut acc: Option<CMatrix<T>> = None;
    for s in 0..count {
        let s = F2Vec::from_value(width, s)?;
        let d = builder(&s)?.density(keep)?.into_matrix().scale(w);
        acc = Some(match acc {
            None => d,
            Some(a) => a.add(&d),
        });
    }
    DensityMatrix::new(acc.expect("at least one phase vector"))
}
