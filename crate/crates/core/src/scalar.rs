//! Real scalar types the simulator can run on.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real field used for amplitudes and matrix entries.
///
/// Tolerances are part of the scalar: a single-precision run cannot honour the
/// double-precision thresholds, so each type carries its own.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Amplitudes with magnitude below this are dropped after every operation.
    fn prune_threshold() -> Self;
    /// Tolerance for normalisation, hermiticity and trace checks.
    fn tolerance() -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn prune_threshold() -> Self {
        1e-12
    }
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn prune_threshold() -> Self {
        1e-6
    }
    fn tolerance() -> Self {
        1e-4
    }
}
