//! Desk-scale simulator for certified-deniability signatures and NIZKs.

pub mod f2lin;
pub mod fs_cden;
pub mod games;
pub mod rng;
pub mod sig_cden;
pub mod sigma;
pub mod scalar;
pub mod qrom;
pub mod statevec;

pub use scalar::Scalar;

/// Double-precision pure state.
pub type State = statevec::SparseState<f64>;
/// Double-precision density matrix.
pub type Density = statevec::DensityMatrix<f64>;
/// Double-precision dense matrix.
pub type Matrix = statevec::CMatrix<f64>;
