//! Random states, unitaries and operators for property checks.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

use super::linalg::CMatrix;
use super::{DensityMatrix, RegisterLayout, SparseState, StateError, MAX_DENSITY_BITS};

fn gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::from_f64_lossy(re), T::from_f64_lossy(im))
}

/// Haar-random dense vector of length `dim`.
pub fn haar_vector<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex<T>> {
    let v: Vec<Complex<T>> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Haar-random pure state over the whole layout.
pub fn haar_state<T: Scalar, R: Rng + ?Sized>(
    layout: RegisterLayout,
    rng: &mut R,
) -> Result<SparseState<T>, StateError> {
    let w = layout.total_width();
    if w > MAX_DENSITY_BITS {
        return Err(StateError::WidthCap { op: "haar_state", width: w, cap: MAX_DENSITY_BITS });
    }
    let v = haar_vector(1usize << w, rng);
    SparseState::from_terms(layout, v.into_iter().enumerate().map(|(i, a)| (i as u128, a)))
}

/// Random state supported on `support` distinct uniformly chosen labels.
pub fn sparse_random_state<T: Scalar, R: Rng + ?Sized>(
    layout: RegisterLayout,
    support: usize,
    rng: &mut R,
) -> Result<SparseState<T>, StateError> {
    let w = layout.total_width();
    let full = if w >= 64 { usize::MAX } else { 1usize << w };
    let support = support.min(full).max(1);
    let mut labels = std::collections::BTreeSet::new();
    while labels.len() < support {
        labels.insert(rng.gen::<u128>() & super::mask(w));
    }
    let amps = haar_vector::<T, R>(support, rng);
    SparseState::from_terms(layout, labels.into_iter().zip(amps))
}

/// Haar-random unitary by Gram–Schmidt on a complex Gaussian matrix.
pub fn haar_unitary<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex<T>> = (0..dim).map(|_| gaussian(rng)).collect();
        for c in &cols {
            let proj = c.iter().zip(&v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
            for (x, a) in v.iter_mut().zip(c) {
                *x = *x - a * proj;
            }
        }
        let n = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if n > T::from_f64_lossy(1e-6) {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    CMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Random density matrix of the given rank with Gaussian-distributed weights.
pub fn random_density<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix<T>, StateError> {
    let mut acc = CMatrix::zeros(dim);
    for _ in 0..rank.max(1) {
        let v: Vec<Complex<T>> = (0..dim).map(|_| gaussian(rng)).collect();
        acc = acc.add(&CMatrix::outer(&v, &v));
    }
    let tr = acc.trace().re;
    DensityMatrix::new(acc.scale(T::one() / tr))
}

/// Random effect `0 ⪯ E ⪯ I` with eigenvalues drawn from `[lo, 1]`.
pub fn random_effect<T: Scalar, R: Rng + ?Sized>(dim: usize, lo: f64, rng: &mut R) -> CMatrix<T> {
    let u = haar_unitary::<T, R>(dim, rng);
    let vals: Vec<T> = (0..dim).map(|_| T::from_f64_lossy(rng.gen_range(lo..=1.0))).collect();
    u.matmul(&CMatrix::diagonal(&vals)).matmul(&u.adjoint())
}

/// Random projective measurement with `outcomes` projectors summing to `I`.
pub fn random_pvm<T: Scalar, R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Vec<CMatrix<T>> {
    let u = haar_unitary::<T, R>(dim, rng);
    let outcomes = outcomes.clamp(1, dim);
    let mut assignment: Vec<usize> = (0..dim).map(|i| i % outcomes).collect();
    assignment.shuffle(rng);
    (0..outcomes)
        .map(|k| {
            let diag: Vec<T> =
                assignment.iter().map(|&a| if a == k { T::one() } else { T::zero() }).collect();
            u.matmul(&CMatrix::diagonal(&diag)).matmul(&u.adjoint())
        })
        .collect()
}
