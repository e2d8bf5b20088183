//! Dense complex linear algebra and the resolvent integral kernels.

mod eig;
mod expm;
mod kernels;
mod special;

pub use eig::{eig, hermitian_eig, EigenDecomposition, HermitianEigen};
pub use expm::expm;
pub use kernels::{
    log_tail, regularized_log, resolvent_integral_log, resolvent_integral_osc, scalar_log_kernel,
    scalar_osc_kernel,
};
pub use special::{e1, e1_scaled};

use crate::error::{Error, Result};
use crate::scalar::{re, CMatrix, Real};
use nalgebra::{Complex, ComplexField, DMatrix};

/// Largest entry modulus.
pub fn max_abs<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.modulus()))
}

/// Largest entry modulus of `a - b`.
pub fn max_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).modulus()))
}

/// max |A - A†|.
pub fn hermiticity_defect<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut d = T::zero();
    for i in 0..n {
        for j in i..n {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).modulus());
        }
    }
    d
}

/// (A + A†)/2, exactly Hermitian.
pub fn hermitize<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    let n = a.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            re(a[(i, i)].re)
        } else {
            (a[(i, j)] + a[(j, i)].conj()).scale(half)
        }
    })
}

/// [A, B] = AB - BA.
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// {A, B} = AB + BA.
pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

/// Lifts a real matrix into a complex one.
pub fn complexify<T: Real>(a: &DMatrix<T>) -> CMatrix<T> {
    a.map(re)
}

/// Sum of the diagonal.
pub fn trace<T: Real>(a: &CMatrix<T>) -> Complex<T> {
    a.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |s, z| s + *z)
}

/// Fails with `DimensionMismatch` unless `a` is `n`×`n`.
pub fn ensure_square<T: Real>(a: &CMatrix<T>, n: usize) -> Result<()> {
    if a.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
    }
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    Ok(())
}

/// Matrix inverse through LU, `None` when singular.
pub fn inverse<T: Real>(a: &CMatrix<T>) -> Option<CMatrix<T>> {
    a.clone().lu().try_inverse()
}

/// Induced 1-norm (max column sum).
pub fn norm1<T: Real>(a: &CMatrix<T>) -> T {
    let mut best = T::zero();
    for col in a.column_iter() {
        let s = col.iter().fold(T::zero(), |s, z| s + z.modulus());
        best = best.max(s);
    }
    best
}

/// Builds `S · diag(d) · S⁻¹`.
pub fn from_eigen<T: Real>(
    s: &CMatrix<T>,
    d: &[Complex<T>],
    s_inv: &CMatrix<T>,
) -> CMatrix<T> {
    let mut sd = s.clone();
    for (j, mut col) in sd.column_iter_mut().enumerate() {
        col *= d[j];
    }
    sd * s_inv
}
