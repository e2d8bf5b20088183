use super::{from_eigen, inverse, norm1};
use crate::error::{Error, Result};
use crate::scalar::{re, CMatrix, CVector, Real};
use nalgebra::{Complex, ComplexField};

/// Diagonalization `A = S · diag(values) · S⁻¹`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    pub values: Vec<Complex<T>>,
    pub right_vectors: CMatrix<T>,
    pub inverse_vectors: CMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `S · diag(f(λ)) · S⁻¹`.
    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> CMatrix<T> {
        let d: Vec<_> = self.values.iter().map(|&z| f(z)).collect();
        from_eigen(&self.right_vectors, &d, &self.inverse_vectors)
    }

    /// Like `map` but with a fallible scalar function.
    pub fn try_map(&self, f: impl Fn(Complex<T>) -> Result<Complex<T>>) -> Result<CMatrix<T>> {
        let d = self.values.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
        Ok(from_eigen(&self.right_vectors, &d, &self.inverse_vectors))
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.map(|z| z)
    }
}

/// General complex eigendecomposition through the Schur form.
pub fn eig<T: Real>(a: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if n == 1 {
        return Ok(EigenDecomposition {
            values: vec![a[(0, 0)]],
            right_vectors: CMatrix::identity(1, 1),
            inverse_vectors: CMatrix::identity(1, 1),
        });
    }
    let (q, t) = schur(a).ok_or(Error::NonDiagonalizable { condition: f64::INFINITY })?;

    let scale = t.iter().fold(T::zero(), |m, z| m.max(z.modulus()));
    let small = (T::eps() * scale).max(T::min_value().unwrap_or(T::eps()));
    let mut y = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = re(T::one());
        for j in (0..k).rev() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for l in j + 1..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut d = t[(j, j)] - lambda;
            if d.modulus() < small {
                d = re(small);
            }
            y[(j, k)] = -acc / d;
        }
    }
    let mut s = q * y;
    for mut col in s.column_iter_mut() {
        let nrm = col.norm();
        if nrm > T::zero() {
            col.unscale_mut(nrm);
        }
    }
    let s_inv = inverse(&s).ok_or(Error::NonDiagonalizable { condition: f64::INFINITY })?;
    let condition = norm1(&s) * norm1(&s_inv);
    if !(condition <= T::lit(1e12)) {
        return Err(Error::NonDiagonalizable { condition: condition.to_f() });
    }
    let values = (0..n).map(|k| t[(k, k)]).collect();
    Ok(EigenDecomposition { values, right_vectors: s, inverse_vectors: s_inv })
}

/// Complex Schur form `A = Q T Q†`. Shifted QR can stall on symmetric
/// spectra, so a failed attempt is retried on `H A H` for a fixed
/// Householder reflector `H`.
fn schur<T: Real>(a: &CMatrix<T>) -> Option<(CMatrix<T>, CMatrix<T>)> {
    let n = a.nrows();
    let max_iter = 10_000 * n;
    if let Some(s) = nalgebra::linalg::Schur::try_new(a.clone(), T::eps(), max_iter) {
        return Some(s.unpack());
    }
    for seed in 1..=3 {
        let v = CVector::from_fn(n, |k, _| Complex::new(T::lit(1.0 + k as f64), T::lit(0.5 * (seed * k) as f64)));
        let v = v.unscale(v.norm());
        let h = CMatrix::<T>::identity(n, n) - (&v * v.adjoint()) * re(T::lit(2.0));
        if let Some(s) = nalgebra::linalg::Schur::try_new(&h * a * &h, T::eps(), max_iter) {
            let (q, t) = s.unpack();
            return Some((h * q, t));
        }
    }
    None
}

/// Eigenpairs of a Hermitian matrix, ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V · diag(f(λ)) · V†`.
    pub fn map(&self, f: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
        let d: Vec<_> = self.values.iter().map(|&x| f(x)).collect();
        from_eigen(&self.vectors, &d, &self.vectors.adjoint())
    }
}

/// Hermitian eigensolver; only the lower triangle of `a` is read.
pub fn hermitian_eig<T: Real>(a: &CMatrix<T>) -> HermitianEigen<T> {
    let n = a.nrows();
    let se = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[i]
            .partial_cmp(&se.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}
