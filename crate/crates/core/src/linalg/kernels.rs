use super::eig::eig;
use super::special::e1_scaled;
use crate::error::{Error, Result};
use crate::scalar::{im, re, CMatrix, Real};
use nalgebra::{Complex, ComplexField};

fn check_pole<T: Real>(z: Complex<T>) -> Result<()> {
    if z.im >= T::lit(-1e-14) {
        return Err(Error::SpectrumOnAxis { imag: z.im.to_f() });
    }
    Ok(())
}

/// ∫_{eps_min}^{mu0} dε / (ε − z) for Im z < 0.
pub fn scalar_log_kernel<T: Real>(z: Complex<T>, mu0: T, eps_min: T) -> Result<Complex<T>> {
    check_pole(z)?;
    Ok((re(mu0) - z).ln() - (re(eps_min) - z).ln())
}

/// Subtraction point for the tail below the cutoff; any real `c > eps_min` works.
fn tail_anchor<T: Real>(eps_min: T) -> T {
    if eps_min < T::zero() {
        T::zero()
    } else {
        eps_min + T::one()
    }
}

/// ∫_{−∞}^{eps_min} [1/(ε − z) − 1/(ε − c)] dε with the real anchor `c` above the cutoff.
///
/// Adding this to the log kernel leaves only a real, cutoff dependent constant
/// that drops out of every Hermitian combination.
pub fn log_tail<T: Real>(z: Complex<T>, eps_min: T) -> Result<Complex<T>> {
    check_pole(z)?;
    let e = re(eps_min);
    let c = re(tail_anchor(eps_min));
    Ok(((e - z) / (e - c)).ln())
}

/// Log kernel plus tail: ln(mu0 − z) − ln|eps_min − c| − iπ.
pub fn regularized_log<T: Real>(z: Complex<T>, mu0: T, eps_min: T) -> Result<Complex<T>> {
    check_pole(z)?;
    let c = tail_anchor(eps_min);
    Ok((re(mu0) - z).ln() - re((c - eps_min).ln()) - im(T::pi()))
}

/// κ(z, t) = ∫_{−∞}^{mu0} e^{iεt} / (ε − z) dε for t > 0, Im z < 0 (t in ħ/eV).
pub fn scalar_osc_kernel<T: Real>(z: Complex<T>, mu0: T, t: T) -> Result<Complex<T>> {
    check_pole(z)?;
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument("oscillatory kernel needs t > 0".into()));
    }
    let x = im(-t) * (re(mu0) - z);
    Ok(-im(mu0 * t).exp() * e1_scaled(x)?)
}

/// ∫_{eps_min}^{mu0} (ε − A)⁻¹ dε through the eigenbasis of `a`.
pub fn resolvent_integral_log<T: Real>(a: &CMatrix<T>, mu0: T, eps_min: T) -> Result<CMatrix<T>> {
    if !(eps_min < mu0) {
        return Err(Error::InvalidArgument("eps_min must lie below mu0".into()));
    }
    eig(a)?.try_map(|z| scalar_log_kernel(z, mu0, eps_min))
}

/// ∫_{−∞}^{mu0} e^{iεt} (ε − A)⁻¹ dε through the eigenbasis of `a`.
pub fn resolvent_integral_osc<T: Real>(a: &CMatrix<T>, mu0: T, t: T) -> Result<CMatrix<T>> {
    eig(a)?.try_map(|z| scalar_osc_kernel(z, mu0, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_diff};
    use crate::quadrature::{adaptive_complex, composite_gl_matrix, GaussLegendre};
    use nalgebra::DVector;

    fn c(a: f64, b: f64) -> Complex<f64> {
        Complex::new(a, b)
    }

    #[test]
    fn scalar_log_example() {
        let z = c(0.0, -0.2);
        let v = scalar_log_kernel(z, 0.0, -100.0).unwrap();
        let expect = c(0.0, 0.2).ln() - c(-100.0, 0.2).ln();
        assert!((v - expect).norm() < 1e-15);
        let q = adaptive_complex(|e| c(1.0, 0.0) / (c(e, 0.0) - z), -100.0, 0.0, 1e-12).unwrap();
        assert!((v - q).norm() < 1e-9);
    }

    #[test]
    fn pole_on_axis_is_rejected() {
        assert!(matches!(
            scalar_log_kernel(c(0.5, 0.0), 1.0, -1.0),
            Err(Error::SpectrumOnAxis { .. })
        ));
        assert!(scalar_osc_kernel(c(0.5, 1e-3), 1.0, 1.0).is_err());
    }

    #[test]
    fn tail_plus_window_is_regularized_log() {
        let z = c(0.3, -0.15);
        for e in [-1000.0, -17.0, 0.2] {
            let a = scalar_log_kernel(z, 0.5, e).unwrap() + log_tail(z, e).unwrap();
            let b = regularized_log(z, 0.5, e).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn regularized_log_moves_by_real_constant() {
        let z = c(0.3, -0.15);
        let d = regularized_log(z, 0.0, -1000.0).unwrap() - regularized_log(z, 0.0, -2000.0).unwrap();
        assert!(d.im.abs() < 1e-15);
        assert!((d.re - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_tail_matches_quadrature() {
        let z = c(0.7, -0.3);
        let e = -50.0;
        // Map (−∞, e] onto (0, 1] with ε = e − (1 − u)/u.
        let f = |u: f64| {
            let x = e - (1.0 - u) / u;
            let jac = 1.0 / (u * u);
            (c(1.0, 0.0) / (c(x, 0.0) - z) - c(1.0 / x, 0.0)) * jac
        };
        let q = adaptive_complex(f, 1e-12, 1.0, 1e-13).unwrap();
        assert!((q - log_tail(z, e).unwrap()).norm() < 1e-9);
    }

    /// Tilted contour ε = μ − s(1 + i)... rotated into the upper half plane where e^{iεt} decays.
    fn osc_by_quadrature(z: Complex<f64>, mu: f64, t: f64) -> Complex<f64> {
        // ε = μ + s·e^{iθ}, s from +∞ to 0, θ = 3π/4 keeps Im ε > 0 and Re ε → −∞.
        let dir = c((0.75 * std::f64::consts::PI).cos(), (0.75 * std::f64::consts::PI).sin());
        let f = |s: f64| {
            let eps = c(mu, 0.0) + dir * s;
            -(c(0.0, t) * eps).exp() / (eps - z) * dir
        };
        let smax = 60.0 / (t * dir.im);
        adaptive_complex(f, 0.0, smax, 1e-13).unwrap()
    }

    #[test]
    fn oscillatory_kernel_matches_tilted_quadrature() {
        for (z, t) in [(c(0.0, -0.2), 1.0 / 0.658211951), (c(1.5, -0.05), 3.0), (c(-2.0, -0.4), 0.01)] {
            let k = scalar_osc_kernel(z, 0.0, t).unwrap();
            let q = osc_by_quadrature(z, 0.0, t);
            assert!((k - q).norm() < 1e-8, "z={z} t={t}: {k} vs {q}");
        }
    }

    #[test]
    fn oscillatory_kernel_decays() {
        // The sharp upper edge leaves an algebraic 1/(t|mu0 - z|) tail.
        let z = c(0.0, -0.2);
        let mut last = f64::INFINITY;
        for t in [10.0, 100.0, 1000.0, 10000.0] {
            let k = scalar_osc_kernel(z, 0.0, t).unwrap().norm();
            assert!(k < last && k <= 1.0 / (t * 0.2));
            last = k;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn diagonal_input_is_entrywise() {
        let zs = [c(0.2, -0.1), c(-1.0, -0.3)];
        let a = CMatrix::from_diagonal(&DVector::from_column_slice(&zs));
        let l = resolvent_integral_log(&a, 0.0, -10.0).unwrap();
        let o = resolvent_integral_osc(&a, 0.0, 2.0).unwrap();
        for (i, &z) in zs.iter().enumerate() {
            assert!((l[(i, i)] - scalar_log_kernel(z, 0.0, -10.0).unwrap()).norm() < 1e-14);
            assert!((o[(i, i)] - scalar_osc_kernel(z, 0.0, 2.0).unwrap()).norm() < 1e-14);
        }
        assert!(l[(0, 1)].norm() < 1e-15 && o[(1, 0)].norm() < 1e-15);
    }

    fn random_instance(seed: u64) -> CMatrix<f64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let n = 4;
        // Eigenvalues in the lower half of the unit disk, shifted by -0.1i.
        let vals: Vec<_> = (0..n)
            .map(|_| {
                let r = next().abs();
                let th = -std::f64::consts::PI * (0.5 + 0.5 * next());
                c(r * th.cos(), r * th.sin() - 0.1)
            })
            .collect();
        let mut s = CMatrix::from_fn(n, n, |_, _| c(0.3 * next(), 0.3 * next()));
        for i in 0..n {
            s[(i, i)] += c(1.0, 0.0);
        }
        let si = crate::linalg::inverse(&s).unwrap();
        crate::linalg::from_eigen(&s, &vals, &si)
    }

    #[test]
    fn log_kernel_matches_composite_gauss_legendre() {
        let gl = GaussLegendre::<f64>::new(8);
        for seed in 1..4u64 {
            let a = random_instance(seed);
            let exact = resolvent_integral_log(&a, 0.0, -1000.0).unwrap();
            let breaks: Vec<f64> = (0..=10_000).map(|k| -1000.0 * (1.0 - k as f64 / 10_000.0).powi(3)).collect();
            let q = composite_gl_matrix(&gl, &breaks, |e| {
                crate::linalg::inverse(&(CMatrix::identity(4, 4) * c(e, 0.0) - &a)).unwrap()
            });
            assert!(max_diff(&exact, &q) < 1e-7, "seed {seed}: {}", max_diff(&exact, &q));
        }
    }

    #[test]
    fn osc_kernel_matches_composite_gauss_legendre() {
        let gl = GaussLegendre::<f64>::new(12);
        let t = 1.0;
        for seed in 4..6u64 {
            let a = random_instance(seed);
            let exact = resolvent_integral_osc(&a, 0.0, t).unwrap();
            // Rotated ray from mu0 into the upper half plane, mapped onto finite panels.
            let dir = c(-(0.5f64).sqrt(), (0.5f64).sqrt());
            let smax = 60.0 / (t * dir.im);
            let breaks: Vec<f64> = (0..=10_000).map(|k| smax * k as f64 / 10_000.0).collect();
            let q = composite_gl_matrix(&gl, &breaks, |s| {
                let eps = dir * s;
                let g = crate::linalg::inverse(&(CMatrix::identity(4, 4) * eps - &a)).unwrap();
                -g * ((c(0.0, t) * eps).exp() * dir)
            });
            assert!(max_diff(&exact, &q) < 1e-7 * max_abs(&exact).max(1.0));
        }
    }
}
