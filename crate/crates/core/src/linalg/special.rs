use crate::error::{Error, Result};
use crate::scalar::{re, Real};
use nalgebra::{Complex, ComplexField};

const EULER_GAMMA: f64 = 0.5772156649015329;
const SERIES_RADIUS: f64 = 4.0;
const MAX_TERMS: usize = 200_000;

fn tolerance<T: Real>() -> T {
    (T::eps() * T::lit(4.0)).max(T::lit(1e-15))
}

/// Exponential integral E1(z), principal branch.
pub fn e1<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    Ok(e1_scaled(z)? * (-z).exp())
}

/// e^z · E1(z). Stays finite where e^z alone would overflow.
pub fn e1_scaled<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if z.modulus() <= T::lit(SERIES_RADIUS) {
        Ok(e1_series(z)? * z.exp())
    } else {
        e1_continued_fraction(z)
    }
}

fn fail<T: Real>(z: Complex<T>) -> Error {
    Error::KernelNonConvergent { re: z.re.to_f(), im: z.im.to_f() }
}

fn e1_series<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if z.modulus() == T::zero() {
        return Err(fail(z));
    }
    let tol = tolerance::<T>();
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut pow = re(T::one());
    for k in 1..MAX_TERMS {
        let kt = T::lit(k as f64);
        pow = -pow * z / kt;
        let term = pow / kt;
        sum += term;
        if term.modulus() <= tol * sum.modulus() {
            return Ok(-re(T::lit(EULER_GAMMA)) - z.ln() - sum);
        }
    }
    Err(fail(z))
}

fn e1_continued_fraction<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    let tol = tolerance::<T>();
    let one = re(T::one());
    let mut b = z + one;
    let mut c = re(T::lit(1e30));
    let mut d = one / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = re(-T::lit((i * i) as f64));
        b += re(T::lit(2.0));
        d = one / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - one).modulus() <= tol {
            return Ok(h);
        }
    }
    Err(fail(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: f64, b: f64) -> Complex<f64> {
        Complex::new(a, b)
    }

    #[test]
    fn real_reference_values() {
        // Tabulated E1(1) and E1(10).
        assert!((e1(c(1.0, 0.0)).unwrap() - c(0.21938393439552029, 0.0)).norm() < 1e-14);
        assert!((e1(c(10.0, 0.0)).unwrap().re - 4.156968929685324e-6).abs() < 1e-19);
    }

    #[test]
    fn imaginary_axis_matches_trig_integrals() {
        // E1(ix) = -Ci(x) + i(Si(x) - π/2); Ci(1) and Si(1) tabulated.
        let ci = 0.3374039229009681;
        let si = 0.946083070367183;
        let v = e1(c(0.0, 1.0)).unwrap();
        assert!((v - c(-ci, si - std::f64::consts::FRAC_PI_2)).norm() < 1e-13);
    }

    #[test]
    fn branches_agree_at_switch_radius() {
        for k in 0..16 {
            let th = -1.4 + 0.18 * k as f64;
            let z = c(4.0 * th.cos(), 4.0 * th.sin());
            let s = e1_series(z).unwrap() * z.exp();
            let f = e1_continued_fraction(z).unwrap();
            assert!((s - f).norm() < 1e-12 * f.norm(), "{z}: {s} vs {f}");
        }
    }

    #[test]
    fn continued_fraction_in_single_precision() {
        let z = Complex::<f32>::new(0.41, -4.0);
        let v = e1_scaled(z).unwrap();
        let w = e1_scaled(c(0.41, -4.0)).unwrap();
        assert!((v.re as f64 - w.re).abs() + (v.im as f64 - w.im).abs() < 1e-6);
    }

    #[test]
    fn scaled_stays_finite_for_large_arguments() {
        let v = e1_scaled(c(30.0, -2000.0)).unwrap();
        assert!(v.norm().is_finite() && v.norm() < 1e-3);
    }

    #[test]
    fn origin_is_rejected() {
        assert!(e1(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn single_precision_smoke() {
        let v = e1(Complex::new(1.0f32, 0.0)).unwrap();
        assert!((v.re - 0.21938393).abs() < 1e-5);
    }
}
