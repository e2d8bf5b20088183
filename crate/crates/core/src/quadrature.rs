//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};
use crate::scalar::{re, CMatrix, Real};
use nalgebra::{Complex, ComplexField};

/// n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn on(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite rule over consecutive breakpoints.
pub fn composite_gl<T: Real>(gl: &GaussLegendre<T>, breaks: &[T], mut f: impl FnMut(T) -> Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for w in breaks.windows(2) {
        for (x, wt) in gl.on(w[0], w[1]) {
            acc += f(x) * re(wt);
        }
    }
    acc
}

/// Matrix valued composite rule over consecutive breakpoints.
pub fn composite_gl_matrix<T: Real>(
    gl: &GaussLegendre<T>,
    breaks: &[T],
    mut f: impl FnMut(T) -> CMatrix<T>,
) -> CMatrix<T> {
    let mut acc: Option<CMatrix<T>> = None;
    for w in breaks.windows(2) {
        for (x, wt) in gl.on(w[0], w[1]) {
            let v = f(x) * re(wt);
            match acc.as_mut() {
                Some(a) => *a += v,
                None => acc = Some(v),
            }
        }
    }
    acc.expect("at least one panel")
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: Real>(f: &impl Fn(T) -> Complex<T>, a: T, b: T) -> (Complex<T>, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * re(T::lit(WGK[7]));
    let mut gauss = fc * re(T::lit(WG[3]));
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kron += s * re(T::lit(WGK[j]));
        if j % 2 == 1 {
            gauss += s * re(T::lit(WG[j / 2]));
        }
    }
    let k = kron * re(half);
    let g = gauss * re(half);
    (k, (k - g).modulus())
}

/// Adaptive Gauss–Kronrod (7, 15) with global bisection.
pub fn adaptive_complex<T: Real>(f: impl Fn(T) -> Complex<T>, a: T, b: T, tol: T) -> Result<Complex<T>> {
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    for _ in 0..20_000 {
        let total: Complex<T> = intervals.iter().fold(Complex::new(T::zero(), T::zero()), |s, iv| s + iv.2);
        let err: T = intervals.iter().fold(T::zero(), |s, iv| s + iv.3);
        if err <= tol * total.modulus().max(T::one()) {
            return Ok(total);
        }
        let (k, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::zero()), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (lo, hi, _, _) = intervals.swap_remove(k);
        let m = (lo + hi) * T::lit(0.5);
        let (v1, e1) = gk15(&f, lo, m);
        let (v2, e2) = gk15(&f, m, hi);
        intervals.push((lo, m, v1, e1));
        intervals.push((m, hi, v2, e2));
    }
    let err: T = intervals.iter().fold(T::zero(), |s, iv| s + iv.3);
    Err(Error::QuadratureNotConverged { change: err.to_f() })
}

/// Real valued wrapper around [`adaptive_complex`].
pub fn adaptive_real<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    Ok(adaptive_complex(|x| re(f(x)), a, b, tol)?.re)
}
