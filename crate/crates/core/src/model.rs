//! Devices, leads, bias protocols and the induced Fock shift.

use crate::error::{Error, Result};
use crate::linalg::{ensure_square, hermitian_eig, hermiticity_defect, hermitize, max_abs};
use crate::scalar::{re, CMatrix, Real};

/// One of the two electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lead {
    L,
    R,
}

impl Lead {
    pub const BOTH: [Lead; 2] = [Lead::L, Lead::R];

    pub fn index(self) -> usize {
        match self {
            Lead::L => 0,
            Lead::R => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Lead::L => "L",
            Lead::R => "R",
        }
    }
}

fn hermitian_tol<T: Real>(scale: T) -> T {
    T::lit(1e-12).max(T::eps() * T::lit(64.0) * scale.max(T::one()))
}

/// Device Hamiltonian at t = 0, lead line-widths and the common chemical potential.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel<T: Real> {
    pub h0: CMatrix<T>,
    pub lambda_l: CMatrix<T>,
    pub lambda_r: CMatrix<T>,
    pub mu0: T,
}

impl<T: Real> DeviceModel<T> {
    pub fn new(h0: CMatrix<T>, lambda_l: CMatrix<T>, lambda_r: CMatrix<T>, mu0: T) -> Result<Self> {
        let n = h0.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("device needs at least one orbital".into()));
        }
        ensure_square(&h0, n)?;
        ensure_square(&lambda_l, n)?;
        ensure_square(&lambda_r, n)?;
        let d = hermiticity_defect(&h0);
        if d > hermitian_tol(max_abs(&h0)) {
            return Err(Error::NotHermitian { what: "h0", defect: d.to_f() });
        }
        for (what, lam) in [("lambda_L", &lambda_l), ("lambda_R", &lambda_r)] {
            let d = hermiticity_defect(lam);
            if d > hermitian_tol(max_abs(lam)) {
                return Err(Error::NotHermitian { what, defect: d.to_f() });
            }
            let min = hermitian_eig(&hermitize(lam)).values[0];
            if min < -hermitian_tol(max_abs(lam)) {
                return Err(Error::NotPsd { what, min_eigenvalue: min.to_f() });
            }
        }
        Ok(DeviceModel {
            h0: hermitize(&h0),
            lambda_l: hermitize(&lambda_l),
            lambda_r: hermitize(&lambda_r),
            mu0,
        })
    }

    pub fn n_orb(&self) -> usize {
        self.h0.nrows()
    }

    pub fn lambda(&self, lead: Lead) -> &CMatrix<T> {
        match lead {
            Lead::L => &self.lambda_l,
            Lead::R => &self.lambda_r,
        }
    }

    /// Λ = Λ^L + Λ^R.
    pub fn lambda_total(&self) -> CMatrix<T> {
        &self.lambda_l + &self.lambda_r
    }

    /// Smallest nonzero eigenvalue of the total line-width.
    pub fn lambda_min(&self) -> T {
        let vals = hermitian_eig(&self.lambda_total()).values;
        let top = vals.iter().fold(T::zero(), |m, &v| m.max(v));
        vals.into_iter()
            .filter(|&v| v > top * T::lit(1e-9))
            .fold(top, |m, v| m.min(v))
    }
}

/// Single orbital at `eps_d` with scalar line-widths.
pub fn build_single_site<T: Real>(eps_d: T, lam_l: T, lam_r: T, mu0: T) -> Result<DeviceModel<T>> {
    for (lead, v) in [(Lead::L, lam_l), (Lead::R, lam_r)] {
        if v < T::zero() {
            return Err(Error::NegativeLinewidth { lead: lead.name(), value: v.to_f() });
        }
    }
    let m = |x: T| CMatrix::from_element(1, 1, re(x));
    DeviceModel::new(m(eps_d), m(lam_l), m(lam_r), mu0)
}

/// Tight-binding chain with on-site `eps`, hopping `hop` and leads attached to its ends.
pub fn build_chain<T: Real>(
    n: usize,
    eps: T,
    hop: T,
    lam_end_l: T,
    lam_end_r: T,
    mu0: T,
) -> Result<DeviceModel<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("chain needs n >= 1".into()));
    }
    for (lead, v) in [(Lead::L, lam_end_l), (Lead::R, lam_end_r)] {
        if v < T::zero() {
            return Err(Error::NegativeLinewidth { lead: lead.name(), value: v.to_f() });
        }
    }
    let h0 = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            re(eps)
        } else if i + 1 == j || j + 1 == i {
            re(hop)
        } else {
            re(T::zero())
        }
    });
    let mut ll = CMatrix::zeros(n, n);
    let mut lr = CMatrix::zeros(n, n);
    ll[(0, 0)] = re(lam_end_l);
    lr[(n - 1, n - 1)] = re(lam_end_r);
    DeviceModel::new(h0, ll, lr, mu0)
}

/// Λ = −Im{h_{Dα} g^r h_{αD}}, taking the anti-Hermitian part as the matrix imaginary part.
pub fn linewidth_from_surface_gf<T: Real>(h_coupling: &CMatrix<T>, g_r_surface: &CMatrix<T>) -> Result<CMatrix<T>> {
    let nl = g_r_surface.nrows();
    ensure_square(g_r_surface, nl)?;
    if h_coupling.ncols() != nl {
        return Err(Error::DimensionMismatch { expected: nl, found: h_coupling.ncols() });
    }
    let m = h_coupling * g_r_surface * h_coupling.adjoint();
    let half = T::lit(0.5);
    // −Im M = −(M − M†)/(2i) = i(M − M†)/2
    let lam = (&m - m.adjoint()) * nalgebra::Complex::new(T::zero(), half);
    let lam = hermitize(&lam);
    if lam.nrows() > 0 {
        let min = hermitian_eig(&lam).values[0];
        if min < T::lit(-1e-10) {
            return Err(Error::NotPsd { what: "line-width", min_eigenvalue: min.to_f() });
        }
    }
    Ok(lam)
}

/// Time dependence of the applied voltage ΔV^α(t) on one lead.
#[derive(Debug, Clone, PartialEq)]
pub enum BiasKind<T: Real> {
    Zero,
    /// ΔV (1 − e^{−t/a}) for t > 0.
    SmoothStep { amplitude: T, rise_time: T },
    /// The a → 0⁺ limit of the smooth step.
    Step { amplitude: T },
    /// Piecewise linear ΔV samples at strictly increasing times.
    Tabulated { times: Vec<T>, values: Vec<T> },
}

fn check_table<T: Real>(times: &[T], n_values: usize) -> Result<()> {
    if times.len() < 2 || times.len() != n_values {
        return Err(Error::BadTable("need at least two samples and one value per time".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadTable("times must be strictly increasing (jumps are not supported)".into()));
    }
    Ok(())
}

fn table_segment<T: Real>(times: &[T], t: T) -> Result<usize> {
    let (a, b) = (times[0], times[times.len() - 1]);
    if t < a || t > b {
        return Err(Error::OutOfTableRange { t: t.to_f(), start: a.to_f(), end: b.to_f() });
    }
    let k = times.partition_point(|&x| x <= t);
    Ok(k.clamp(1, times.len() - 1) - 1)
}

impl<T: Real> BiasKind<T> {
    pub fn smooth_step(amplitude: T, rise_time: T) -> Self {
        BiasKind::SmoothStep { amplitude, rise_time }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BiasKind::SmoothStep { rise_time, .. } if !(*rise_time > T::zero()) => {
                Err(Error::InvalidArgument("rise time must be positive".into()))
            }
            BiasKind::Tabulated { times, values } => check_table(times, values.len()),
            _ => Ok(()),
        }
    }

    /// ΔV(t).
    pub fn voltage(&self, t: T) -> Result<T> {
        Ok(match self {
            BiasKind::Zero => T::zero(),
            BiasKind::SmoothStep { amplitude, rise_time } => {
                if t <= T::zero() {
                    T::zero()
                } else {
                    -*amplitude * (-t / *rise_time).exp_m1()
                }
            }
            BiasKind::Step { amplitude } => {
                if t > T::zero() {
                    *amplitude
                } else {
                    T::zero()
                }
            }
            BiasKind::Tabulated { times, values } => {
                let k = table_segment(times, t)?;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + (values[k + 1] - values[k]) * w
            }
        })
    }

    /// ∫₀ᵗ ΔV(τ) dτ.
    pub fn voltage_integral(&self, t: T) -> Result<T> {
        if t <= T::zero() && !matches!(self, BiasKind::Tabulated { .. }) {
            return Ok(T::zero());
        }
        Ok(match self {
            BiasKind::Zero => T::zero(),
            BiasKind::SmoothStep { amplitude, rise_time } => {
                *amplitude * (t + *rise_time * (-t / *rise_time).exp_m1())
            }
            BiasKind::Step { amplitude } => *amplitude * t,
            BiasKind::Tabulated { times, .. } => {
                table_segment(times, T::zero())?;
                table_segment(times, t)?;
                self.table_integral_to(t)? - self.table_integral_to(T::zero())?
            }
        })
    }

    fn table_integral_to(&self, t: T) -> Result<T> {
        let BiasKind::Tabulated { times, values } = self else { unreachable!() };
        let k = table_segment(times, t)?;
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for j in 0..k {
            acc += (values[j] + values[j + 1]) * (times[j + 1] - times[j]) * half;
        }
        let v = self.voltage(t)?;
        acc += (values[k] + v) * (t - times[k]) * half;
        Ok(acc)
    }

    /// Long-time voltage.
    pub fn settled(&self) -> T {
        match self {
            BiasKind::Zero => T::zero(),
            BiasKind::SmoothStep { amplitude, .. } | BiasKind::Step { amplitude } => *amplitude,
            BiasKind::Tabulated { values, .. } => values[values.len() - 1],
        }
    }

    /// Time after which the voltage equals its settled value to machine precision.
    pub fn settle_time(&self) -> T {
        match self {
            BiasKind::Zero | BiasKind::Step { .. } => T::zero(),
            BiasKind::SmoothStep { rise_time, .. } => *rise_time * T::lit(40.0),
            BiasKind::Tabulated { times, .. } => times[times.len() - 1],
        }
    }
}

/// Applied voltages on both leads.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasProfile<T: Real> {
    pub left: BiasKind<T>,
    pub right: BiasKind<T>,
}

impl<T: Real> BiasProfile<T> {
    pub fn new(left: BiasKind<T>, right: BiasKind<T>) -> Result<Self> {
        left.validate()?;
        right.validate()?;
        Ok(BiasProfile { left, right })
    }

    pub fn zero() -> Self {
        BiasProfile { left: BiasKind::Zero, right: BiasKind::Zero }
    }

    pub fn lead(&self, lead: Lead) -> &BiasKind<T> {
        match lead {
            Lead::L => &self.left,
            Lead::R => &self.right,
        }
    }

    /// Δε^α(t) = −ΔV^α(t).
    pub fn level_shift(&self, lead: Lead, t: T) -> Result<T> {
        Ok(-self.lead(lead).voltage(t)?)
    }

    /// ∫₀ᵗ Δε^α dτ.
    pub fn level_shift_integral(&self, lead: Lead, t: T) -> Result<T> {
        Ok(-self.lead(lead).voltage_integral(t)?)
    }

    /// Δε^α(∞).
    pub fn settled_shift(&self, lead: Lead) -> T {
        -self.lead(lead).settled()
    }

    pub fn settle_time(&self) -> T {
        self.left.settle_time().max(self.right.settle_time())
    }

    pub fn is_zero(&self) -> bool {
        matches!((&self.left, &self.right), (BiasKind::Zero, BiasKind::Zero))
    }
}

/// Δε^α(t) for one lead.
pub fn bias_at<T: Real>(profile: &BiasProfile<T>, lead: Lead, t: T) -> Result<T> {
    profile.level_shift(lead, t)
}

/// How the device Hamiltonian responds to the bias: h_D(t) = h_D(0) + δh(t).
#[derive(Debug, Clone, PartialEq)]
pub enum InducedFockRule<T: Real> {
    /// δh = ½[Δε^L + Δε^R]·I.
    HalfSum,
    None,
    /// Piecewise linear δh samples.
    Tabulated { times: Vec<T>, shifts: Vec<CMatrix<T>> },
}

impl<T: Real> InducedFockRule<T> {
    pub fn validate(&self, n_orb: usize) -> Result<()> {
        if let InducedFockRule::Tabulated { times, shifts } = self {
            check_table(times, shifts.len())?;
            for s in shifts {
                ensure_square(s, n_orb)?;
                let d = hermiticity_defect(s);
                if d > hermitian_tol(max_abs(s)) {
                    return Err(Error::NotHermitian { what: "tabulated shift", defect: d.to_f() });
                }
            }
        }
        Ok(())
    }

    /// True when δh is a multiple of the identity at all times.
    pub fn is_scalar(&self) -> bool {
        !matches!(self, InducedFockRule::Tabulated { .. })
    }

    /// Scalar δh(t) for the scalar rules.
    pub fn scalar_shift(&self, bias: &BiasProfile<T>, t: T) -> Result<T> {
        Ok(match self {
            InducedFockRule::HalfSum => {
                (bias.level_shift(Lead::L, t)? + bias.level_shift(Lead::R, t)?) * T::lit(0.5)
            }
            _ => T::zero(),
        })
    }

    /// ∫₀ᵗ of the scalar δh.
    pub fn scalar_shift_integral(&self, bias: &BiasProfile<T>, t: T) -> Result<T> {
        Ok(match self {
            InducedFockRule::HalfSum => {
                (bias.level_shift_integral(Lead::L, t)? + bias.level_shift_integral(Lead::R, t)?)
                    * T::lit(0.5)
            }
            _ => T::zero(),
        })
    }

    /// δh(t) as a matrix.
    pub fn delta_h(&self, bias: &BiasProfile<T>, n: usize, t: T) -> Result<CMatrix<T>> {
        match self {
            InducedFockRule::Tabulated { times, shifts } => {
                let k = table_segment(times, t)?;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                Ok(&shifts[k] * re(T::one() - w) + &shifts[k + 1] * re(w))
            }
            _ => Ok(CMatrix::identity(n, n) * re(self.scalar_shift(bias, t)?)),
        }
    }

    /// ∫₀ᵗ δh dτ as a matrix.
    pub fn delta_h_integral(&self, bias: &BiasProfile<T>, n: usize, t: T) -> Result<CMatrix<T>> {
        match self {
            InducedFockRule::Tabulated { .. } => {
                Ok(self.table_integral_to(t)? - self.table_integral_to(T::zero())?)
            }
            _ => Ok(CMatrix::identity(n, n) * re(self.scalar_shift_integral(bias, t)?)),
        }
    }

    fn table_integral_to(&self, t: T) -> Result<CMatrix<T>> {
        let InducedFockRule::Tabulated { times, shifts } = self else { unreachable!() };
        let k = table_segment(times, t)?;
        let half = T::lit(0.5);
        let n = shifts[0].nrows();
        let mut acc = CMatrix::zeros(n, n);
        for j in 0..k {
            acc += (&shifts[j] + &shifts[j + 1]) * re((times[j + 1] - times[j]) * half);
        }
        let w = (t - times[k]) / (times[k + 1] - times[k]);
        let v = &shifts[k] * re(T::one() - w) + &shifts[k + 1] * re(w);
        acc += (&shifts[k] + v) * re((t - times[k]) * half);
        Ok(acc)
    }

    /// δh(∞).
    pub fn settled(&self, bias: &BiasProfile<T>, n: usize) -> CMatrix<T> {
        match self {
            InducedFockRule::Tabulated { shifts, .. } => shifts[shifts.len() - 1].clone(),
            InducedFockRule::HalfSum => {
                let s = (bias.settled_shift(Lead::L) + bias.settled_shift(Lead::R)) * T::lit(0.5);
                CMatrix::identity(n, n) * re(s)
            }
            InducedFockRule::None => CMatrix::zeros(n, n),
        }
    }

    pub fn settle_time(&self) -> T {
        match self {
            InducedFockRule::Tabulated { times, .. } => times[times.len() - 1],
            _ => T::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;
    use proptest::prelude::*;

    fn c(a: f64, b: f64) -> Complex<f64> {
        Complex::new(a, b)
    }

    #[test]
    fn single_site_benchmarks() {
        let m = build_single_site(0.0, 0.1, 0.1, 0.0).unwrap();
        assert_eq!(m.n_orb(), 1);
        assert_eq!(m.lambda_total()[(0, 0)], c(0.2, 0.0));
        let closed = build_single_site(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(closed.lambda_total()[(0, 0)], c(0.0, 0.0));
        let d = build_single_site(0.0f64, 0.04, 0.04, 0.0).unwrap();
        assert!((d.lambda_min() - 0.08).abs() < 1e-15);
        assert!(matches!(
            build_single_site(0.0, -0.1, 0.1, 0.0),
            Err(Error::NegativeLinewidth { lead: "L", .. })
        ));
    }

    #[test]
    fn chain_reduces_to_single_site() {
        assert_eq!(build_chain(1, 0.3, 1.0, 0.1, 0.2, 0.0).unwrap(), build_single_site(0.3, 0.1, 0.2, 0.0).unwrap());
    }

    #[test]
    fn chain_spectra() {
        let m2 = build_chain(2, 0.0f64, 1.0, 0.1, 0.1, 0.0).unwrap();
        let v = hermitian_eig(&m2.h0).values;
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        let m10 = build_chain(10, 0.0, 1.0, 0.1, 0.1, 0.0).unwrap();
        let v = hermitian_eig(&m10.h0).values;
        assert!(v[0] > -2.0 && v[9] < 2.0);
        assert_eq!(m10.lambda_l[(0, 0)], c(0.1, 0.0));
        assert_eq!(m10.lambda_r[(9, 9)], c(0.1, 0.0));
        assert_eq!(m10.lambda_r[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn non_hermitian_h0_is_rejected() {
        let mut h = CMatrix::<f64>::zeros(2, 2);
        h[(0, 1)] = c(1.0, 0.0);
        let z = CMatrix::zeros(2, 2);
        let err = DeviceModel::new(h, z.clone(), z, 0.0).unwrap_err();
        assert!(err.to_string().contains("h0 not Hermitian"));
    }

    #[test]
    fn indefinite_linewidth_is_rejected() {
        let lam = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.1, 0.0), c(-0.1, 0.0)]));
        let err = DeviceModel::new(CMatrix::zeros(2, 2), lam, CMatrix::zeros(2, 2), 0.0).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }

    #[test]
    fn smooth_step_values() {
        let b = BiasProfile::new(BiasKind::Zero, BiasKind::smooth_step(-2.0, 0.1)).unwrap();
        assert_eq!(bias_at(&b, Lead::R, 0.0).unwrap(), 0.0);
        let at_a = bias_at(&b, Lead::R, 0.1).unwrap();
        assert!((at_a - 2.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((bias_at(&b, Lead::R, 50.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(bias_at(&b, Lead::L, 3.0).unwrap(), 0.0);
        assert_eq!(b.settled_shift(Lead::R), 2.0);
    }

    #[test]
    fn smooth_step_integral_matches_quadrature() {
        let k = BiasKind::smooth_step(1.5f64, 0.3);
        for t in [0.01, 0.3, 2.0, 17.0] {
            let q = crate::quadrature::adaptive_real(|s| k.voltage(s).unwrap(), 0.0, t, 1e-14).unwrap();
            assert!((k.voltage_integral(t).unwrap() - q).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_bias() {
        let k = BiasKind::Tabulated { times: vec![0.0f64, 1.0, 3.0], values: vec![0.0, 1.0, 1.0] };
        k.validate().unwrap();
        assert_eq!(k.voltage(0.5).unwrap(), 0.5);
        assert!((k.voltage_integral(2.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(k.voltage(4.0), Err(Error::OutOfTableRange { .. })));
        let jump = BiasKind::Tabulated { times: vec![0.0, 1.0, 1.0], values: vec![0.0, 0.0, 1.0] };
        assert!(matches!(jump.validate(), Err(Error::BadTable(_))));
    }

    #[test]
    fn half_sum_rule() {
        let b = BiasProfile::new(BiasKind::Step { amplitude: 1.0 }, BiasKind::smooth_step(-3.0, 0.1)).unwrap();
        let r = InducedFockRule::HalfSum;
        let t = 0.25;
        let expect = 0.5 * (b.level_shift(Lead::L, t).unwrap() + b.level_shift(Lead::R, t).unwrap());
        let dh = r.delta_h(&b, 2, t).unwrap();
        assert_eq!(dh[(0, 0)], c(expect, 0.0));
        assert_eq!(dh[(1, 1)], c(expect, 0.0));
        assert_eq!(dh[(0, 1)], c(0.0, 0.0));
        assert_eq!(r.settled(&b, 1)[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn tabulated_rule_integral() {
        let s0 = CMatrix::<f64>::zeros(1, 1);
        let s1 = CMatrix::from_element(1, 1, c(2.0, 0.0));
        let r = InducedFockRule::Tabulated { times: vec![0.0, 2.0], shifts: vec![s0, s1] };
        r.validate(1).unwrap();
        let b = BiasProfile::zero();
        assert!((r.delta_h(&b, 1, 1.0).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((r.delta_h_integral(&b, 1, 2.0).unwrap()[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn linewidth_examples() {
        let v = CMatrix::from_element(1, 1, c(0.3, 0.0));
        let g = CMatrix::from_element(1, 1, c(0.0, -1.0));
        assert!((linewidth_from_surface_gf(&v, &g).unwrap()[(0, 0)] - c(0.09, 0.0)).norm() < 1e-15);
        let g_real = CMatrix::from_element(1, 1, c(-0.7, 0.0));
        assert!(linewidth_from_surface_gf(&v, &g_real).unwrap()[(0, 0)].norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn smooth_step_is_continuous_and_monotone(amp in -5.0f64..5.0, a in 0.01f64..2.0, t in 0.0f64..20.0) {
            let k = BiasKind::smooth_step(amp, a);
            let v0 = k.voltage(t).unwrap();
            let v1 = k.voltage(t + 1e-3).unwrap();
            prop_assert!((v1 - v0) * amp >= -1e-15);
            prop_assert!(v0.abs() <= amp.abs() + 1e-15);
            prop_assert!(k.voltage(1e-12).unwrap().abs() < 1e-10 * (1.0 + amp.abs() / a));
        }

        #[test]
        fn surface_linewidth_is_psd(a in -1.0f64..1.0, b in -1.0f64..1.0, g1 in 0.01f64..2.0, g2 in 0.01f64..2.0, x in -1.0f64..1.0) {
            let h = CMatrix::from_fn(2, 2, |i, j| c(a + i as f64 * 0.3, b * j as f64));
            let mut g = CMatrix::from_fn(2, 2, |i, j| if i == j { c(x, 0.0) } else { c(0.2, 0.0) });
            g[(0, 0)].im = -g1;
            g[(1, 1)].im = -g2;
            let lam = linewidth_from_surface_gf(&h, &g).unwrap();
            prop_assert!(hermitian_eig(&lam).values[0] > -1e-12);
        }
    }
}
