//! Landauer steady-state current and transmission.

use crate::error::{Error, Result};
use crate::linalg::{inverse, trace};
use crate::model::{BiasKind, BiasProfile, DeviceModel, InducedFockRule, Lead};
use crate::quadrature::adaptive_real;
use crate::scalar::{im, re, CMatrix, CVector, Real};
use crate::units::natural_to_microamp;
use nalgebra::Complex;

/// Spin degeneracy of the spin-summed current.
pub const SPIN: f64 = 2.0;

/// Both transmission conventions at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission<T: Real> {
    /// (2/π) tr[G^r Λ^R G^a Λ^L]: the per-spin integrand of the current in e·eV/ħ.
    pub over_2pi: T,
    /// 4 tr[Λ^L G^r Λ^R G^a], dimensionless and in [0, n_orb].
    pub standard: T,
}

fn resolvent<T: Real>(h: &CMatrix<T>, sigma_r: &CMatrix<T>, eps: T) -> Result<CMatrix<T>> {
    let n = h.nrows();
    inverse(&(CMatrix::identity(n, n) * re(eps) - h - sigma_r)).ok_or(Error::SingularResolvent { energy: eps.to_f() })
}

/// WBL transmission through h_inf with the model's line-widths.
pub fn transmission_wbl_matrix<T: Real>(model: &DeviceModel<T>, h_inf: &CMatrix<T>, eps: T) -> Result<Transmission<T>> {
    let g = resolvent(h_inf, &(model.lambda_total() * im(-T::one())), eps)?;
    let ga = g.adjoint();
    let standard = trace(&(&model.lambda_l * &g * &model.lambda_r * &ga)).re * T::lit(4.0);
    Ok(Transmission { over_2pi: standard / (T::lit(2.0) * T::pi()), standard })
}

/// WBL transmission with h_D(∞) = h0 + dh_inf·I.
pub fn transmission_wbl<T: Real>(model: &DeviceModel<T>, eps: T, dh_inf: T) -> Result<Transmission<T>> {
    let n = model.n_orb();
    transmission_wbl_matrix(model, &(&model.h0 + CMatrix::identity(n, n) * re(dh_inf)), eps)
}

/// Settled steady current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyCurrent<T: Real> {
    /// Current from lead L into the device, e·eV/ħ, spin-summed.
    pub j_left: T,
    /// Current from lead R into the device; equals −j_left.
    pub j_right: T,
}

impl<T: Real> SteadyCurrent<T> {
    pub fn left_microamp(&self) -> f64 {
        natural_to_microamp(self.j_left.to_f())
    }
}

/// J_L = 2 ∫ [f_L − f_R] T_over_2pi dε for a profile that has settled.
pub fn steady_current_for_profile<T: Real>(
    model: &DeviceModel<T>,
    bias: &BiasProfile<T>,
    rule: &InducedFockRule<T>,
) -> Result<SteadyCurrent<T>> {
    let n = model.n_orb();
    let h_inf = &model.h0 + rule.settled(bias, n);
    let mu_l = model.mu0 + bias.settled_shift(Lead::L);
    let mu_r = model.mu0 + bias.settled_shift(Lead::R);
    if mu_l == mu_r {
        return Ok(SteadyCurrent { j_left: T::zero(), j_right: T::zero() });
    }
    let (lo, hi, sign) = if mu_l > mu_r { (mu_r, mu_l, T::one()) } else { (mu_l, mu_r, -T::one()) };
    let f = |e: T| transmission_wbl_matrix(model, &h_inf, e).map(|t| t.over_2pi).unwrap_or(T::lit(f64::NAN));
    let integral = adaptive_real(f, lo, hi, T::lit(1e-12))?;
    if !integral.is_finite() {
        return Err(Error::SingularResolvent { energy: f64::NAN });
    }
    let j = integral * T::lit(SPIN) * sign;
    Ok(SteadyCurrent { j_left: j, j_right: -j })
}

/// Steady current for settled voltages (ΔV^L, ΔV^R).
pub fn steady_current<T: Real>(
    model: &DeviceModel<T>,
    bias_inf: (T, T),
    rule: &InducedFockRule<T>,
) -> Result<SteadyCurrent<T>> {
    let profile = BiasProfile::new(BiasKind::Step { amplitude: bias_inf.0 }, BiasKind::Step { amplitude: bias_inf.1 })?;
    steady_current_for_profile(model, &profile, rule)
}

/// One discrete lead level and its coupling vector to the device orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadLevel<T: Real> {
    pub energy: T,
    /// Γ^l = v v†.
    pub coupling: CVector<T>,
}

/// A lead represented by broadened discrete levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadLevelSet<T: Real> {
    pub levels: Vec<LeadLevel<T>>,
    pub delta: T,
}

/// Default broadening of discrete lead levels in eV.
pub const DEFAULT_DELTA: f64 = 1e-3;

/// (Σ^r, Σ^a) with Σ^{r,a} = Σ_l Γ^l / (ε − ε_l ± iδ).
pub fn sigma_lorentzian_sum<T: Real>(levels: &LeadLevelSet<T>, eps: T) -> Result<(CMatrix<T>, CMatrix<T>)> {
    if !(levels.delta > T::zero()) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let n = levels.levels.first().map_or(0, |l| l.coupling.len());
    let mut sr = CMatrix::zeros(n, n);
    for l in &levels.levels {
        if l.coupling.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: l.coupling.len() });
        }
        let w = Complex::new(T::one(), T::zero()) / Complex::new(eps - l.energy, levels.delta);
        sr += &l.coupling * l.coupling.adjoint() * w;
    }
    let sa = sr.adjoint();
    Ok((sr, sa))
}

/// Transmission with energy-dependent self-energies, Γ_α = i(Σ^r − Σ^a).
pub fn transmission_general<T: Real>(
    h_inf: &CMatrix<T>,
    left: &LeadLevelSet<T>,
    right: &LeadLevelSet<T>,
    eps: T,
) -> Result<Transmission<T>> {
    let (srl, sal) = sigma_lorentzian_sum(left, eps)?;
    let (srr, sar) = sigma_lorentzian_sum(right, eps)?;
    let g = resolvent(h_inf, &(&srl + &srr), eps)?;
    let gl = (&srl - &sal) * im(T::one());
    let gr = (&srr - &sar) * im(T::one());
    let standard = trace(&(&gl * &g * &gr * g.adjoint())).re;
    Ok(Transmission { over_2pi: standard / (T::lit(2.0) * T::pi()), standard })
}

/// Spin-summed J_L over the window between `mu_l` and `mu_r` with discrete-level leads.
pub fn steady_current_general<T: Real>(
    h_inf: &CMatrix<T>,
    left: &LeadLevelSet<T>,
    right: &LeadLevelSet<T>,
    mu_l: T,
    mu_r: T,
) -> Result<T> {
    if mu_l == mu_r {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if mu_l > mu_r { (mu_r, mu_l, T::one()) } else { (mu_l, mu_r, -T::one()) };
    let f = |e: T| transmission_general(h_inf, left, right, e).map(|t| t.over_2pi).unwrap_or(T::lit(f64::NAN));
    let v = adaptive_real(f, lo, hi, T::lit(1e-10))?;
    Ok(v * T::lit(SPIN) * sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain, build_single_site};
    use nalgebra::DVector;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn resonance_transmission() {
        let m = build_single_site(0.0, 0.1, 0.1, 0.0).unwrap();
        let t: Transmission<f64> = transmission_wbl(&m, 0.0, 0.0).unwrap();
        assert!((t.standard - 1.0).abs() < 1e-14);
        assert!((t.over_2pi - 1.0 / (2.0 * PI)).abs() < 1e-14);
        let far = transmission_wbl(&m, 20.0, 0.0).unwrap();
        assert!((far.standard - 1e-4).abs() < 1e-7);
    }

    #[test]
    fn benchmark_closed_form() {
        let m = build_single_site(0.0, 0.1, 0.1, 0.0).unwrap();
        let j = steady_current(&m, (0.0, -2.0), &InducedFockRule::HalfSum).unwrap();
        let per_spin = 2.0 / PI * (0.01 / 0.2) * ((1.0f64 / 0.2).atan() - (-1.0f64 / 0.2).atan());
        assert!((per_spin - 0.0874).abs() < 1e-4);
        assert!((j.j_left + 2.0 * per_spin).abs() < 1e-10);
        assert_eq!(j.j_right, -j.j_left);
    }

    #[test]
    fn trivial_currents_vanish() {
        let m = build_single_site(0.3, 0.1, 0.1, 0.0).unwrap();
        assert_eq!(steady_current(&m, (0.0, 0.0), &InducedFockRule::HalfSum).unwrap().j_left, 0.0);
        let r0 = build_single_site(0.0, 0.1, 0.0, 0.0).unwrap();
        let j: f64 = steady_current(&r0, (1.0, -1.0), &InducedFockRule::None).unwrap().j_left;
        assert!(j.abs() < 1e-15);
    }

    #[test]
    fn lorentzian_on_resonance() {
        let set = LeadLevelSet {
            levels: vec![LeadLevel { energy: 0.5, coupling: DVector::from_element(1, Complex::new(0.2, 0.0)) }],
            delta: 1e-3,
        };
        let (sr, sa) = sigma_lorentzian_sum(&set, 0.5).unwrap();
        assert!((sr[(0, 0)] - Complex::new(0.0, -0.04 / 1e-3)).norm() < 1e-9);
        assert_eq!(sa, sr.adjoint());
        let (far, _): (CMatrix<f64>, _) = sigma_lorentzian_sum(&set, 10.5).unwrap();
        assert!((far[(0, 0)] - Complex::new(0.4, -0.04e-3) / (100.0 + 1e-6)).norm() < 1e-12);
    }

    #[test]
    fn dense_levels_recover_wide_band() {
        let (w, n) = (4.0, 400);
        let d = w / n as f64;
        let g: f64 = 0.01;
        let levels = (0..n)
            .map(|k| LeadLevel {
                energy: -w / 2.0 + (k as f64 + 0.5) * d,
                coupling: DVector::from_element(1, Complex::new(g.sqrt(), 0.0)),
            })
            .collect();
        let set = LeadLevelSet { levels, delta: 0.1 };
        let (sr, _) = sigma_lorentzian_sum(&set, 0.0).unwrap();
        let eta = 1.0 / d;
        assert!((sr[(0, 0)].im + PI * eta * g).abs() < 0.05 * PI * eta * g);
    }

    #[test]
    fn general_formula_matches_wbl_for_flat_lead() {
        let m = build_chain(2, 0.0, 0.5, 0.1, 0.1, 0.0).unwrap();
        // A single level with huge δ and matching weight acts as a flat band near ε = 0.
        let big: f64 = 1e6;
        let mk = |orb: usize| {
            let mut v = DVector::from_element(2, Complex::new(0.0, 0.0));
            v[orb] = Complex::new((0.1 * big).sqrt(), 0.0);
            LeadLevelSet { levels: vec![LeadLevel { energy: 0.0, coupling: v }], delta: big }
        };
        let t1 = transmission_general(&m.h0, &mk(0), &mk(1), 0.3).unwrap();
        let t2: Transmission<f64> = transmission_wbl(&m, 0.3, 0.0).unwrap();
        assert!((t1.standard - t2.standard).abs() < 1e-6);
    }

    #[test]
    fn antisymmetric_under_bias_reversal() {
        let m = build_single_site(0.0, 0.1, 0.1, 0.0).unwrap();
        for v in [0.1, 0.7, 3.0] {
            let a: f64 = steady_current(&m, (0.0, v), &InducedFockRule::HalfSum).unwrap().j_left;
            let b = steady_current(&m, (0.0, -v), &InducedFockRule::HalfSum).unwrap().j_left;
            assert!((a + b).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn standard_transmission_is_bounded(n in 1usize..6, eps in -3.0f64..3.0, hop in -1.5f64..1.5, ll in 0.01f64..1.0, lr in 0.01f64..1.0) {
            let m = build_chain(n, 0.0, hop, ll, lr, 0.0).unwrap();
            let t = transmission_wbl(&m, eps, 0.0).unwrap();
            prop_assert!(t.standard >= -1e-12 && t.standard <= n as f64 + 1e-12);
        }
    }
}
