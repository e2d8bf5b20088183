//! Equilibrium density matrix of the device coupled to wide-band leads.

use crate::error::{Error, Result};
use crate::linalg::{eig, hermitian_eig, hermitize, inverse, log_tail, max_diff, regularized_log};
use crate::model::DeviceModel;
use crate::quadrature::{composite_gl_matrix, GaussLegendre};
use crate::scalar::{im, re, CMatrix, Real};

/// Default lower energy cutoff in eV.
pub const DEFAULT_EPS_MIN: f64 = -1000.0;

/// Default Gauss–Legendre points per panel.
pub const DEFAULT_N_QUAD: usize = 16;

/// Spin-summed σ_D(0) with eigenvalues in [0, 2].
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState<T: Real> {
    pub sigma0: CMatrix<T>,
    pub mu0: T,
}

impl<T: Real> GroundState<T> {
    pub fn occupations(&self) -> Vec<T> {
        self.sigma0.diagonal().iter().map(|z| z.re).collect()
    }
}

/// G^{r,0}(ε) = [ε − h0 + iΛ]⁻¹.
pub fn retarded_gf0<T: Real>(model: &DeviceModel<T>, eps: T) -> Result<CMatrix<T>> {
    let n = model.n_orb();
    let m = CMatrix::identity(n, n) * re(eps) - &model.h0 + model.lambda_total() * im(T::one());
    let singular = || Error::SingularResolvent { energy: eps.to_f() };
    let g = inverse(&m).ok_or_else(singular)?;
    let residual = max_diff(&(&m * &g), &CMatrix::identity(n, n));
    if !(residual <= T::lit(1e-10).max(T::eps() * T::lit(1e3))) {
        return Err(singular());
    }
    Ok(g)
}

fn check_cutoff<T: Real>(model: &DeviceModel<T>, eps_min: T) -> Result<()> {
    let lam = model.lambda_total();
    let lam_norm = hermitian_eig(&lam).values.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if lam_norm == T::zero() {
        return Err(Error::InvalidArgument("ground state needs a nonzero line-width".into()));
    }
    let bottom = hermitian_eig(&model.h0).values[0];
    if bottom - eps_min < T::lit(50.0) * lam_norm || !(eps_min < model.mu0) {
        return Err(Error::InvalidArgument(format!(
            "eps_min {} must lie at least 50·|Λ| below the spectrum and below mu0",
            eps_min.to_f()
        )));
    }
    Ok(())
}

/// Panel breakpoints on [eps_min, mu0], fine near each resonance and geometric away from it.
fn breakpoints<T: Real>(centers: &[(T, T)], eps_min: T, mu0: T) -> Vec<T> {
    let mut pts = vec![eps_min, mu0];
    let inside = |x: T| x > eps_min && x < mu0;
    for &(c, w) in centers {
        let w = w.max(T::lit(1e-6));
        for j in -80..=80 {
            let x = c + w * T::lit(j as f64 * 0.25);
            if inside(x) {
                pts.push(x);
            }
        }
        for sign in [T::one(), -T::one()] {
            let mut d = w * T::lit(20.0);
            loop {
                d *= T::lit(1.25);
                let x = c + sign * d;
                if !inside(x) {
                    break;
                }
                pts.push(x);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let span = mu0 - eps_min;
    let mut out: Vec<T> = Vec::with_capacity(pts.len());
    for x in pts {
        if out.last().map_or(true, |&l| x - l > span * T::lit(1e-14)) {
            out.push(x);
        } else if x == mu0 {
            *out.last_mut().unwrap() = x;
        }
    }
    // Long stretches between clusters get geometric refinement as well.
    let mut refined = Vec::with_capacity(out.len());
    for w in out.windows(2) {
        refined.push(w[0]);
        let gap = w[1] - w[0];
        let k = (gap.to_f() / 50.0).ceil().min(200.0) as usize;
        for j in 1..k {
            refined.push(w[0] + gap * T::lit(j as f64 / k as f64));
        }
    }
    refined.push(*out.last().unwrap());
    refined
}

/// σ_D(0) = (2/π) ∫_{−∞}^{μ⁰} G^r Λ G^a dε by composite Gauss–Legendre on
/// [eps_min, μ⁰] plus the analytic tail below eps_min.
pub fn ground_state_density<T: Real>(model: &DeviceModel<T>, eps_min: T, n_quad: usize) -> Result<GroundState<T>> {
    check_cutoff(model, eps_min)?;
    let n = model.n_orb();
    let lam = model.lambda_total();
    let a0 = &model.h0 - &lam * im(T::one());
    let e = eig(&a0)?;
    let centers: Vec<(T, T)> = e.values.iter().map(|z| (z.re, z.im.abs())).collect();
    let breaks = breakpoints(&centers, eps_min, model.mu0);

    let two_over_pi = re(T::lit(2.0) / T::pi());
    let integrate = |nq: usize| -> Result<CMatrix<T>> {
        let gl = GaussLegendre::<T>::new(nq);
        let mut err = None;
        let v = composite_gl_matrix(&gl, &breaks, |x| match retarded_gf0(model, x) {
            Ok(g) => &g * &lam * g.adjoint(),
            Err(er) => {
                err = Some(er);
                CMatrix::zeros(n, n)
            }
        });
        match err {
            Some(er) => Err(er),
            None => Ok(v * two_over_pi),
        }
    };
    let coarse = integrate(n_quad.max(2))?;
    let fine = integrate(2 * n_quad.max(2))?;
    let change = max_diff(&coarse, &fine);
    if change > T::lit(1e-8) {
        return Err(Error::QuadratureNotConverged { change: change.to_f() });
    }
    let tail = e.try_map(|z| log_tail(z, eps_min))?;
    let tail = (&tail - tail.adjoint()) * im(T::one() / T::pi());
    Ok(GroundState { sigma0: hermitize(&(fine + tail)), mu0: model.mu0 })
}

/// Closed form σ_D(0) = (i/π)(L − L†) with L the regularized ∫(ε − h0 + iΛ)⁻¹.
pub fn ground_state_closed_form<T: Real>(model: &DeviceModel<T>, eps_min: T) -> Result<GroundState<T>> {
    let a0 = &model.h0 - model.lambda_total() * im(T::one());
    let l = eig(&a0)?.try_map(|z| regularized_log(z, model.mu0, eps_min))?;
    let s = (&l - l.adjoint()) * im(T::one() / T::pi());
    Ok(GroundState { sigma0: hermitize(&s), mu0: model.mu0 })
}

/// Single-site closed form 1 + (2/π) arctan((μ⁰ − ε_d)/Λ).
pub fn single_site_occupation(eps_d: f64, lambda: f64, mu0: f64) -> f64 {
    1.0 + 2.0 / std::f64::consts::PI * ((mu0 - eps_d) / lambda).atan()
}

/// Largest deviation of the spectrum of `sigma` from [0, 2].
pub fn occupation_bounds<T: Real>(sigma: &CMatrix<T>) -> (T, T) {
    let v = hermitian_eig(&hermitize(sigma)).values;
    (v[0], v[v.len() - 1])
}
