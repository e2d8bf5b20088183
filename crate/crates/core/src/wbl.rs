//! Wide-band-limit dissipator Q_α = K^α + {Λ^α, σ} with K^α = P^α + P^α†.
//!
//! Times are in fs at the API and converted to ħ/eV internally.

use crate::error::{Error, Result};
use crate::linalg::{eig, expm, max_diff, regularized_log, scalar_osc_kernel};
use crate::model::{BiasProfile, DeviceModel, InducedFockRule, Lead};
use crate::scalar::{im, re, CMatrix, Real};
use crate::units::HBAR_EV_FS;
use nalgebra::{Complex, ComplexField};

const EULER_GAMMA: f64 = 0.5772156649015329;

fn hbar<T: Real>() -> T {
    T::lit(HBAR_EV_FS)
}

/// Everything the dissipator needs to know about the clock at time t.
#[derive(Debug, Clone)]
pub struct WblState<T: Real> {
    /// fs
    pub t: T,
    /// ∫₀ᵗ h_D dτ in eV·fs.
    pub phase_h: CMatrix<T>,
    /// ∫₀ᵗ Δε^α dτ in eV·fs, indexed by [`Lead::index`].
    pub phase_bias: [T; 2],
    /// U^(−)(t) = exp(−i·phase_h/ħ − Λt/ħ).
    pub u_minus: CMatrix<T>,
    pub h_now: CMatrix<T>,
    /// Δε^α(t).
    pub bias_now: [T; 2],
    /// ∫₀ᵗ δh dτ when δh is a multiple of the identity.
    pub phase_scalar: Option<T>,
}

impl<T: Real> WblState<T> {
    /// State at time `t` with every phase integral evaluated in closed form.
    pub fn at(model: &DeviceModel<T>, bias: &BiasProfile<T>, rule: &InducedFockRule<T>, t: T) -> Result<Self> {
        let n = model.n_orb();
        let dh_int = rule.delta_h_integral(bias, n, t)?;
        let phase_h = &model.h0 * re(t) + &dh_int;
        let phase_bias = [
            bias.level_shift_integral(Lead::L, t)?,
            bias.level_shift_integral(Lead::R, t)?,
        ];
        let bias_now = [bias.level_shift(Lead::L, t)?, bias.level_shift(Lead::R, t)?];
        let h_now = &model.h0 + rule.delta_h(bias, n, t)?;
        let lam = model.lambda_total();
        let (u_minus, phase_scalar) = if rule.is_scalar() {
            let theta = rule.scalar_shift_integral(bias, t)?;
            let a0 = eig(&(&model.h0 - &lam * im(T::one())))?;
            let tn = t / hbar::<T>();
            let ph = im(-theta / hbar::<T>()).exp();
            (a0.map(|z| (im(-tn) * z).exp() * ph), Some(theta))
        } else {
            (expm(&(-(&phase_h * im(T::one()) + &lam * re(t)) / re(hbar::<T>()))), None)
        };
        Ok(WblState { t, phase_h, phase_bias, u_minus, h_now, bias_now, phase_scalar })
    }

    /// max |u_minus − expm(−i·phase_h/ħ − Λt/ħ)|.
    pub fn propagator_defect(&self, model: &DeviceModel<T>) -> T {
        let lam = model.lambda_total();
        let u = expm(&(-(&self.phase_h * im(T::one()) + &lam * re(self.t)) / re(hbar::<T>())));
        max_diff(&u, &self.u_minus)
    }

    /// B_α(t) = h_D(t) − iΛ − Δε^α(t)·I.
    fn b_matrix(&self, model: &DeviceModel<T>, lead: Lead) -> CMatrix<T> {
        let n = model.n_orb();
        &self.h_now - model.lambda_total() * im(T::one()) - CMatrix::identity(n, n) * re(self.bias_now[lead.index()])
    }
}

fn minus_two_i_over_pi<T: Real>() -> Complex<T> {
    im(-T::lit(2.0) / T::pi())
}

fn a0<T: Real>(model: &DeviceModel<T>) -> CMatrix<T> {
    &model.h0 - model.lambda_total() * im(T::one())
}

fn require_coupled<T: Real>(model: &DeviceModel<T>) -> Result<()> {
    if model.lambda_total().iter().all(|z| z.modulus() == T::zero()) {
        return Err(Error::InvalidArgument("WBL dissipator needs a nonzero line-width".into()));
    }
    Ok(())
}

/// P^(−)_α(t): the memory of the initial equilibrium.
pub fn p_minus<T: Real>(state: &WblState<T>, lead: Lead, model: &DeviceModel<T>, eps_min: T) -> Result<CMatrix<T>> {
    let lam_a = model.lambda(lead);
    if lam_a.iter().all(|z| z.modulus() == T::zero()) {
        let n = model.n_orb();
        return Ok(CMatrix::zeros(n, n));
    }
    require_coupled(model)?;
    let e = eig(&a0(model))?;
    let pre = minus_two_i_over_pi::<T>();
    if state.t <= T::zero() {
        let l = e.try_map(|z| regularized_log(z, model.mu0, eps_min))?;
        return Ok(l * lam_a * pre);
    }
    let tn = state.t / hbar::<T>();
    let kappa = e.try_map(|z| scalar_osc_kernel(z, model.mu0, tn))?;
    let phase = im(state.phase_bias[lead.index()] / hbar::<T>()).exp();
    Ok(&state.u_minus * kappa * lam_a * (pre * phase))
}

/// Adiabatic P^(+)_α(t), built from the instantaneous B_α(t).
pub fn p_plus_adiabatic<T: Real>(
    state: &WblState<T>,
    lead: Lead,
    model: &DeviceModel<T>,
    eps_min: T,
) -> Result<CMatrix<T>> {
    let n = model.n_orb();
    let lam_a = model.lambda(lead);
    if state.t <= T::zero() || lam_a.iter().all(|z| z.modulus() == T::zero()) {
        return Ok(CMatrix::zeros(n, n));
    }
    require_coupled(model)?;
    let e = eig(&state.b_matrix(model, lead))?;
    let tn = state.t / hbar::<T>();
    let l = e.try_map(|z| regularized_log(z, model.mu0, eps_min))?;
    let kappa = e.try_map(|z| scalar_osc_kernel(z, model.mu0, tn))?;
    let phase = im(state.phase_bias[lead.index()] / hbar::<T>()).exp();
    let u_alpha = &state.u_minus * phase;
    Ok((l - u_alpha * kappa) * lam_a * minus_two_i_over_pi::<T>())
}

/// Steady-state P_α(∞) = −(2i/π) L(B_α(∞)) Λ^α.
pub fn p_steady<T: Real>(
    model: &DeviceModel<T>,
    bias: &BiasProfile<T>,
    rule: &InducedFockRule<T>,
    lead: Lead,
    eps_min: T,
) -> Result<CMatrix<T>> {
    require_coupled(model)?;
    let n = model.n_orb();
    let b = &model.h0 + rule.settled(bias, n) - model.lambda_total() * im(T::one())
        - CMatrix::identity(n, n) * re(bias.settled_shift(lead));
    let l = eig(&b)?.try_map(|z| regularized_log(z, model.mu0, eps_min))?;
    Ok(l * model.lambda(lead) * minus_two_i_over_pi::<T>())
}

/// K_α(∞) = P_α(∞) + P_α(∞)†.
pub fn k_steady<T: Real>(
    model: &DeviceModel<T>,
    bias: &BiasProfile<T>,
    rule: &InducedFockRule<T>,
    lead: Lead,
    eps_min: T,
) -> Result<CMatrix<T>> {
    let p = p_steady(model, bias, rule, lead, eps_min)?;
    Ok(&p + p.adjoint())
}

/// Composite Simpson weights on `n` uniform intervals, with a 3/8 panel at the end for odd `n`.
fn simpson_weights<T: Real>(n: usize) -> Vec<T> {
    let mut w = vec![T::zero(); n + 1];
    match n {
        0 => {}
        1 => {
            w[0] = T::lit(0.5);
            w[1] = T::lit(0.5);
        }
        _ => {
            let (even, tail) = if n % 2 == 0 { (n, 0) } else { (n - 3, 3) };
            for k in (0..even).step_by(2) {
                w[k] += T::lit(1.0 / 3.0);
                w[k + 1] += T::lit(4.0 / 3.0);
                w[k + 2] += T::lit(1.0 / 3.0);
            }
            if tail == 3 {
                let s = even;
                for (j, c) in [3.0, 9.0, 9.0, 3.0].iter().enumerate() {
                    w[s + j] += T::lit(c / 8.0);
                }
            }
        }
    }
    w
}

/// Exact P^(+)_α(t) from the propagation history on a uniform grid ending at t.
///
/// The energy integral is done in closed form, leaving
/// (2i/π)[∫₀ᵗ (g(s)e^{iμs} − I)/s ds + (ln(iEt) + γ)I]Λ^α with
/// g(s) = W⁻(t)W⁺(t − s) and E the distance from the cutoff to the tail anchor.
pub fn p_plus_exact<T: Real>(
    history: &[WblState<T>],
    lead: Lead,
    model: &DeviceModel<T>,
    eps_min: T,
) -> Result<CMatrix<T>> {
    let n = model.n_orb();
    let now = history.last().ok_or_else(|| Error::InvalidArgument("empty history".into()))?;
    let lam_a = model.lambda(lead);
    if now.t <= T::zero() || lam_a.iter().all(|z| z.modulus() == T::zero()) {
        return Ok(CMatrix::zeros(n, n));
    }
    require_coupled(model)?;
    let steps = history.len() - 1;
    if steps == 0 || history[0].t != T::zero() {
        return Err(Error::InvalidArgument("history must start at t = 0 and hold at least two states".into()));
    }
    let dt = now.t / T::lit(steps as f64);
    for (k, st) in history.iter().enumerate() {
        if (st.t - dt * T::lit(k as f64)).abs() > dt * T::lit(1e-6) {
            return Err(Error::InvalidArgument("history must be uniformly spaced".into()));
        }
    }
    let h = hbar::<T>();
    let mu = model.mu0;
    let idx = lead.index();
    let lam = model.lambda_total();
    let id = CMatrix::<T>::identity(n, n);

    // Integrand values at s_j = j·dt, j = 0..steps.
    let mut vals: Vec<CMatrix<T>> = Vec::with_capacity(steps + 1);
    let b_now = now.b_matrix(model, lead);
    vals.push((&b_now - &id * re(mu)) * im(-T::one()));
    if let Some(theta_t) = now.phase_scalar {
        let e0 = eig(&a0(model))?;
        for j in 1..=steps {
            let past = &history[steps - j];
            let theta_s = past.phase_scalar.ok_or_else(|| Error::InvalidArgument("mixed history".into()))?;
            let s_nat = (now.t - past.t) / h;
            let shift = (theta_t - theta_s - now.phase_bias[idx] + past.phase_bias[idx]) / h;
            let ph = im(mu * s_nat - shift).exp();
            let g = e0.map(|z| (im(-s_nat) * z).exp() * ph);
            vals.push((g - &id) / re(s_nat));
        }
    } else {
        let phi = |st: &WblState<T>| {
            (&st.phase_h - &lam * im(st.t) - &id * re(st.phase_bias[idx])) / re(h)
        };
        let w_minus = expm(&(phi(now) * im(-T::one())));
        for j in 1..=steps {
            let past = &history[steps - j];
            let s_nat = (now.t - past.t) / h;
            let g = &w_minus * expm(&(phi(past) * im(T::one()))) * im(mu * s_nat).exp();
            vals.push((g - &id) / re(s_nat));
        }
    }

    let assemble = |stride: usize| -> CMatrix<T> {
        let m = steps / stride;
        let w = simpson_weights::<T>(m);
        let ds = dt * T::lit(stride as f64) / h;
        let mut acc = CMatrix::zeros(n, n);
        for (k, wk) in w.iter().enumerate() {
            acc += &vals[k * stride] * re(*wk * ds);
        }
        let e_anchor = if eps_min < T::zero() { -eps_min } else { T::one() };
        let log_term = (im(e_anchor * now.t / h)).ln() + re(T::lit(EULER_GAMMA));
        (acc + &id * log_term) * lam_a * im(T::lit(2.0) / T::pi())
    };
    let fine = assemble(1);
    if steps >= 4 && steps % 2 == 0 {
        let coarse = assemble(2);
        let change = max_diff(&fine, &coarse);
        if change > T::lit(1e-5) {
            return Err(Error::GridTooCoarse { change: change.to_f() });
        }
    }
    Ok(fine)
}

/// Which P^(+) closure the dissipator uses.
#[derive(Debug, Clone, Copy)]
pub enum PlusMode<'a, T: Real> {
    Adiabatic,
    /// Exact form from a uniform history whose last entry is the current state.
    Exact(&'a [WblState<T>]),
}

/// Per-lead dissipation terms and their K parts.
#[derive(Debug, Clone)]
pub struct WblOutput<T: Real> {
    pub q: [CMatrix<T>; 2],
    pub k: [CMatrix<T>; 2],
}

/// K^α(t) = P + P†.
pub fn k_matrix<T: Real>(
    state: &WblState<T>,
    lead: Lead,
    model: &DeviceModel<T>,
    eps_min: T,
    mode: PlusMode<'_, T>,
) -> Result<CMatrix<T>> {
    let pm = p_minus(state, lead, model, eps_min)?;
    let pp = match mode {
        PlusMode::Adiabatic => p_plus_adiabatic(state, lead, model, eps_min)?,
        PlusMode::Exact(history) => p_plus_exact(history, lead, model, eps_min)?,
    };
    let p = pm + pp;
    Ok(&p + p.adjoint())
}

/// Q^α = K^α + {Λ^α, σ} for both leads.
pub fn dissipator<T: Real>(
    state: &WblState<T>,
    sigma: &CMatrix<T>,
    model: &DeviceModel<T>,
    eps_min: T,
    mode: PlusMode<'_, T>,
) -> Result<WblOutput<T>> {
    let mut q = Vec::with_capacity(2);
    let mut k = Vec::with_capacity(2);
    for lead in Lead::BOTH {
        let kk = k_matrix(state, lead, model, eps_min, mode)?;
        let lam = model.lambda(lead);
        q.push(&kk + lam * sigma + sigma * lam);
        k.push(kk);
    }
    let [ql, qr]: [CMatrix<T>; 2] = q.try_into().unwrap();
    let [kl, kr]: [CMatrix<T>; 2] = k.try_into().unwrap();
    Ok(WblOutput { q: [ql, qr], k: [kl, kr] })
}
