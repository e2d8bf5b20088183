//! RK4 integration of σ̇ = (−i[h_D(t), σ] − Σ_α Q_α)/ħ and current extraction.
//!
//! Time is in fs. Currents are J_α = −tr Q_α in e·eV/ħ internally and μA in records.

use crate::cso::{causality_transforms_for, cso_q, CausalityTransforms, LeadWindows};
use crate::error::{Error, Result};
use crate::ground_state::{ground_state_closed_form, DEFAULT_EPS_MIN};
use crate::linalg::{commutator, hermitian_eig, hermiticity_defect, hermitize, trace};
use crate::model::{BiasProfile, DeviceModel, InducedFockRule, Lead};
use crate::scalar::{im, re, CMatrix, Real};
use crate::units::{HBAR_EV_FS, MICROAMP_PER_NATURAL};
use crate::wbl::{dissipator, PlusMode, WblState};
use nalgebra::ComplexField;

/// Default step, fs.
pub const DEFAULT_DT: f64 = 0.02;
/// Settling window, fs.
pub const SETTLE_WINDOW: f64 = 5.0;
/// Settling threshold on |dJ/dt|, μA/fs.
pub const SETTLE_SLOPE: f64 = 1e-4;
const EIG_SLACK: f64 = 1e-6;
/// Steps starting before this time (fs) are refined.
pub const STARTUP_WINDOW: f64 = 1.0;
const STARTUP_DENSITY: f64 = 4.0;

/// Closure used for Q_α.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorKind {
    WblAdiabatic,
    WblExact,
    Cso,
}

impl DissipatorKind {
    pub fn name(self) -> &'static str {
        match self {
            DissipatorKind::WblAdiabatic => "wbl_adiabatic",
            DissipatorKind::WblExact => "wbl_exact",
            DissipatorKind::Cso => "cso",
        }
    }
}

/// σ at time t (fs).
#[derive(Debug, Clone, PartialEq)]
pub struct SimState<T: Real> {
    pub t: T,
    pub sigma: CMatrix<T>,
}

/// What one RHS evaluation produced.
#[derive(Debug, Clone)]
pub struct Rhs<T: Real> {
    /// dσ/dt in 1/fs.
    pub dsigma: CMatrix<T>,
    /// J_α = −tr Q_α in e·eV/ħ.
    pub current: [T; 2],
    /// Largest Hermiticity defect of the K^α used.
    pub k_defect: T,
}

/// Per-step bookkeeping returned next to the new state.
#[derive(Debug, Clone)]
pub struct StepInfo<T: Real> {
    /// Rhs at the start of the step.
    pub start: Rhs<T>,
    /// max|σ − σ†| before symmetrization.
    pub drift: T,
    /// |Δtr σ/dt − RK4-weighted (J_L + J_R)/ħ| in 1/fs.
    pub continuity: T,
    pub k_defect: T,
}

/// Largest deviations seen over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T: Real> {
    pub max_drift: T,
    pub max_hermiticity: T,
    pub max_step_continuity: T,
    pub max_k_defect: T,
    pub min_eigenvalue: T,
    pub max_eigenvalue: T,
}

/// Sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T: Real> {
    /// fs
    pub times: Vec<T>,
    /// μA
    pub j_l: Vec<T>,
    /// μA
    pub j_r: Vec<T>,
    pub trace_sigma: Vec<T>,
    /// occupations[i][k] is the diagonal σ_ii at sample k.
    pub occupations: Vec<Vec<T>>,
    pub meta: Vec<(String, String)>,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> TraceRecord<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub(crate) fn empty(n: usize, meta: Vec<(String, String)>) -> Self {
        TraceRecord {
            times: Vec::new(),
            j_l: Vec::new(),
            j_r: Vec::new(),
            trace_sigma: Vec::new(),
            occupations: vec![Vec::new(); n],
            meta,
            diagnostics: Diagnostics {
                max_drift: T::zero(),
                max_hermiticity: T::zero(),
                max_step_continuity: T::zero(),
                max_k_defect: T::zero(),
                min_eigenvalue: T::lit(f64::INFINITY),
                max_eigenvalue: T::lit(f64::NEG_INFINITY),
            },
        }
    }

    pub(crate) fn push(&mut self, t: T, sigma: &CMatrix<T>, current: [T; 2]) {
        self.times.push(t);
        self.j_l.push(current[0] * T::lit(MICROAMP_PER_NATURAL));
        self.j_r.push(current[1] * T::lit(MICROAMP_PER_NATURAL));
        self.trace_sigma.push(trace(sigma).re);
        for (i, occ) in self.occupations.iter_mut().enumerate() {
            occ.push(sigma[(i, i)].re);
        }
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// d(tr σ)/dt − (J_L + J_R)/ħ at interior samples, 1/fs.
    ///
    /// Uses the five-point stencil where it fits and central differences at the
    /// second and second-to-last samples. Assumes uniform sampling.
    pub fn continuity_residuals(&self) -> Vec<T> {
        let n = self.len();
        if n < 3 {
            return Vec::new();
        }
        let h = (self.times[n - 1] - self.times[0]) / T::lit((n - 1) as f64);
        let scale = T::lit(1.0 / (MICROAMP_PER_NATURAL * HBAR_EV_FS));
        let tr = &self.trace_sigma;
        (1..n - 1)
            .map(|k| {
                let d = if k >= 2 && k + 2 < n {
                    (tr[k - 2] - tr[k - 1] * T::lit(8.0) + tr[k + 1] * T::lit(8.0) - tr[k + 2]) / (h * T::lit(12.0))
                } else {
                    (tr[k + 1] - tr[k - 1]) / (h * T::lit(2.0))
                };
                (d - (self.j_l[k] + self.j_r[k]) * scale).abs()
            })
            .collect()
    }

    pub fn max_continuity_residual(&self) -> T {
        self.continuity_residuals().into_iter().fold(T::zero(), |a, b| a.max(b))
    }

    /// Earliest sample after which |dJ_L/dt| and |dJ_R/dt| stay below `slope`
    /// (μA/fs) for `window` fs.
    pub fn settling_time_with(&self, window: T, slope: T) -> Option<T> {
        let n = self.len();
        if n < 3 {
            return None;
        }
        let bad: Vec<bool> = (0..n)
            .map(|k| {
                let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
                let dt = self.times[b] - self.times[a];
                let dl = (self.j_l[b] - self.j_l[a]).abs() / dt;
                let dr = (self.j_r[b] - self.j_r[a]).abs() / dt;
                !(dl < slope && dr < slope)
            })
            .collect();
        let mut next_bad = vec![n; n + 1];
        for k in (0..n).rev() {
            next_bad[k] = if bad[k] { k } else { next_bad[k + 1] };
        }
        let end = self.times[n - 1];
        for k in 0..n {
            if self.times[k] + window > end {
                return None;
            }
            let nb = next_bad[k];
            if nb == n || self.times[nb] > self.times[k] + window {
                return Some(self.times[k]);
            }
        }
        None
    }

    /// Settling time with the default 5 fs / 1e-4 μA·fs⁻¹ criterion.
    pub fn settling_time(&self) -> Option<T> {
        self.settling_time_with(T::lit(SETTLE_WINDOW), T::lit(SETTLE_SLOPE))
    }

    /// Mean of the last `span` fs of J_L and J_R, μA.
    pub fn tail_mean(&self, span: T) -> (T, T) {
        let end = self.times[self.len() - 1];
        let (mut sl, mut sr, mut c) = (T::zero(), T::zero(), T::zero());
        for k in 0..self.len() {
            if self.times[k] >= end - span {
                sl += self.j_l[k];
                sr += self.j_r[k];
                c += T::one();
            }
        }
        (sl / c, sr / c)
    }
}

/// Run settings.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions<T: Real> {
    pub dt: T,
    pub t_end: T,
    pub kind: DissipatorKind,
    pub eps_min: T,
    /// Record every `decimation`-th step.
    pub decimation: usize,
}

impl<T: Real> RunOptions<T> {
    pub fn new(t_end: T, dt: T, kind: DissipatorKind) -> Self {
        RunOptions { dt, t_end, kind, eps_min: T::lit(DEFAULT_EPS_MIN), decimation: 1 }
    }
}

enum Closure<T: Real> {
    Wbl,
    Exact(Vec<WblState<T>>),
    Cso { h: CMatrix<T>, ct: [CausalityTransforms<T>; 2] },
}

/// One integration owning its model view and closure caches.
pub struct Simulation<'a, T: Real> {
    model: &'a DeviceModel<T>,
    bias: &'a BiasProfile<T>,
    rule: &'a InducedFockRule<T>,
    opts: RunOptions<T>,
    coupled: bool,
    closure: Closure<T>,
}

fn hbar<T: Real>() -> T {
    T::lit(HBAR_EV_FS)
}

impl<'a, T: Real> Simulation<'a, T> {
    pub fn new(
        model: &'a DeviceModel<T>,
        bias: &'a BiasProfile<T>,
        rule: &'a InducedFockRule<T>,
        opts: RunOptions<T>,
    ) -> Result<Self> {
        if !(opts.dt > T::zero()) || !opts.dt.is_finite() {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if !(opts.t_end > T::zero()) || !opts.t_end.is_finite() {
            return Err(Error::InvalidArgument("t_end must be positive".into()));
        }
        if opts.decimation == 0 {
            return Err(Error::InvalidArgument("decimation must be at least 1".into()));
        }
        bias.lead(Lead::L).validate()?;
        bias.lead(Lead::R).validate()?;
        rule.validate(model.n_orb())?;
        let coupled = model.lambda_total().iter().any(|z| z.modulus() > T::zero());
        let closure = match opts.kind {
            DissipatorKind::WblAdiabatic => Closure::Wbl,
            DissipatorKind::WblExact => Closure::Exact(Vec::new()),
            DissipatorKind::Cso => {
                let n = model.n_orb();
                let h = hermitize(&(&model.h0 + rule.settled(bias, n)));
                let mk = |lead: Lead| -> Result<CausalityTransforms<T>> {
                    let w = LeadWindows::new(model.mu0, bias.settled_shift(lead), opts.eps_min)?;
                    causality_transforms_for(&h, model.lambda(lead), w)
                };
                let ct = [mk(Lead::L)?, mk(Lead::R)?];
                Closure::Cso { h, ct }
            }
        };
        Ok(Simulation { model, bias, rule, opts, coupled, closure })
    }

    pub fn options(&self) -> &RunOptions<T> {
        &self.opts
    }

    /// RHS at time `t`; the exact closure also needs the dt/2 grid index.
    fn rhs_at(&mut self, t: T, half_steps: Option<usize>, sigma: &CMatrix<T>) -> Result<Rhs<T>> {
        let i = im(T::one());
        let (h, q) = match &mut self.closure {
            Closure::Cso { h, ct } => {
                let q = [cso_q(sigma, &ct[0]), cso_q(sigma, &ct[1])];
                (h.clone(), Some((q, T::zero())))
            }
            Closure::Wbl => {
                let st = WblState::at(self.model, self.bias, self.rule, t)?;
                let q = if self.coupled {
                    let out = dissipator(&st, sigma, self.model, self.opts.eps_min, PlusMode::Adiabatic)?;
                    let kd = hermiticity_defect(&out.k[0]).max(hermiticity_defect(&out.k[1]));
                    Some((out.q, kd))
                } else {
                    None
                };
                (st.h_now, q)
            }
            Closure::Exact(history) => {
                let half_steps =
                    half_steps.ok_or_else(|| Error::InvalidArgument("exact closure needs grid times".into()))?;
                while history.len() <= half_steps {
                    let tk = self.opts.dt * T::lit(history.len() as f64 * 0.5);
                    history.push(WblState::at(self.model, self.bias, self.rule, tk)?);
                }
                let hist = &history[..=half_steps];
                let st = &hist[half_steps];
                let q = if self.coupled {
                    let out = dissipator(st, sigma, self.model, self.opts.eps_min, PlusMode::Exact(hist))?;
                    let kd = hermiticity_defect(&out.k[0]).max(hermiticity_defect(&out.k[1]));
                    Some((out.q, kd))
                } else {
                    None
                };
                (st.h_now.clone(), q)
            }
        };
        let mut ds = commutator(&h, sigma) * (-i);
        let (current, k_defect) = match q {
            Some((q, kd)) => {
                ds -= &q[0] + &q[1];
                ([-trace(&q[0]).re, -trace(&q[1]).re], kd)
            }
            None => ([T::zero(), T::zero()], T::zero()),
        };
        Ok(Rhs { dsigma: ds / re(hbar::<T>()), current, k_defect })
    }

    /// Rhs at the state's own time, which must lie on the dt/2 grid.
    pub fn rhs(&mut self, state: &SimState<T>) -> Result<Rhs<T>> {
        let k = self.half_index(state.t)?;
        self.rhs_at(state.t, Some(k), &state.sigma)
    }

    fn half_index(&self, t: T) -> Result<usize> {
        let x = (t / (self.opts.dt * T::lit(0.5))).to_f();
        let k = x.round();
        let tol = (16.0 * T::eps().to_f() * x.abs()).max(1e-6);
        if k < 0.0 || (x - k).abs() > tol {
            return Err(Error::InvalidArgument("state time is off the dt/2 grid".into()));
        }
        Ok(k as usize)
    }

    fn grid_time(&self, half_steps: usize) -> T {
        self.opts.dt * T::lit(half_steps as f64 * 0.5)
    }

    /// One classical RK4 step of length dt followed by symmetrization and the bound check.
    pub fn step_rk4(&mut self, state: &SimState<T>) -> Result<(SimState<T>, StepInfo<T>)> {
        let k0 = self.half_index(state.t)?;
        let nodes = [0, 1, 2].map(|j| (self.grid_time(k0 + j), Some(k0 + j)));
        self.rk4(state, self.opts.dt, nodes)
    }

    /// RK4 step of arbitrary length `h`. Not available for the exact closure.
    pub fn step_rk4_by(&mut self, state: &SimState<T>, h: T) -> Result<(SimState<T>, StepInfo<T>)> {
        if matches!(self.closure, Closure::Exact(_)) {
            return Err(Error::InvalidArgument("exact closure steps on its own grid".into()));
        }
        let half = h * T::lit(0.5);
        self.rk4(state, h, [(state.t, None), (state.t + half, None), (state.t + h, None)])
    }

    fn rk4(&mut self, state: &SimState<T>, dt: T, nodes: [(T, Option<usize>); 3]) -> Result<(SimState<T>, StepInfo<T>)> {
        let half = re(dt * T::lit(0.5));
        let s = &state.sigma;
        let r1 = self.rhs_at(nodes[0].0, nodes[0].1, s)?;
        let r2 = self.rhs_at(nodes[1].0, nodes[1].1, &(s + &r1.dsigma * half))?;
        let r3 = self.rhs_at(nodes[1].0, nodes[1].1, &(s + &r2.dsigma * half))?;
        let r4 = self.rhs_at(nodes[2].0, nodes[2].1, &(s + &r3.dsigma * re(dt)))?;
        let incr = (&r1.dsigma + (&r2.dsigma + &r3.dsigma) * re(T::lit(2.0)) + &r4.dsigma) * re(dt / T::lit(6.0));
        let raw = s + incr;
        let t_new = nodes[2].0;
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: t_new.to_f(), last_good: state.t.to_f() });
        }
        let drift = hermiticity_defect(&raw);
        let sigma = hermitize(&raw);
        let w = |r: &Rhs<T>| r.current[0] + r.current[1];
        let j_avg = (w(&r1) + (w(&r2) + w(&r3)) * T::lit(2.0) + w(&r4)) / T::lit(6.0);
        let continuity = ((trace(&sigma).re - trace(s).re) / dt - j_avg / hbar::<T>()).abs();
        let ev = hermitian_eig(&sigma);
        let (lo, hi) = (ev.values[0], ev.values[ev.values.len() - 1]);
        if lo < T::lit(-EIG_SLACK) || hi > T::lit(2.0 + EIG_SLACK) {
            return Err(Error::StateCorrupt { t: t_new.to_f(), min: lo.to_f(), max: hi.to_f() });
        }
        let k_defect = r1.k_defect.max(r2.k_defect).max(r3.k_defect).max(r4.k_defect);
        Ok((SimState { t: t_new, sigma }, StepInfo { start: r1, drift, continuity, k_defect }))
    }

    /// Substeps per dt inside the start-up window.
    ///
    /// A bias ramp starting at t = 0 makes K^α(t) − K^α(0) ~ t² ln t, which caps a
    /// uniform RK4 grid at third order. Splitting the steps below
    /// [`STARTUP_WINDOW`] into m ∝ dt^(−1/3) pieces restores dt⁴ scaling.
    fn startup_substeps(&self) -> usize {
        if !matches!(self.closure, Closure::Wbl) || self.bias.is_zero() {
            return 1;
        }
        (STARTUP_DENSITY * (STARTUP_WINDOW / self.opts.dt.to_f()).cbrt()).ceil().max(1.0) as usize
    }

    /// Advance one dt, refined into `m` substeps when m > 1.
    fn advance(&mut self, state: &SimState<T>, m: usize) -> Result<(SimState<T>, StepInfo<T>)> {
        if m == 1 {
            return self.step_rk4(state);
        }
        let k0 = self.half_index(state.t)?;
        let h = self.opts.dt / T::lit(m as f64);
        let mut cur = state.clone();
        let mut first: Option<StepInfo<T>> = None;
        for j in 0..m {
            let (mut next, info) = self.step_rk4_by(&cur, h)?;
            if j + 1 == m {
                next.t = self.grid_time(k0 + 2);
            }
            first = Some(match first {
                None => info,
                Some(mut f) => {
                    f.drift = f.drift.max(info.drift);
                    f.continuity = f.continuity.max(info.continuity);
                    f.k_defect = f.k_defect.max(info.k_defect);
                    f
                }
            });
            cur = next;
        }
        Ok((cur, first.unwrap()))
    }

    /// Integrate from σ(0) = `sigma0` to t_end.
    pub fn run_from(&mut self, sigma0: &CMatrix<T>) -> Result<TraceRecord<T>> {
        let n = self.model.n_orb();
        if sigma0.nrows() != n || sigma0.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: sigma0.nrows() });
        }
        let steps = (self.opts.t_end / self.opts.dt).to_f().round().max(1.0) as usize;
        let mut rec = TraceRecord::empty(n, self.meta(steps));
        let mut state = SimState { t: T::zero(), sigma: hermitize(sigma0) };
        let ev = hermitian_eig(&state.sigma);
        rec.diagnostics.min_eigenvalue = ev.values[0];
        rec.diagnostics.max_eigenvalue = ev.values[n - 1];
        let m = self.startup_substeps();
        for k in 0..steps {
            let sub = if state.t.to_f() < STARTUP_WINDOW { m } else { 1 };
            let (next, info) = self.advance(&state, sub)?;
            if k % self.opts.decimation == 0 {
                rec.push(state.t, &state.sigma, info.start.current);
            }
            let d = &mut rec.diagnostics;
            d.max_drift = d.max_drift.max(info.drift);
            d.max_hermiticity = d.max_hermiticity.max(hermiticity_defect(&next.sigma));
            d.max_step_continuity = d.max_step_continuity.max(info.continuity);
            d.max_k_defect = d.max_k_defect.max(info.k_defect);
            let ev = hermitian_eig(&next.sigma);
            d.min_eigenvalue = d.min_eigenvalue.min(ev.values[0]);
            d.max_eigenvalue = d.max_eigenvalue.max(ev.values[n - 1]);
            state = next;
        }
        if steps % self.opts.decimation == 0 {
            let end = self.rhs(&state)?;
            rec.push(state.t, &state.sigma, end.current);
        }
        Ok(rec)
    }

    fn meta(&self, steps: usize) -> Vec<(String, String)> {
        vec![
            ("kind".into(), self.opts.kind.name().into()),
            ("dt_fs".into(), format!("{}", self.opts.dt.to_f())),
            ("t_end_fs".into(), format!("{}", self.opts.t_end.to_f())),
            ("steps".into(), steps.to_string()),
            ("eps_min_ev".into(), format!("{}", self.opts.eps_min.to_f())),
            ("n_orb".into(), self.model.n_orb().to_string()),
            ("mu0_ev".into(), format!("{}", self.model.mu0.to_f())),
        ]
    }
}

/// Propagate from the equilibrium ground state.
pub fn run<T: Real>(
    model: &DeviceModel<T>,
    bias: &BiasProfile<T>,
    rule: &InducedFockRule<T>,
    opts: RunOptions<T>,
) -> Result<TraceRecord<T>> {
    let gs = ground_state_closed_form(model, opts.eps_min)?;
    Simulation::new(model, bias, rule, opts)?.run_from(&gs.sigma0)
}

/// Richardson ratio max|J(dt) − J(dt/2)| / max|J(dt/2) − J(dt/4)| on the common grid.
pub fn richardson_ratio<T: Real>(
    model: &DeviceModel<T>,
    bias: &BiasProfile<T>,
    rule: &InducedFockRule<T>,
    opts: RunOptions<T>,
) -> Result<T> {
    let at = |f: usize| {
        let mut o = opts;
        o.dt = opts.dt / T::lit(f as f64);
        o.decimation = f;
        run(model, bias, rule, o)
    };
    let (a, b, c) = (at(1)?, at(2)?, at(4)?);
    let err = |x: &TraceRecord<T>, y: &TraceRecord<T>| {
        x.j_l
            .iter()
            .zip(&y.j_l)
            .chain(x.j_r.iter().zip(&y.j_r))
            .fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs()))
    };
    Ok(err(&a, &b) / err(&b, &c))
}
