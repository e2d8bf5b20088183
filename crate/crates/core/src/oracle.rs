//! Brute-force propagation of device plus finite flat-band leads.
//!
//! Each lead is a set of discrete levels whose couplings reproduce a target
//! line-width matrix. Occupied single-particle orbitals of the full system are
//! propagated, so the cost grows with the number of occupied states rather
//! than with the full density matrix.

use crate::error::{Error, Result};
use crate::linalg::{complexify, expm, hermitian_eig, hermitize, HermitianEigen};
use crate::model::{BiasProfile, DeviceModel, InducedFockRule, Lead};
use crate::propagator::TraceRecord;
use crate::scalar::{im, re, CMatrix, CVector, Real};
use crate::units::{HBAR_EV_FS, MICROAMP_PER_NATURAL};
use nalgebra::{Complex, ComplexField, DMatrix};

/// Largest full-system dimension accepted.
pub const DIMENSION_LIMIT: usize = 2000;
/// Default oracle step, fs.
pub const DEFAULT_ORACLE_DT: f64 = 0.005;
/// Default number of levels per lead channel.
pub const DEFAULT_LEVELS: usize = 400;
const FERMI_TOL: f64 = 1e-9;

/// Flat band of `n_levels` per eigen-channel of Λ^α, uniform on
/// [center − W/2, center + W/2] at cell midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedLead<T: Real> {
    pub n_levels: usize,
    pub bandwidth: T,
    pub center: T,
    /// Level energies of one channel.
    pub energies: Vec<T>,
    /// (λ_j, u_j) for each nonzero eigen-channel.
    pub channels: Vec<(T, CVector<T>)>,
}

impl<T: Real> DiscretizedLead<T> {
    /// Coupling amplitude sqrt(λ W/(π n)) of a channel with eigenvalue λ.
    pub fn amplitude(&self, lambda: T) -> T {
        (lambda * self.bandwidth / (T::pi() * T::lit(self.n_levels as f64))).sqrt()
    }

    pub fn total_levels(&self) -> usize {
        self.n_levels * self.channels.len()
    }

    /// (energy, coupling vector) for every level, channel-major.
    pub fn levels(&self) -> Vec<(T, CVector<T>)> {
        let mut out = Vec::with_capacity(self.total_levels());
        for (lam, u) in &self.channels {
            let v = u * re(self.amplitude(*lam));
            for &e in &self.energies {
                out.push((e, v.clone()));
            }
        }
        out
    }

    /// π η Σ_k v_k v_k† with η = n/W.
    pub fn implied_lambda(&self, n_orb: usize) -> CMatrix<T> {
        let eta = T::lit(self.n_levels as f64) / self.bandwidth;
        let mut acc = CMatrix::zeros(n_orb, n_orb);
        for (lam, u) in &self.channels {
            let a = self.amplitude(*lam);
            acc += u * u.adjoint() * re(T::pi() * eta * a * a);
        }
        acc
    }

    /// 2πħ n/W in fs.
    pub fn recurrence_time(&self) -> T {
        T::lit(2.0 * HBAR_EV_FS) * T::pi() * T::lit(self.n_levels as f64) / self.bandwidth
    }
}

/// Realize Λ^α = Σ_j λ_j u_j u_j† by one flat band per nonzero channel.
pub fn discretize_lead<T: Real>(
    target_lambda: &CMatrix<T>,
    bandwidth: T,
    n_levels: usize,
    center: T,
) -> Result<DiscretizedLead<T>> {
    if !(bandwidth > T::zero()) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    if n_levels < 10 {
        return Err(Error::InvalidArgument("need at least 10 levels per lead".into()));
    }
    let eig = hermitian_eig(&hermitize(target_lambda));
    let scale = eig.values.iter().fold(T::zero(), |a, b| a.max(b.abs()));
    let tol = T::lit(1e-12) * scale.max(T::lit(1e-300));
    if let Some(&lo) = eig.values.first() {
        if lo < -T::lit(1e-10).max(tol) {
            return Err(Error::NotPsd { what: "target line-width", min_eigenvalue: lo.to_f() });
        }
    }
    let channels = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > tol)
        .map(|(j, &l)| (l, eig.vectors.column(j).into_owned()))
        .collect();
    let w = bandwidth / T::lit(n_levels as f64);
    let start = center - bandwidth * T::lit(0.5);
    let energies = (0..n_levels).map(|k| start + w * (T::lit(k as f64) + T::lit(0.5))).collect();
    Ok(DiscretizedLead { n_levels, bandwidth, center, energies, channels })
}

/// How the full system is prepared at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Isolated device and leads filled separately, coupling present from t = 0.
    Partitioned,
    /// Ground state of the coupled system.
    PartitionFree,
}

impl Init {
    pub fn name(self) -> &'static str {
        match self {
            Init::Partitioned => "partitioned",
            Init::PartitionFree => "partition_free",
        }
    }
}

/// Oracle run settings.
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions<T: Real> {
    pub dt: T,
    pub t_end: T,
    pub decimation: usize,
    pub init: Init,
}

impl<T: Real> OracleOptions<T> {
    pub fn new(t_end: T, init: Init) -> Self {
        OracleOptions { dt: T::lit(DEFAULT_ORACLE_DT), t_end, decimation: 1, init }
    }
}

/// Oracle trajectory and full-system bookkeeping.
#[derive(Debug, Clone)]
pub struct OracleRun<T: Real> {
    pub record: TraceRecord<T>,
    /// |tr σ_full(t_end) − tr σ_full(0)|.
    pub full_trace_drift: T,
    pub recurrence_time: T,
    pub dimension: usize,
}

struct FullSystem<T: Real> {
    n_orb: usize,
    dim: usize,
    /// Lead index of each level, energies, and offsets.
    lead_of: Vec<usize>,
    energies: Vec<T>,
    /// C_α: n_orb × dim, nonzero only in lead α columns.
    coupling: [CMatrix<T>; 2],
}

impl<T: Real> FullSystem<T> {
    fn new(n_orb: usize, leads: [&DiscretizedLead<T>; 2]) -> Result<Self> {
        let dim = n_orb + leads[0].total_levels() + leads[1].total_levels();
        if dim > DIMENSION_LIMIT {
            return Err(Error::DimensionTooLarge { dim, limit: DIMENSION_LIMIT });
        }
        let mut lead_of = vec![usize::MAX; n_orb];
        let mut energies = vec![T::zero(); n_orb];
        let mut coupling = [CMatrix::zeros(n_orb, dim), CMatrix::zeros(n_orb, dim)];
        for (a, lead) in leads.iter().enumerate() {
            for (e, v) in lead.levels() {
                if v.len() != n_orb {
                    return Err(Error::DimensionMismatch { expected: n_orb, found: v.len() });
                }
                let col = energies.len();
                coupling[a].set_column(col, &v);
                lead_of.push(a);
                energies.push(e);
            }
        }
        Ok(FullSystem { n_orb, dim, lead_of, energies, coupling })
    }

    /// Full h at time t.
    fn hamiltonian(&self, hd: &CMatrix<T>, shifts: [T; 2]) -> CMatrix<T> {
        let n = self.n_orb;
        let mut h = CMatrix::zeros(self.dim, self.dim);
        h.view_mut((0, 0), (n, n)).copy_from(hd);
        for k in n..self.dim {
            h[(k, k)] = re(self.energies[k] + shifts[self.lead_of[k]]);
        }
        let c = &self.coupling[0] + &self.coupling[1];
        let cs = c.columns(n, self.dim - n).into_owned();
        h.view_mut((0, n), (n, self.dim - n)).copy_from(&cs);
        h.view_mut((n, 0), (self.dim - n, n)).copy_from(&cs.adjoint());
        h
    }

    /// Orthonormal basis of device orbitals plus the lead vectors C_α† e_i.
    fn coupling_subspace(&self) -> CMatrix<T> {
        let mut basis: Vec<CVector<T>> = Vec::new();
        for i in 0..self.n_orb {
            let mut e = CVector::zeros(self.dim);
            e[i] = re(T::one());
            basis.push(e);
        }
        for c in &self.coupling {
            for i in 0..self.n_orb {
                let mut v: CVector<T> = c.row(i).adjoint();
                let norm0 = v.norm();
                if norm0 == T::zero() {
                    continue;
                }
                for _ in 0..2 {
                    for b in &basis {
                        let p = b.dotc(&v);
                        v -= b * p;
                    }
                }
                let nv = v.norm();
                if nv > norm0 * T::lit(1e-10) {
                    basis.push(v / re(nv));
                }
            }
        }
        let mut q = CMatrix::zeros(self.dim, basis.len());
        for (j, b) in basis.iter().enumerate() {
            q.set_column(j, b);
        }
        q
    }
}

/// V† ψ, using real products when the eigenvectors are real.
fn adjoint_times<T: Real>(eig: &HermitianEigen<T>, psi: &CMatrix<T>) -> CMatrix<T> {
    if eig.vectors.iter().all(|z| z.im == T::zero()) {
        let vt = eig.vectors.map(|z| z.re).transpose();
        let pr = &vt * psi.map(|z| z.re);
        let pi = &vt * psi.map(|z| z.im);
        pr.zip_map(&pi, Complex::new)
    } else {
        eig.vectors.ad_mul(psi)
    }
}

fn full_eig<T: Real>(h: &CMatrix<T>) -> HermitianEigen<T> {
    if h.iter().all(|z| z.im == T::zero()) {
        let real = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)].re);
        let se = real.symmetric_eigen();
        let n = h.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut vecs = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vecs.set_column(dst, &se.eigenvectors.column(src));
        }
        HermitianEigen { values, vectors: complexify(&vecs) }
    } else {
        hermitian_eig(h)
    }
}

/// Spin-summed occupation at zero temperature; half filling exactly at μ.
fn fill<T: Real>(e: T, mu: T) -> T {
    let tol = T::lit(FERMI_TOL);
    if e < mu - tol {
        T::lit(2.0)
    } else if e <= mu + tol {
        T::one()
    } else {
        T::zero()
    }
}

struct Orbitals<T: Real> {
    psi: CMatrix<T>,
    f: Vec<T>,
}

fn initial_orbitals<T: Real>(
    model: &DeviceModel<T>,
    sys: &FullSystem<T>,
    init: Init,
) -> Result<Orbitals<T>> {
    let mu = model.mu0;
    let n = sys.n_orb;
    let mut cols: Vec<CVector<T>> = Vec::new();
    let mut f = Vec::new();
    match init {
        Init::Partitioned => {
            let dev = hermitian_eig(&model.h0);
            for (j, &e) in dev.values.iter().enumerate() {
                let occ = fill(e, mu);
                if occ > T::zero() {
                    let mut v = CVector::zeros(sys.dim);
                    v.rows_mut(0, n).copy_from(&dev.vectors.column(j));
                    cols.push(v);
                    f.push(occ);
                }
            }
            for k in n..sys.dim {
                let occ = fill(sys.energies[k], mu);
                if occ > T::zero() {
                    let mut v = CVector::zeros(sys.dim);
                    v[k] = re(T::one());
                    cols.push(v);
                    f.push(occ);
                }
            }
        }
        Init::PartitionFree => {
            let h = sys.hamiltonian(&model.h0, [T::zero(), T::zero()]);
            let eig = full_eig(&h);
            let at_mu = eig.values.iter().filter(|&&e| (e - mu).abs() <= T::lit(FERMI_TOL)).count();
            if at_mu > 1 {
                return Err(Error::DegenerateFermiLevel { energy: mu.to_f(), count: at_mu });
            }
            for (j, &e) in eig.values.iter().enumerate() {
                let occ = fill(e, mu);
                if occ > T::zero() {
                    cols.push(eig.vectors.column(j).into_owned());
                    f.push(occ);
                }
            }
        }
    }
    let mut psi = CMatrix::zeros(sys.dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        psi.set_column(j, c);
    }
    Ok(Orbitals { psi, f })
}

/// Device σ, currents J_α (e·eV/ħ) from the device rows `a` and the
/// coupling-weighted lead rows `b_α` of the orbitals.
fn observables<T: Real>(a: &CMatrix<T>, b: [&CMatrix<T>; 2], f: &[T]) -> (CMatrix<T>, [T; 2]) {
    let mut af = a.clone();
    for (m, mut col) in af.column_iter_mut().enumerate() {
        col *= re(f[m]);
    }
    let sigma = &af * a.adjoint();
    let cur = [af.dotc(b[0]).im * T::lit(2.0), af.dotc(b[1]).im * T::lit(2.0)];
    (sigma, cur)
}

fn scale_rows<T: Real>(m: &mut CMatrix<T>, d: &[Complex<T>]) {
    for mut col in m.column_iter_mut() {
        for (x, &s) in col.iter_mut().zip(d) {
            *x *= s;
        }
    }
}

/// Propagate the full system and sample device observables.
pub fn propagate_full<T: Real>(
    model: &DeviceModel<T>,
    leads: [&DiscretizedLead<T>; 2],
    bias: &BiasProfile<T>,
    rule: &InducedFockRule<T>,
    opts: OracleOptions<T>,
) -> Result<OracleRun<T>> {
    if !(opts.dt > T::zero()) || !(opts.t_end > T::zero()) || opts.decimation == 0 {
        return Err(Error::InvalidArgument("dt, t_end and decimation must be positive".into()));
    }
    bias.lead(Lead::L).validate()?;
    bias.lead(Lead::R).validate()?;
    rule.validate(model.n_orb())?;
    let sys = FullSystem::new(model.n_orb(), leads)?;
    let n = sys.n_orb;
    let orbs = initial_orbitals(model, &sys, opts.init)?;
    let f = orbs.f;
    let mut psi = orbs.psi;
    let hbar = T::lit(HBAR_EV_FS);
    let weight = |p: &CMatrix<T>| -> T {
        p.column_iter().zip(&f).fold(T::zero(), |acc, (c, &fm)| acc + c.norm_squared() * fm)
    };
    let full0 = weight(&psi);

    let steps = (opts.t_end / opts.dt).to_f().round().max(1.0) as usize;
    let settle = bias.settle_time().max(rule.settle_time());
    let settle_step = ((settle / opts.dt).to_f().ceil().max(0.0) as usize).min(steps);

    let meta = vec![
        ("kind".to_string(), "oracle".to_string()),
        ("init".to_string(), opts.init.name().to_string()),
        ("dt_fs".to_string(), format!("{}", opts.dt.to_f())),
        ("t_end_fs".to_string(), format!("{}", opts.t_end.to_f())),
        ("dimension".to_string(), sys.dim.to_string()),
        ("levels_l".to_string(), leads[0].n_levels.to_string()),
        ("levels_r".to_string(), leads[1].n_levels.to_string()),
        ("bandwidth_l_ev".to_string(), format!("{}", leads[0].bandwidth.to_f())),
        ("bandwidth_r_ev".to_string(), format!("{}", leads[1].bandwidth.to_f())),
    ];
    let mut rec = TraceRecord::empty(n, meta);
    let sample = |rec: &mut TraceRecord<T>, t: T, a: &CMatrix<T>, b: [&CMatrix<T>; 2]| {
        let (sigma, cur) = observables(a, b, &f);
        let ev = hermitian_eig(&hermitize(&sigma));
        let d = &mut rec.diagnostics;
        d.min_eigenvalue = d.min_eigenvalue.min(ev.values[0]);
        d.max_eigenvalue = d.max_eigenvalue.max(ev.values[n - 1]);
        rec.push(t, &sigma, cur);
    };

    // Split stepping while h(t) still changes.
    let q = sys.coupling_subspace();
    let qa = q.adjoint();
    let ct = [sys.coupling[0].transpose(), sys.coupling[1].transpose()];
    for k in 0..settle_step {
        let t = opts.dt * T::lit(k as f64);
        if k % opts.decimation == 0 {
            let a = psi.rows(0, n).into_owned();
            sample(&mut rec, t, &a, [&ct[0].tr_mul(&psi), &ct[1].tr_mul(&psi)]);
        }
        let tm = t + opts.dt * T::lit(0.5);
        let hd = &model.h0 + rule.delta_h(bias, n, tm)?;
        let shifts = [bias.level_shift(Lead::L, tm)?, bias.level_shift(Lead::R, tm)?];
        let half_phase: Vec<Complex<T>> = (0..sys.dim)
            .map(|j| {
                if j < n {
                    re(T::one())
                } else {
                    let e = sys.energies[j] + shifts[sys.lead_of[j]];
                    im(-e * opts.dt * T::lit(0.5) / hbar).exp()
                }
            })
            .collect();
        // V = device block + couplings, confined to span(q).
        let mut vq = CMatrix::zeros(sys.dim, q.ncols());
        for j in 0..q.ncols() {
            let col = q.column(j);
            let dev = col.rows(0, n).into_owned();
            let mut out = CVector::zeros(sys.dim);
            let mut top = &hd * &dev;
            for c in &sys.coupling {
                top += c * &col;
                out += c.adjoint() * &dev;
            }
            out.rows_mut(0, n).copy_from(&top);
            vq.set_column(j, &out);
        }
        let mq = hermitize(&(&qa * vq));
        let r = mq.nrows();
        let ev = expm(&(mq * im(-opts.dt / hbar))) - CMatrix::identity(r, r);
        scale_rows(&mut psi, &half_phase);
        let y = &ev * q.ad_mul(&psi);
        for (m, mut col) in psi.column_iter_mut().enumerate() {
            for j in 0..q.ncols() {
                col.axpy(y[(j, m)], &q.column(j), re(T::one()));
            }
        }
        scale_rows(&mut psi, &half_phase);
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: (t + opts.dt).to_f(), last_good: t.to_f() });
        }
    }

    // Exact propagation once h is constant.
    let t_s = opts.dt * T::lit(settle_step as f64);
    let hd = &model.h0 + rule.settled(bias, n);
    let h = sys.hamiltonian(&hd, [bias.settled_shift(Lead::L), bias.settled_shift(Lead::R)]);
    let eig = full_eig(&h);
    let c0 = adjoint_times(&eig, &psi);
    // Transposed projectors, N × n_orb, so every product below is a column dot.
    let rd = eig.vectors.rows(0, n).transpose();
    let rc = [eig.vectors.tr_mul(&ct[0]), eig.vectors.tr_mul(&ct[1])];
    let mut phased = [rd.clone(), rc[0].clone(), rc[1].clone()];
    let mut phase = vec![re(T::zero()); sys.dim];
    let mut tau_end = T::zero();
    for k in settle_step..=steps {
        if k % opts.decimation != 0 {
            continue;
        }
        let t = opts.dt * T::lit(k as f64);
        let tau = (t - t_s) / hbar;
        tau_end = tau;
        for (ph, &e) in phase.iter_mut().zip(&eig.values) {
            *ph = im(-e * tau).exp();
        }
        for (dst, src) in phased.iter_mut().zip([&rd, &rc[0], &rc[1]]) {
            dst.copy_from(src);
            scale_rows(dst, &phase);
        }
        let [a, b0, b1] = &phased;
        sample(&mut rec, t, &a.tr_mul(&c0), [&b0.tr_mul(&c0), &b1.tr_mul(&c0)]);
    }
    let mut z = c0;
    let end_phase: Vec<_> = eig.values.iter().map(|&e| im(-e * tau_end).exp()).collect();
    scale_rows(&mut z, &end_phase);
    let full_end = weight(&(&eig.vectors * &z));
    let recurrence = leads[0].recurrence_time().min(leads[1].recurrence_time());
    Ok(OracleRun {
        record: rec,
        full_trace_drift: (full_end - full0).abs(),
        recurrence_time: recurrence,
        dimension: sys.dim,
    })
}

/// Max |J_oracle − J_ref| over both leads on samples with t ≤ `window`,
/// divided by the peak |J_ref| there. Both records must share their time grid
/// up to a decimation factor.
pub fn normalized_deviation<T: Real>(oracle: &TraceRecord<T>, reference: &TraceRecord<T>, window: T) -> Result<T> {
    let mut peak = T::zero();
    let mut dev = T::zero();
    let mut j = 0;
    for (k, &t) in reference.times.iter().enumerate() {
        if t > window {
            break;
        }
        while j < oracle.len() && oracle.times[j] < t - T::lit(1e-9) {
            j += 1;
        }
        if j == oracle.len() || (oracle.times[j] - t).abs() > T::lit(1e-9) {
            return Err(Error::InvalidArgument("records do not share sample times".into()));
        }
        peak = peak.max(reference.j_l[k].abs()).max(reference.j_r[k].abs());
        dev = dev.max((oracle.j_l[j] - reference.j_l[k]).abs()).max((oracle.j_r[j] - reference.j_r[k]).abs());
    }
    if peak == T::zero() {
        return Ok(dev);
    }
    Ok(dev / peak)
}

/// Both initializations side by side.
#[derive(Debug, Clone)]
pub struct SchemeComparison<T: Real> {
    pub partitioned: OracleRun<T>,
    pub partition_free: OracleRun<T>,
    /// Mean J_L over the last `tail` fs, μA.
    pub steady_partitioned: T,
    pub steady_partition_free: T,
    /// |steady_partitioned − steady_partition_free| / |steady_partition_free|.
    pub relative_gap: T,
    /// max |J_L| + |J_R| of the partition-free run, μA.
    pub max_partition_free_current: T,
}

/// Run partitioned and partition-free oracles and compare their late-time currents.
pub fn compare_schemes<T: Real>(
    model: &DeviceModel<T>,
    leads: [&DiscretizedLead<T>; 2],
    bias: &BiasProfile<T>,
    rule: &InducedFockRule<T>,
    opts: OracleOptions<T>,
    tail: T,
) -> Result<SchemeComparison<T>> {
    let recurrence = leads[0].recurrence_time().min(leads[1].recurrence_time());
    if opts.t_end > recurrence * T::lit(0.5) {
        return Err(Error::InvalidArgument(format!(
            "t_end {} fs exceeds half the recurrence time {} fs",
            opts.t_end.to_f(),
            (recurrence * T::lit(0.5)).to_f()
        )));
    }
    let mut o = opts;
    o.init = Init::Partitioned;
    let partitioned = propagate_full(model, leads, bias, rule, o)?;
    o.init = Init::PartitionFree;
    let partition_free = propagate_full(model, leads, bias, rule, o)?;
    let sp = partitioned.record.tail_mean(tail).0;
    let sf = partition_free.record.tail_mean(tail).0;
    let gap = if sf == T::zero() { (sp - sf).abs() } else { ((sp - sf) / sf).abs() };
    let maxj = partition_free
        .record
        .j_l
        .iter()
        .zip(&partition_free.record.j_r)
        .fold(T::zero(), |m, (a, b)| m.max(a.abs()).max(b.abs()));
    Ok(SchemeComparison {
        partitioned,
        partition_free,
        steady_partitioned: sp,
        steady_partition_free: sf,
        relative_gap: gap,
        max_partition_free_current: maxj,
    })
}

/// Natural current units to μA, for callers mixing oracle output with Landauer values.
pub fn to_microamp<T: Real>(j: T) -> T {
    j * T::lit(MICROAMP_PER_NATURAL)
}
