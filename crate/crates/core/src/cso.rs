//! Complete-second-order dissipator for a time-independent device Hamiltonian.
//!
//! Γ^(±) are the principal-value level shifts and Λ^(±) the window broadenings
//! of the causality-transformed lead self-energies
//! Σ̃^< = −Γ^(+) + iΛ^(+) and Σ̃^> = Γ^(−) − iΛ^(−).

use crate::error::{Error, Result};
use crate::linalg::{anticommutator, commutator, hermitian_eig, hermitize};
use crate::model::{DeviceModel, Lead};
use crate::scalar::{im, re, CMatrix, Real};
use nalgebra::Complex;

/// Causality transforms of one lead, all Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalityTransforms<T: Real> {
    pub gamma_plus: CMatrix<T>,
    pub gamma_minus: CMatrix<T>,
    pub lambda_plus: CMatrix<T>,
    pub lambda_minus: CMatrix<T>,
}

impl<T: Real> CausalityTransforms<T> {
    pub fn zeros(n: usize) -> Self {
        let z = CMatrix::zeros(n, n);
        CausalityTransforms { gamma_plus: z.clone(), gamma_minus: z.clone(), lambda_plus: z.clone(), lambda_minus: z }
    }

    /// Σ̃^<.
    pub fn lesser(&self) -> CMatrix<T> {
        -&self.gamma_plus + &self.lambda_plus * im(T::one())
    }

    /// Σ̃^>.
    pub fn greater(&self) -> CMatrix<T> {
        &self.gamma_minus - &self.lambda_minus * im(T::one())
    }
}

/// Energy windows of one lead: occupied (lower, mu) and empty (mu, upper).
#[derive(Debug, Clone, Copy)]
pub struct LeadWindows<T: Real> {
    pub lower: T,
    pub mu: T,
    pub upper: T,
}

impl<T: Real> LeadWindows<T> {
    /// Windows symmetric about the shifted chemical potential.
    pub fn new(mu0: T, shift: T, eps_min: T) -> Result<Self> {
        if !(eps_min < mu0) {
            return Err(Error::InvalidArgument("eps_min must lie below mu0".into()));
        }
        let half = mu0 - eps_min;
        Ok(LeadWindows { lower: eps_min + shift, mu: mu0 + shift, upper: mu0 + shift + half })
    }

    fn indicator(e: T, a: T, b: T) -> T {
        if e > a && e < b {
            T::one()
        } else if e == a || e == b {
            T::lit(0.5)
        } else {
            T::zero()
        }
    }

    /// (1/π) PV ∫_a^b dε / (E − ε).
    fn pv(e: T, a: T, b: T) -> T {
        ((e - a).abs().ln() - (e - b).abs().ln()) / T::pi()
    }

    /// Scalar spectral functions (F, G) with Σ̃^< = Λ^α F(h), Σ̃^> = Λ^α G(h).
    fn spectral(&self, e: T) -> Result<(Complex<T>, Complex<T>)> {
        if (e - self.mu).abs() < T::lit(1e-12) {
            return Err(Error::DegenerateSpectrum { energy: e.to_f() });
        }
        let nudge = T::lit(1e-9);
        let mut e_pv = e;
        if (e - self.lower).abs() < nudge || (e - self.upper).abs() < nudge {
            e_pv += nudge;
        }
        let f = Self::indicator(e, self.lower, self.mu);
        let g = Self::indicator(e, self.mu, self.upper);
        let p = Self::pv(e_pv, self.lower, self.mu);
        let q = Self::pv(e_pv, self.mu, self.upper);
        Ok((Complex::new(-p, f), Complex::new(-q, -g)))
    }
}

/// Transforms for a Hermitian `h` and line-width `lambda_alpha` with explicit windows.
pub fn causality_transforms_for<T: Real>(
    h: &CMatrix<T>,
    lambda_alpha: &CMatrix<T>,
    windows: LeadWindows<T>,
) -> Result<CausalityTransforms<T>> {
    let n = h.nrows();
    let he = hermitian_eig(&hermitize(h));
    let mut fs = Vec::with_capacity(n);
    let mut gs = Vec::with_capacity(n);
    for &e in &he.values {
        let (f, g) = windows.spectral(e)?;
        fs.push(f);
        gs.push(g);
    }
    let s = &he.vectors;
    let sd = s.adjoint();
    let diag = |d: &[Complex<T>]| {
        let mut m = s.clone();
        for (j, mut col) in m.column_iter_mut().enumerate() {
            col *= d[j];
        }
        m * &sd
    };
    let x = lambda_alpha * diag(&fs);
    let y = lambda_alpha * diag(&gs);
    let half = re(T::lit(0.5));
    let half_i = Complex::new(T::zero(), T::lit(0.5));
    // Hermitian and anti-Hermitian parts: X = −Γ⁺ + iΛ⁺, Y = Γ⁻ − iΛ⁻.
    let gamma_plus = -(&x + x.adjoint()) * half;
    let lambda_plus = -(&x - x.adjoint()) * half_i;
    let gamma_minus = (&y + y.adjoint()) * half;
    let lambda_minus = (&y - y.adjoint()) * half_i;
    Ok(CausalityTransforms {
        gamma_plus: hermitize(&gamma_plus),
        gamma_minus: hermitize(&gamma_minus),
        lambda_plus: hermitize(&lambda_plus),
        lambda_minus: hermitize(&lambda_minus),
    })
}

/// Transforms of `lead` for the unbiased device Hamiltonian h0.
pub fn causality_transforms<T: Real>(model: &DeviceModel<T>, lead: Lead, eps_min: T) -> Result<CausalityTransforms<T>> {
    let w = LeadWindows::new(model.mu0, T::zero(), eps_min)?;
    causality_transforms_for(&model.h0, model.lambda(lead), w)
}

/// Spin-summed Q from the four-term expansion, evaluated on s = σ/2.
pub fn cso_q<T: Real>(sigma: &CMatrix<T>, ct: &CausalityTransforms<T>) -> CMatrix<T> {
    let n = sigma.nrows();
    let s = sigma * re(T::lit(0.5));
    let sbar = CMatrix::identity(n, n) - &s;
    let i = im(T::one());
    let q = commutator(&ct.gamma_minus, &s) * i + anticommutator(&ct.lambda_minus, &s)
        - commutator(&ct.gamma_plus, &sbar) * i
        - anticommutator(&ct.lambda_plus, &sbar);
    q * re(T::lit(2.0))
}

/// [A, B]† = AB − B†A†.
fn dagger_commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b.adjoint() * a.adjoint()
}

/// Spin-summed Q = 2i{[Σ̃^>, s]† + [Σ̃^<, s̄]†}.
pub fn cso_q_direct<T: Real>(sigma: &CMatrix<T>, ct: &CausalityTransforms<T>) -> CMatrix<T> {
    let n = sigma.nrows();
    let s = sigma * re(T::lit(0.5));
    let sbar = CMatrix::identity(n, n) - &s;
    (dagger_commutator(&ct.greater(), &s) + dagger_commutator(&ct.lesser(), &sbar)) * im(T::lit(2.0))
}

/// One-shot level-shift dressing h → h + Σ_α (Γ^(+) + Γ^(−)).
pub fn scba_dressed_hamiltonian<T: Real>(h: &CMatrix<T>, cts: &[CausalityTransforms<T>]) -> CMatrix<T> {
    let mut out = h.clone();
    for ct in cts {
        out += &ct.gamma_plus + &ct.gamma_minus;
    }
    hermitize(&out)
}
