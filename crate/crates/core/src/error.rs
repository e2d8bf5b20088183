use thiserror::Error;

/// Failure modes of the numeric core. Payloads are reported in f64 whatever the working precision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not diagonalizable: eigenvector condition number {condition:e}")]
    NonDiagonalizable { condition: f64 },
    #[error("eigenvalue imaginary part {imag:e} is not strictly negative, pole on the integration contour")]
    SpectrumOnAxis { imag: f64 },
    #[error("exponential integral did not converge at argument {re} + {im}i")]
    KernelNonConvergent { re: f64, im: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("negative line-width {value} for lead {lead}")]
    NegativeLinewidth { lead: &'static str, value: f64 },
    #[error("{what} not Hermitian (defect {defect:e})")]
    NotHermitian { what: &'static str, defect: f64 },
    #[error("{what} not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { what: &'static str, min_eigenvalue: f64 },
    #[error("time {t} outside table range [{start}, {end}]")]
    OutOfTableRange { t: f64, start: f64, end: f64 },
    #[error("table is invalid: {0}")]
    BadTable(String),
    #[error("resolvent is singular at energy {energy}")]
    SingularResolvent { energy: f64 },
    #[error("quadrature not converged: doubling changed the result by {change:e}")]
    QuadratureNotConverged { change: f64 },
    #[error("history grid too coarse: halving the spacing changed the result by {change:e}")]
    GridTooCoarse { change: f64 },
    #[error("eigenvalue {energy} coincides with the lead chemical potential")]
    DegenerateSpectrum { energy: f64 },
    #[error("density matrix corrupt at t = {t} fs: eigenvalues span [{min}, {max}]")]
    StateCorrupt { t: f64, min: f64, max: f64 },
    #[error("non-finite value at t = {t} fs (last good state at t = {last_good} fs)")]
    NonFinite { t: f64, last_good: f64 },
    #[error("dimension {dim} exceeds limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("{count} eigenvalues within tolerance of the Fermi level {energy}")]
    DegenerateFermiLevel { energy: f64, count: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NegativeLinewidth { .. }
                | Error::NotHermitian { .. }
                | Error::NotPsd { .. }
                | Error::BadTable(_)
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<V, E = Error> = std::result::Result<V, E>;
