//! Transient and steady-state electron transport through an open device
//! coupled to two wide-band leads, propagated through the reduced
//! single-electron density matrix.
//!
//! The numerics are generic over [`Real`]; the aliases below fix f64.

pub mod cso;
pub mod error;
pub mod ground_state;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod steady;
pub mod units;
pub mod verify;
pub mod wbl;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real};

/// f64 complex matrix, the type most callers want.
pub type ComplexMatrix = CMatrix<f64>;
