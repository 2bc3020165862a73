//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs whose shapes or metadata do not line up (vector lengths,
    /// matrix dimensions, geometry mismatch between a realization and the
    /// lattice it claims to live on).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A sampled or supplied value is NaN/infinite where a finite number is
    /// required.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// A matrix handed to `HermitianOperator` fails the hermiticity gate.
    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {limit:.1e}")]
    NotHermitian { asymmetry: f64, limit: f64 },

    /// Operation requires a boundary mode the geometry does not have
    /// (e.g. magnetic translations need a torus, gauge identities need
    /// a globally defined position).
    #[error("unsupported boundary mode: {0}")]
    UnsupportedBoundary(String),

    /// Ensembles entering a binary operation must share seeds; re-pairing
    /// silently would break every per-realization identity.
    #[error("seed mismatch between ensembles: {0}")]
    SeedMismatch(String),

    /// A magnetic translation that does not close on this torus/flux
    /// combination.
    #[error("magnetic translation by {shift:?} does not close: {detail}")]
    TranslationNotClosed { shift: Vec<i64>, detail: String },

    /// Numerical failure inside a spectral factorization.
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    /// Configuration validation failure; `path` is the offending key path.
    #[error("invalid config at `{path}`: {message}")]
    Validation { path: String, message: String },

    /// Raw-data container violations (bad magic, truncation, size lies).
    #[error("container integrity error: {0}")]
    Container(String),

    /// Persisted format version this build does not understand.
    #[error("container version mismatch: found {found}, supported {supported}")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
