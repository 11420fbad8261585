//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    InvalidDimension(String),

    #[error("matrix is not Hermitian (max entry deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("states are not orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("spectra differ beyond tolerance (max sorted-eigenvalue gap {0:.3e})")]
    SpectrumMismatch(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectrum is maximally entangled; the impossibility argument requires partial entanglement")]
    NotPartialEntanglement,

    #[error("spectrum contains a zero Schmidt coefficient")]
    DegenerateSpectrum,

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
}

pub type Result<T> = std::result::Result<T, Error>;
