//! Toolkit for isometric deterministic dense coding over partially entangled
//! d-level states: verify encoding schemes, search for them numerically, and
//! certify that an alphabet of d²−1 letters is out of reach for every
//! non-maximal resource.
//!
//! Modules:
//! - [`linalg`]: dense complex-matrix kernel (weighted trace inner products,
//!   partial traces, Hermitian eigendecomposition, the exponential map,
//!   von Neumann entropy).
//! - [`model`]: Schmidt spectra, encoding schemes, Gram matrices, the scheme
//!   file format.
//! - [`residual`]: residual projector machinery and the impossibility
//!   certificate pipeline.
//! - [`search`]: seeded random-restart gradient descent over the unitary
//!   group.

pub mod error;
pub mod linalg;
pub mod model;
pub mod residual;
pub mod search;

pub use error::{Error, Result};
pub use linalg::{
    eig_hermitian, partial_trace, unitary_from_params, von_neumann_entropy, weighted_inner,
    C64, CMatrix, CVector, DensityMatrix, Side,
};
pub use model::{
    encode, gram, make_entangled_state, read_scheme_json, verify_scheme, weyl_scheme,
    write_scheme_json, EncodingScheme, GramMatrix, SchmidtSpectrum, VerifyReport,
};
pub use residual::{
    align_spectra, block_partition, build_projector, certify_impossibility, commutation_residual,
    concavity_gap, dimension_bound, lambda_floor_check, reduced_residuals, zero_pattern_check,
    BlockStructure, ImpossibilityCertificate, ResidualReport, Route,
};
pub use search::{
    estimate_max_alphabet, gradient, objective, optimize, AlphabetEstimate, SearchConfig,
    SearchResult,
};
