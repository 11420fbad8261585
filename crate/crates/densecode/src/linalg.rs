//! Dense complex-matrix kernel: weighted trace inner products, partial traces,
//! Hermitian eigendecomposition, exponential map onto the unitary group, and
//! von Neumann entropy.
//!
//! Everything here is a pure function over small dense matrices; the intended
//! working range is d ≲ 16. The bipartite index convention is fixed globally:
//! basis element (j_A, k_B) maps to row j·d + k, matching the ordering of
//! `kron(a, b)` where `a` acts on A.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Max-entry Hermiticity tolerance used by validity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in [-EIG_CLIP, 0) are treated as exact zeros.
pub const EIG_CLIP: f64 = 1e-10;
/// Eigenvalues below -PSD_TOL are a hard positivity failure.
pub const PSD_TOL: f64 = 1e-8;
/// Trace-normalization tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Max entry-wise deviation from Hermiticity, max_{jk} |M_jk - conj(M_kj)|.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

/// Frobenius norm of U†U - I.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// Which subsystem of a bipartite d·d space is traced *out*.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Partial trace of a D×D operator on a bipartite space with D = d².
///
/// `side` names the subsystem removed: `Side::A` returns tr_A(rho) acting on B.
pub fn partial_trace(rho: &CMatrix, side: Side) -> Result<CMatrix> {
    let big = rho.nrows();
    if rho.ncols() != big {
        return Err(Error::InvalidDimension(format!(
            "partial trace requires a square matrix, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let d = (big as f64).sqrt().round() as usize;
    if d * d != big {
        return Err(Error::InvalidDimension(format!(
            "dimension {big} is not a perfect square"
        )));
    }
    let mut out = CMatrix::zeros(d, d);
    match side {
        Side::A => {
            for k in 0..d {
                for l in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..d {
                        acc += rho[(j * d + k, j * d + l)];
                    }
                    out[(k, l)] = acc;
                }
            }
        }
        Side::B => {
            for j in 0..d {
                for l in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..d {
                        acc += rho[(j * d + k, l * d + k)];
                    }
                    out[(j, l)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Weighted trace inner product tr(M Λ N†) with Λ = diag(weights).
///
/// Conjugate-symmetric in (M, N); positive definite when all weights are
/// strictly positive.
pub fn weighted_inner(m: &CMatrix, n: &CMatrix, weights: &[f64]) -> Result<C64> {
    let d = weights.len();
    if m.nrows() != d || m.ncols() != d || n.nrows() != d || n.ncols() != d {
        return Err(Error::InvalidDimension(format!(
            "weighted_inner: expected {d}x{d} operands for a {d}-entry weight vector"
        )));
    }
    // tr(M Λ N†) = Σ_{j,k} M_jk λ_k conj(N_jk)
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            acc += m[(j, k)] * weights[k] * n[(j, k)].conj();
        }
    }
    Ok(acc)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues sorted descending,
/// eigenvector columns permuted to match, H = V diag(values) V†.
pub fn eig_hermitian(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dev = hermiticity_error(h);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let d = h.nrows();
    // symmetrize so roundoff in the input cannot leak into the solver
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// exp(iH) for Hermitian H, computed through the eigendecomposition so the
/// result is unitary to working precision.
pub fn expi_hermitian(h: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = eig_hermitian(h)?;
    let d = h.nrows();
    let phases = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, values[r])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(&vectors * phases * vectors.adjoint())
}

/// Fixed Hermitian basis of d×d matrices, in the order: diagonal units E_jj,
/// then (E_jk + E_kj)/√2 for j < k lexicographic, then i(E_jk − E_kj)/√2 for
/// j < k lexicographic. d² members; parameter vectors built against this
/// ordering are portable across runs.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(j, j)] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    let s = 1.0 / 2.0f64.sqrt();
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(s, 0.0);
            m[(k, j)] = C64::new(s, 0.0);
            basis.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, s);
            m[(k, j)] = C64::new(0.0, -s);
            basis.push(m);
        }
    }
    basis
}

/// Assemble Σ θ_m H_m over the fixed Hermitian basis.
pub fn hermitian_from_params(theta: &[f64], d: usize) -> Result<CMatrix> {
    if theta.len() != d * d {
        return Err(Error::InvalidDimension(format!(
            "expected {} parameters for d = {d}, got {}",
            d * d,
            theta.len()
        )));
    }
    let mut h = CMatrix::zeros(d, d);
    for (coef, basis_el) in theta.iter().zip(hermitian_basis(d)) {
        h += basis_el.scale(*coef);
    }
    Ok(h)
}

/// Exponential-map parametrization of the unitary group:
/// U(θ) = exp(i Σ θ_m H_m). Smooth and onto; U(0) = I.
pub fn unitary_from_params(theta: &[f64], d: usize) -> Result<CMatrix> {
    expi_hermitian(&hermitian_from_params(theta, d)?)
}

/// A trace-one (or explicitly subnormalized) positive semidefinite operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    matrix: CMatrix,
    subnormalized: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity, and unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::build(matrix, false)
    }

    /// Same positivity checks but with the unit-trace requirement dropped
    /// (residual operators Q carry trace d² − N).
    pub fn subnormalized(matrix: CMatrix) -> Result<Self> {
        Self::build(matrix, true)
    }

    fn build(matrix: CMatrix, subnormalized: bool) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::InvalidDimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = hermiticity_error(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let (values, _) = eig_hermitian(&matrix)?;
        let min = values.last().copied().unwrap_or(0.0);
        if min < -EIG_CLIP {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        if !subnormalized {
            let tr = matrix.trace();
            if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
                return Err(Error::InvalidArgument(format!(
                    "density matrix trace {} deviates from 1 beyond {TRACE_TOL:.0e}",
                    tr.re
                )));
            }
        }
        Ok(Self { dim, matrix, subnormalized })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }
}

/// Von Neumann entropy S(ρ) = −Σ μ ln μ in nats, with 0·ln 0 = 0.
///
/// Eigenvalues in [-1e-8, 0) are clipped to zero; anything more negative is a
/// positivity failure.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (values, _) = eig_hermitian(rho.matrix())?;
    let mut s = 0.0;
    for mu in values {
        if mu < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite(mu));
        }
        if mu > 0.0 {
            s -= mu * mu.ln();
        }
    }
    Ok(s)
}
