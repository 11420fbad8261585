//! Executable form of the impossibility argument: residual projector and its
//! reduced operators, spectrum alignment, entropy-concavity equality,
//! commutation residuals, degeneracy block structure, the dimension bound, and
//! the certificate pipeline that strings them together.
//!
//! For a scheme of N orthonormal encoded states, P projects onto their span and
//! Q = I − P is the residual. Tracing out either subsystem gives
//! Q_B = diag(d − N·λ_j) and Q_A = dI − Σ_i U_i Λ U_i†; when N = d²−1 the
//! residual is a pure state, which forces every encoding unitary to commute
//! with Q_B and hence to be block-diagonal along the λ-degeneracy blocks. The
//! block subalgebra has dimension t² + (d−t)² ≤ d² − 2d + 2 < d² − 1, too small
//! to hold d²−1 vectors orthonormal under the weighted trace inner product.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, identity, partial_trace, von_neumann_entropy, CMatrix, CVector, DensityMatrix,
    Side,
};
use crate::model::{verify_scheme, EncodingScheme, SchmidtSpectrum, DEGENERACY_TOL};

/// Orthonormality tolerance for projector construction.
pub const ORTHO_TOL: f64 = 1e-8;
/// A concavity gap at or below this is reported as equality.
pub const CONCAVITY_EQ_TOL: f64 = 1e-8;
/// Pairwise Frobenius distance implied by a concavity equality.
pub const STATE_EQ_TOL: f64 = 1e-4;
/// Floor-check slack on min λ ≥ 1/(d+1).
pub const FLOOR_SLACK: f64 = 1e-12;
/// Eigenvalues above this count toward the rank of the residual.
pub const RANK_TOL: f64 = 1e-8;

/// Residual projector data for a verified scheme.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub p: CMatrix,
    pub q: CMatrix,
    pub q_a: CMatrix,
    pub q_b: CMatrix,
    pub n_states: usize,
}

impl ResidualReport {
    /// Number of eigenvalues of Q above the rank tolerance.
    pub fn residual_rank(&self) -> usize {
        let (values, _) = eig_hermitian(&self.q).expect("Q is Hermitian by construction");
        values.iter().filter(|&&v| v > RANK_TOL).count()
    }
}

/// P = Σ |ψ_i⟩⟨ψ_i| for pairwise orthonormal states.
pub fn build_projector(states: &[CVector]) -> Result<CMatrix> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("need at least one state".into()));
    }
    let dim = states[0].len();
    let mut worst = 0.0f64;
    for (i, a) in states.iter().enumerate() {
        if a.len() != dim {
            return Err(Error::InvalidDimension(format!(
                "state {i} has length {}, expected {dim}",
                a.len()
            )));
        }
        for (j, b) in states.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let overlap = a.dotc(b);
            worst = worst.max((overlap - num_complex::Complex::new(target, 0.0)).norm());
        }
    }
    if worst > ORTHO_TOL {
        return Err(Error::NotOrthonormal(worst));
    }
    let mut p = CMatrix::zeros(dim, dim);
    for s in states {
        p += s * s.adjoint();
    }
    Ok(p)
}

/// Builds the residual Q = I − P for a verified scheme and traces it down to
/// both subsystems.
pub fn reduced_residuals(
    scheme: &EncodingScheme,
    lambda: &SchmidtSpectrum,
) -> Result<ResidualReport> {
    let report = verify_scheme(scheme, lambda, ORTHO_TOL)?;
    if !report.ok {
        return Err(Error::NotOrthonormal(report.max_deviation));
    }
    let states = crate::model::encode(scheme, lambda)?;
    let p = build_projector(&states)?;
    let q = identity(p.nrows()) - &p;
    let q_a = partial_trace(&q, Side::B)?;
    let q_b = partial_trace(&q, Side::A)?;
    Ok(ResidualReport {
        p,
        q,
        q_a,
        q_b,
        n_states: scheme.len(),
    })
}

/// Finds a unitary U with U A U† = B, given that A and B share a spectrum
/// within `tol`. Under degenerate eigenvalues the answer is one valid
/// representative out of many.
pub fn align_spectra(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<CMatrix> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::InvalidDimension(format!(
            "cannot align a {}x{} with a {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let (va, vecs_a) = eig_hermitian(a)?;
    let (vb, vecs_b) = eig_hermitian(b)?;
    let gap = va
        .iter()
        .zip(vb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    if gap > tol {
        return Err(Error::SpectrumMismatch(gap));
    }
    Ok(vecs_b * vecs_a.adjoint())
}

/// Outcome of the entropy-concavity probe.
#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    /// S(Σ p_i ρ_i) − Σ p_i S(ρ_i), nonnegative up to roundoff.
    pub gap: f64,
    /// gap ≤ 1e-8.
    pub equality: bool,
    /// Max pairwise Frobenius distance between the ensemble members, computed
    /// when equality holds with strictly positive weights.
    pub max_pairwise_distance: Option<f64>,
    /// Whether that distance stays under the derived tolerance.
    pub states_coincide: Option<bool>,
}

/// Concavity gap of the von Neumann entropy for the ensemble {(p_i, ρ_i)}.
pub fn concavity_gap(p: &[f64], rhos: &[DensityMatrix]) -> Result<ConcavityReport> {
    if p.len() != rhos.len() || p.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} states",
            p.len(),
            rhos.len()
        )));
    }
    if p.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidArgument("weights must be nonnegative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    let dim = rhos[0].dim();
    let mut mixture = CMatrix::zeros(dim, dim);
    let mut mean_entropy = 0.0;
    for (w, rho) in p.iter().zip(rhos) {
        if rho.dim() != dim {
            return Err(Error::InvalidDimension(
                "ensemble members have mixed dimensions".into(),
            ));
        }
        mixture += rho.matrix().scale(*w);
        mean_entropy += w * von_neumann_entropy(rho)?;
    }
    let mixture = DensityMatrix::subnormalized(mixture)?;
    let gap = von_neumann_entropy(&mixture)? - mean_entropy;
    let equality = gap <= CONCAVITY_EQ_TOL;
    let (max_pairwise_distance, states_coincide) = if equality && p.iter().all(|&w| w > 0.0) {
        let mut worst = 0.0f64;
        for i in 0..rhos.len() {
            for j in (i + 1)..rhos.len() {
                worst = worst.max((rhos[i].matrix() - rhos[j].matrix()).norm());
            }
        }
        (Some(worst), Some(worst <= STATE_EQ_TOL))
    } else {
        (None, None)
    };
    Ok(ConcavityReport {
        gap,
        equality,
        max_pairwise_distance,
        states_coincide,
    })
}

/// ‖UQ − QU‖_F; zero exactly when U commutes with Q.
pub fn commutation_residual(u: &CMatrix, q: &CMatrix) -> Result<f64> {
    if u.nrows() != q.nrows() || u.ncols() != q.ncols() || u.nrows() != u.ncols() {
        return Err(Error::InvalidDimension(format!(
            "commutator needs matching square matrices, got {}x{} and {}x{}",
            u.nrows(),
            u.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    Ok((u * q - q * u).norm())
}

/// Degeneracy partition of a Schmidt spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct BlockStructure {
    /// Multiplicity of the top Schmidt coefficient.
    pub t: usize,
    /// Sizes of all degeneracy blocks, in spectral order.
    pub block_sizes: Vec<usize>,
    /// Σ (block size)², the dimension of the commutant block algebra.
    pub subalgebra_dim: usize,
}

/// Groups consecutive coefficients equal within the relative tolerance.
pub fn block_partition(lambda: &SchmidtSpectrum, tol: f64) -> BlockStructure {
    let ls = lambda.lambdas();
    let scale = ls[0].max(f64::MIN_POSITIVE);
    let mut block_sizes = Vec::new();
    let mut current = 1usize;
    for w in ls.windows(2) {
        if (w[0] - w[1]).abs() <= tol * scale {
            current += 1;
        } else {
            block_sizes.push(current);
            current = 1;
        }
    }
    block_sizes.push(current);
    let t = block_sizes[0];
    let subalgebra_dim = block_sizes.iter().map(|s| s * s).sum();
    BlockStructure {
        t,
        block_sizes,
        subalgebra_dim,
    }
}

/// True when U splits as a direct sum over the first t coordinates and the
/// rest, i.e. every entry with j < t ≤ k or k < t ≤ j has modulus ≤ tol.
pub fn zero_pattern_check(u: &CMatrix, t: usize, tol: f64) -> bool {
    let d = u.nrows();
    assert!(t >= 1 && t <= d, "t = {t} out of range for d = {d}");
    for j in 0..d {
        for k in 0..d {
            let off_block = (j < t && k >= t) || (k < t && j >= t);
            if off_block && u[(j, k)].norm() > tol {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DimensionBound {
    /// t² + (d−t)², the dimension of M_t ⊕ M_{d−t}.
    pub dim: usize,
    /// d² − 2d + 2, the maximum of dim over 1 ≤ t < d.
    pub cap: usize,
}

/// Dimension of the split block algebra and its cap.
pub fn dimension_bound(d: usize, t: usize) -> Result<DimensionBound> {
    if t < 1 || t >= d {
        return Err(Error::InvalidArgument(format!(
            "t must satisfy 1 <= t < d, got t = {t}, d = {d}"
        )));
    }
    Ok(DimensionBound {
        dim: t * t + (d - t) * (d - t),
        cap: d * d - 2 * d + 2,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FloorCheck {
    pub passes: bool,
    pub floor: f64,
    pub min_lambda: f64,
}

/// Necessary condition for an exact N = d²−1 scheme: every diagonal entry of
/// Q_B lies in [0, 1], which forces min λ ≥ 1/(d+1).
pub fn lambda_floor_check(lambda: &SchmidtSpectrum) -> FloorCheck {
    let floor = 1.0 / (lambda.d() as f64 + 1.0);
    let min_lambda = lambda.min_lambda();
    FloorCheck {
        passes: min_lambda >= floor - FLOOR_SLACK,
        floor,
        min_lambda,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    FloorViolation,
    DimensionContradiction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub name: String,
    pub value: f64,
}

/// Machine-checkable trace showing that an alphabet of d²−1 letters is
/// unreachable for the given spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImpossibilityCertificate {
    pub d: usize,
    pub lambdas: Vec<f64>,
    pub route: Route,
    pub t: usize,
    pub subalgebra_dim: usize,
    pub target_n: usize,
    pub floor: f64,
    pub degeneracy_tol: f64,
    pub verdict: String,
    pub step_log: Vec<StepRecord>,
}

/// Runs the two-route impossibility pipeline for a non-maximal, strictly
/// positive spectrum. The floor route fires first when min λ < 1/(d+1);
/// otherwise the dimension route applies unconditionally.
pub fn certify_impossibility(lambda: &SchmidtSpectrum) -> Result<ImpossibilityCertificate> {
    if lambda.has_zero() {
        return Err(Error::DegenerateSpectrum);
    }
    if lambda.is_maximal() {
        return Err(Error::NotPartialEntanglement);
    }
    let d = lambda.d();
    let target_n = d * d - 1;
    let floor = lambda_floor_check(lambda);
    let blocks = block_partition(lambda, DEGENERACY_TOL);
    if blocks.t == d {
        // degeneracy-tolerance chaining collapsed everything into one block
        return Err(Error::NotPartialEntanglement);
    }
    let mut step_log = vec![
        StepRecord { name: "d".into(), value: d as f64 },
        StepRecord { name: "target_n".into(), value: target_n as f64 },
        StepRecord { name: "min_lambda".into(), value: floor.min_lambda },
        StepRecord { name: "floor".into(), value: floor.floor },
    ];
    let (route, bound) = if !floor.passes {
        step_log.push(StepRecord {
            name: "floor_deficit".into(),
            value: floor.floor - floor.min_lambda,
        });
        (Route::FloorViolation, dimension_bound(d, blocks.t)?)
    } else {
        let bound = dimension_bound(d, blocks.t)?;
        step_log.push(StepRecord { name: "t".into(), value: blocks.t as f64 });
        step_log.push(StepRecord {
            name: "subalgebra_dim".into(),
            value: bound.dim as f64,
        });
        step_log.push(StepRecord {
            name: "dimension_cap".into(),
            value: bound.cap as f64,
        });
        step_log.push(StepRecord {
            name: "dimension_deficit".into(),
            value: (target_n - bound.dim) as f64,
        });
        (Route::DimensionContradiction, bound)
    };
    Ok(ImpossibilityCertificate {
        d,
        lambdas: lambda.lambdas().to_vec(),
        route,
        t: blocks.t,
        subalgebra_dim: bound.dim,
        target_n,
        floor: floor.floor,
        degeneracy_tol: DEGENERACY_TOL,
        verdict: "Impossible".into(),
        step_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, unitary_from_params, C64};
    use crate::model::{encode, weyl_scheme, EncodingScheme};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    fn basis_state(dim: usize, idx: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        v[idx] = c(1.0, 0.0);
        v
    }

    #[test]
    fn projector_of_single_state_is_rank_one() {
        let psi = crate::model::make_entangled_state(&SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap());
        let p = build_projector(&[psi.clone()]).unwrap();
        assert_abs_diff_eq!(p.trace().re, 1.0, epsilon = 1e-12);
        assert!((&p * &p - &p).norm() < 1e-12);
    }

    #[test]
    fn projector_of_complete_basis_is_identity() {
        let scheme = weyl_scheme(2);
        let lambda = SchmidtSpectrum::uniform(2);
        let states = encode(&scheme, &lambda).unwrap();
        let p = build_projector(&states).unwrap();
        assert!((p - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn projector_rejects_non_orthonormal_states() {
        let a = basis_state(4, 0);
        let mut b = basis_state(4, 0);
        b[1] = c(0.1, 0.0);
        assert!(matches!(
            build_projector(&[a, b]),
            Err(Error::NotOrthonormal(_))
        ));
    }

    #[test]
    fn residuals_vanish_in_maximal_case() {
        let report = reduced_residuals(&weyl_scheme(2), &SchmidtSpectrum::uniform(2)).unwrap();
        assert!(report.q.norm() < 1e-12);
        assert!(report.q_a.norm() < 1e-12);
        assert!(report.q_b.norm() < 1e-12);
    }

    #[test]
    fn residuals_of_i_x_scheme() {
        let lambda = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let scheme = EncodingScheme::new(vec![identity(2), pauli_x()]).unwrap();
        let report = reduced_residuals(&scheme, &lambda).unwrap();
        // Q_B = dI − NΛ = diag(0.8, 1.2)
        assert_abs_diff_eq!(report.q_b[(0, 0)].re, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(report.q_b[(1, 1)].re, 1.2, epsilon = 1e-12);
        assert!(report.q_b[(0, 1)].norm() < 1e-12);
        // trace bookkeeping: tr Q_A = tr Q_B = d² − N
        assert_abs_diff_eq!(report.q_a.trace().re, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.q_b.trace().re, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn residuals_reject_invalid_scheme() {
        let lambda = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let z = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let scheme = EncodingScheme::new(vec![identity(2), z]).unwrap();
        assert!(matches!(
            reduced_residuals(&scheme, &lambda),
            Err(Error::NotOrthonormal(_))
        ));
    }

    #[test]
    fn align_identity_for_equal_diagonals() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let u = align_spectra(&a, &a, 1e-10).unwrap();
        assert!((&u * &a * u.adjoint() - &a).norm() < 1e-10);
    }

    #[test]
    fn align_recovers_known_conjugation() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let v = unitary_from_params(&[0.3, -0.7, 1.1, 0.4], 2).unwrap();
        let b = &v * &a * v.adjoint();
        let u = align_spectra(&a, &b, 1e-8).unwrap();
        assert!((&u * &a * u.adjoint() - &b).norm() < 1e-8);
    }

    #[test]
    fn align_rejects_mismatched_spectra() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0)]));
        assert!(matches!(
            align_spectra(&a, &b, 1e-8),
            Err(Error::SpectrumMismatch(_))
        ));
    }

    #[test]
    fn concavity_gap_zero_for_identical_states() {
        let rho = DensityMatrix::new(identity(2).scale(0.5)).unwrap();
        let report = concavity_gap(&[0.5, 0.5], &[rho.clone(), rho]).unwrap();
        assert!(report.gap.abs() < 1e-12);
        assert!(report.equality);
        assert_eq!(report.states_coincide, Some(true));
    }

    #[test]
    fn concavity_gap_of_orthogonal_pures_is_ln2() {
        let p0 = DensityMatrix::new(&basis_state(2, 0) * basis_state(2, 0).adjoint()).unwrap();
        let p1 = DensityMatrix::new(&basis_state(2, 1) * basis_state(2, 1).adjoint()).unwrap();
        let report = concavity_gap(&[0.5, 0.5], &[p0, p1]).unwrap();
        assert_abs_diff_eq!(report.gap, 2.0f64.ln(), epsilon = 1e-10);
        assert!(!report.equality);
    }

    #[test]
    fn commutation_residual_cases() {
        let q = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.8, 0.0), c(1.2, 0.0)]));
        assert_abs_diff_eq!(
            commutation_residual(&identity(2).scale(3.0), &q).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        // [X, diag(0.8, 1.2)] has antidiagonal entries ±0.4
        assert_abs_diff_eq!(
            commutation_residual(&pauli_x(), &q).unwrap(),
            0.4 * 2.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn block_partition_examples() {
        let s = SchmidtSpectrum::new(vec![0.5, 0.3, 0.2]).unwrap();
        let b = block_partition(&s, DEGENERACY_TOL);
        assert_eq!((b.t, b.block_sizes.clone(), b.subalgebra_dim), (1, vec![1, 1, 1], 3));

        let s = SchmidtSpectrum::new(vec![0.4, 0.4, 0.2]).unwrap();
        let b = block_partition(&s, DEGENERACY_TOL);
        assert_eq!((b.t, b.block_sizes.clone(), b.subalgebra_dim), (2, vec![2, 1], 5));

        let s = SchmidtSpectrum::uniform(3);
        let b = block_partition(&s, DEGENERACY_TOL);
        assert_eq!((b.t, b.subalgebra_dim), (3, 9));
    }

    #[test]
    fn zero_pattern_cases() {
        assert!(zero_pattern_check(&identity(3), 2, 1e-12));
        assert!(!zero_pattern_check(&pauli_x(), 1, 1e-12));
        let block = CMatrix::from_fn(3, 3, |r, col| {
            if (r < 2) == (col < 2) {
                c(0.5, 0.1)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(zero_pattern_check(&block, 2, 1e-12));
    }

    #[test]
    fn dimension_bound_examples() {
        let b = dimension_bound(3, 1).unwrap();
        assert_eq!((b.dim, b.cap), (5, 5));
        let b = dimension_bound(4, 2).unwrap();
        assert_eq!((b.dim, b.cap), (8, 10));
        let b = dimension_bound(2, 1).unwrap();
        assert_eq!((b.dim, b.cap), (2, 2));
        assert!(dimension_bound(3, 3).is_err());
        assert!(dimension_bound(3, 0).is_err());
    }

    #[test]
    fn floor_check_examples() {
        let s = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        assert!(lambda_floor_check(&s).passes);
        let s = SchmidtSpectrum::new(vec![0.8, 0.2]).unwrap();
        let f = lambda_floor_check(&s);
        assert!(!f.passes);
        assert_abs_diff_eq!(f.floor, 1.0 / 3.0, epsilon = 1e-15);
        assert!(lambda_floor_check(&SchmidtSpectrum::uniform(5)).passes);
    }

    #[test]
    fn certificate_dimension_route() {
        let s = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let cert = certify_impossibility(&s).unwrap();
        assert_eq!(cert.route, Route::DimensionContradiction);
        assert_eq!((cert.t, cert.subalgebra_dim, cert.target_n), (1, 2, 3));
        assert!(cert.subalgebra_dim < cert.target_n);
    }

    #[test]
    fn certificate_floor_route() {
        let s = SchmidtSpectrum::new(vec![0.5, 0.3, 0.2]).unwrap();
        let cert = certify_impossibility(&s).unwrap();
        assert_eq!(cert.route, Route::FloorViolation);
        assert!(cert.lambdas.last().unwrap() < &cert.floor);
    }

    #[test]
    fn certificate_rejects_maximal_and_degenerate() {
        assert!(matches!(
            certify_impossibility(&SchmidtSpectrum::uniform(3)),
            Err(Error::NotPartialEntanglement)
        ));
        let s = SchmidtSpectrum::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            certify_impossibility(&s),
            Err(Error::DegenerateSpectrum)
        ));
    }
}
