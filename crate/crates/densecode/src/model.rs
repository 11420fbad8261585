//! Data model for Schmidt spectra and encoding schemes, plus Gram-matrix
//! computation and scheme verification.
//!
//! A scheme {U_i} deterministically encodes N letters over a resource with
//! Schmidt weights λ exactly when the Gram matrix G_ij = tr(U_j Λ U_i†) is the
//! identity, which is the same as the encoded states (U_i ⊗ I)|ψ⟩ being
//! orthonormal in the full d²-dimensional space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, kron, unitarity_error, weighted_inner, C64, CMatrix, CVector};

/// Relative tolerance deciding whether two Schmidt coefficients are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Unitarity tolerance for scheme members.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default Gram-deviation tolerance for verify_scheme.
pub const VERIFY_TOL: f64 = 1e-8;

/// Descending probability vector of Schmidt coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    d: usize,
    lambdas: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Accepts the weights in any order and sorts them descending
    /// (ties keep their original relative order).
    pub fn new(mut lambdas: Vec<f64>) -> Result<Self> {
        let d = lambdas.len();
        if d == 0 {
            return Err(Error::InvalidArgument("spectrum must be non-empty".into()));
        }
        for &l in &lambdas {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "Schmidt coefficient {l} is not a probability"
                )));
            }
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "Schmidt coefficients sum to {sum}, expected 1"
            )));
        }
        lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { d, lambdas })
    }

    pub fn uniform(d: usize) -> Self {
        Self {
            d,
            lambdas: vec![1.0 / d as f64; d],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn min_lambda(&self) -> f64 {
        *self.lambdas.last().unwrap()
    }

    /// True when every weight is 1/d within the relative degeneracy tolerance.
    pub fn is_maximal(&self) -> bool {
        let flat = 1.0 / self.d as f64;
        self.lambdas
            .iter()
            .all(|&l| (l - flat).abs() <= DEGENERACY_TOL * flat)
    }

    /// True when some weight is exactly zero (the weighted inner product then
    /// degenerates; certificates and searches reject such spectra).
    pub fn has_zero(&self) -> bool {
        self.lambdas.iter().any(|&l| l == 0.0)
    }

    /// Λ as a dense diagonal matrix.
    pub fn diagonal_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.d, self.d, |r, c| {
            if r == c {
                C64::new(self.lambdas[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// An ordered list of N encoding unitaries, all d×d.
#[derive(Debug, Clone)]
pub struct EncodingScheme {
    d: usize,
    unitaries: Vec<CMatrix>,
}

impl EncodingScheme {
    pub fn new(unitaries: Vec<CMatrix>) -> Result<Self> {
        let n = unitaries.len();
        if n == 0 {
            return Err(Error::InvalidScheme("scheme must have at least one unitary".into()));
        }
        let d = unitaries[0].nrows();
        if n > d * d {
            return Err(Error::InvalidScheme(format!(
                "scheme has {n} members but at most d² = {} fit",
                d * d
            )));
        }
        for (i, u) in unitaries.iter().enumerate() {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::InvalidScheme(format!(
                    "member {i} is {}x{}, expected {d}x{d}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let dev = unitarity_error(u);
            if dev > UNITARY_TOL {
                return Err(Error::InvalidScheme(format!(
                    "member {i} deviates from unitarity by {dev:.3e}"
                )));
            }
        }
        Ok(Self { d, unitaries })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }
}

/// N×N matrix of pairwise weighted trace inner products.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: CMatrix,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Max entry-wise deviation from the identity.
    pub fn deviation_from_identity(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.entries[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Σ_j √λ_j |j⟩_A|j⟩_B as a unit vector of length d².
pub fn make_entangled_state(lambda: &SchmidtSpectrum) -> CVector {
    let d = lambda.d();
    let mut v = CVector::zeros(d * d);
    for (j, &l) in lambda.lambdas().iter().enumerate() {
        v[j * d + j] = C64::new(l.sqrt(), 0.0);
    }
    v
}

/// G_ij = tr(U_j Λ U_i†).
pub fn gram(scheme: &EncodingScheme, lambda: &SchmidtSpectrum) -> Result<GramMatrix> {
    if scheme.d() != lambda.d() {
        return Err(Error::InvalidDimension(format!(
            "scheme dimension {} != spectrum dimension {}",
            scheme.d(),
            lambda.d()
        )));
    }
    let n = scheme.len();
    let us = scheme.unitaries();
    let mut entries = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] = weighted_inner(&us[j], &us[i], lambda.lambdas())?;
        }
    }
    Ok(GramMatrix { entries })
}

/// The encoded states (U_i ⊗ I)|ψ⟩; their pairwise overlaps reproduce the
/// Gram matrix.
pub fn encode(scheme: &EncodingScheme, lambda: &SchmidtSpectrum) -> Result<Vec<CVector>> {
    if scheme.d() != lambda.d() {
        return Err(Error::InvalidDimension(format!(
            "scheme dimension {} != spectrum dimension {}",
            scheme.d(),
            lambda.d()
        )));
    }
    let psi = make_entangled_state(lambda);
    let eye = identity(scheme.d());
    Ok(scheme
        .unitaries()
        .iter()
        .map(|u| kron(u, &eye) * &psi)
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub max_deviation: f64,
}

/// Checks G = I entry-wise within `tol`.
pub fn verify_scheme(
    scheme: &EncodingScheme,
    lambda: &SchmidtSpectrum,
    tol: f64,
) -> Result<VerifyReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let g = gram(scheme, lambda)?;
    let max_deviation = g.deviation_from_identity();
    Ok(VerifyReport {
        ok: max_deviation <= tol,
        max_deviation,
    })
}

/// The full shift/clock family {X^a Z^b : 0 ≤ a,b < d}, which encodes d²
/// letters over the uniform spectrum.
pub fn weyl_scheme(d: usize) -> EncodingScheme {
    let mut shift = CMatrix::zeros(d, d);
    for j in 0..d {
        shift[((j + 1) % d, j)] = C64::new(1.0, 0.0);
    }
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let clock = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, omega * r as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut unitaries = Vec::with_capacity(d * d);
    let mut xa = identity(d);
    for _ in 0..d {
        let mut m = xa.clone();
        for _ in 0..d {
            unitaries.push(m.clone());
            m *= &clock;
        }
        xa = &shift * xa;
    }
    EncodingScheme::new(unitaries).expect("shift/clock members are unitary")
}

// ---------------------------------------------------------------------------
// Scheme file format
// ---------------------------------------------------------------------------

/// On-disk representation: unitaries as N nested d×d arrays of [re, im] pairs.
#[derive(Debug, Serialize, Deserialize)]
pub struct SchemeFile {
    pub d: usize,
    pub lambda: Vec<f64>,
    pub unitaries: Vec<Vec<Vec<[f64; 2]>>>,
}

impl SchemeFile {
    pub fn from_parts(scheme: &EncodingScheme, lambda: &SchmidtSpectrum) -> Self {
        let d = scheme.d();
        let unitaries = scheme
            .unitaries()
            .iter()
            .map(|u| {
                (0..d)
                    .map(|r| (0..d).map(|c| [u[(r, c)].re, u[(r, c)].im]).collect())
                    .collect()
            })
            .collect();
        Self {
            d,
            lambda: lambda.lambdas().to_vec(),
            unitaries,
        }
    }

    /// Validates every invariant and reports the first violated one.
    pub fn into_parts(self) -> Result<(EncodingScheme, SchmidtSpectrum)> {
        let d = self.d;
        if d == 0 {
            return Err(Error::InvalidArgument("d must be positive".into()));
        }
        if self.lambda.len() != d {
            return Err(Error::InvalidDimension(format!(
                "lambda has {} entries, expected d = {d}",
                self.lambda.len()
            )));
        }
        let lambda = SchmidtSpectrum::new(self.lambda)?;
        let mut unitaries = Vec::with_capacity(self.unitaries.len());
        for (i, rows) in self.unitaries.iter().enumerate() {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidScheme(format!(
                    "member {i} is not a {d}x{d} matrix"
                )));
            }
            let m = CMatrix::from_fn(d, d, |r, c| {
                C64::new(rows[r][c][0], rows[r][c][1])
            });
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidScheme(format!(
                    "member {i} contains a non-finite entry"
                )));
            }
            unitaries.push(m);
        }
        let scheme = EncodingScheme::new(unitaries)?;
        Ok((scheme, lambda))
    }
}

pub fn write_scheme_json(scheme: &EncodingScheme, lambda: &SchmidtSpectrum) -> String {
    serde_json::to_string_pretty(&SchemeFile::from_parts(scheme, lambda)).expect("serializable")
}

pub fn read_scheme_json(text: &str) -> Result<(EncodingScheme, SchmidtSpectrum)> {
    let file: SchemeFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidScheme(format!("malformed scheme JSON: {e}")))?;
    file.into_parts()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    #[test]
    fn spectrum_sorts_descending() {
        let s = SchmidtSpectrum::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(s.lambdas(), &[0.5, 0.3, 0.2]);
        assert!(!s.is_maximal());
    }

    #[test]
    fn spectrum_rejects_bad_sum() {
        assert!(SchmidtSpectrum::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn uniform_spectrum_is_maximal() {
        assert!(SchmidtSpectrum::uniform(4).is_maximal());
        assert!(!SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap().is_maximal());
    }

    #[test]
    fn entangled_state_trivial_cases() {
        let s = SchmidtSpectrum::new(vec![1.0, 0.0]).unwrap();
        let v = make_entangled_state(&s);
        assert_abs_diff_eq!(v[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-15);

        let s = SchmidtSpectrum::uniform(2);
        let v = make_entangled_state(&s);
        let r = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(v[0].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(v[3].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1].norm() + v[2].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entangled_state_partial_case() {
        let s = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let v = make_entangled_state(&s);
        assert_abs_diff_eq!(v[0].re, 0.6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[3].re, 0.4f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gram_of_weyl_under_uniform_is_identity() {
        let scheme = weyl_scheme(2);
        let g = gram(&scheme, &SchmidtSpectrum::uniform(2)).unwrap();
        assert!(g.deviation_from_identity() < 1e-13);
    }

    #[test]
    fn gram_of_i_x_is_identity_for_any_spectrum() {
        let scheme = EncodingScheme::new(vec![identity(2), pauli_x()]).unwrap();
        let lambda = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let g = gram(&scheme, &lambda).unwrap();
        assert!(g.deviation_from_identity() < 1e-14);
    }

    #[test]
    fn gram_of_i_z_shows_overlap() {
        let scheme = EncodingScheme::new(vec![identity(2), pauli_z()]).unwrap();
        let lambda = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let g = gram(&scheme, &lambda).unwrap();
        assert_abs_diff_eq!(g.entries()[(0, 1)].re, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(g.entries()[(1, 0)].re, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(g.entries()[(0, 0)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn encode_with_identity_returns_resource_state() {
        let lambda = SchmidtSpectrum::new(vec![0.7, 0.3]).unwrap();
        let scheme = EncodingScheme::new(vec![identity(2)]).unwrap();
        let states = encode(&scheme, &lambda).unwrap();
        assert!((states[0].clone() - make_entangled_state(&lambda)).norm() < 1e-15);
    }

    #[test]
    fn encoded_overlap_matches_gram() {
        let lambda = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let scheme = EncodingScheme::new(vec![identity(2), pauli_x()]).unwrap();
        let states = encode(&scheme, &lambda).unwrap();
        let overlap = states[0].dotc(&states[1]);
        assert_abs_diff_eq!(overlap.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn verify_scheme_examples() {
        let uniform3 = SchmidtSpectrum::uniform(3);
        let report = verify_scheme(&weyl_scheme(3), &uniform3, 1e-8).unwrap();
        assert!(report.ok);
        assert!(report.max_deviation < 1e-12);

        let lambda = SchmidtSpectrum::new(vec![0.6, 0.4]).unwrap();
        let scheme = EncodingScheme::new(vec![identity(2), pauli_z()]).unwrap();
        let report = verify_scheme(&scheme, &lambda, 1e-8).unwrap();
        assert!(!report.ok);
        assert_abs_diff_eq!(report.max_deviation, 0.2, epsilon = 1e-12);

        let single = EncodingScheme::new(vec![pauli_z()]).unwrap();
        let report = verify_scheme(&single, &lambda, 1e-8).unwrap();
        assert!(report.ok);
    }

    #[test]
    fn weyl_scheme_structure() {
        let s = weyl_scheme(2);
        assert_eq!(s.len(), 4);
        assert!((s.unitaries()[0].clone() - identity(2)).norm() < 1e-15);
        assert!((s.unitaries()[1].clone() - pauli_z()).norm() < 1e-12);
        assert!((s.unitaries()[2].clone() - pauli_x()).norm() < 1e-15);

        let s3 = weyl_scheme(3);
        assert_eq!(s3.len(), 9);
        for u in s3.unitaries() {
            assert!(unitarity_error(u) < 1e-12);
        }
    }

    #[test]
    fn weyl_gram_is_identity_for_d_up_to_4() {
        for d in 2..=4 {
            let g = gram(&weyl_scheme(d), &SchmidtSpectrum::uniform(d)).unwrap();
            assert!(g.deviation_from_identity() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn scheme_json_round_trip() {
        let scheme = weyl_scheme(2);
        let lambda = SchmidtSpectrum::uniform(2);
        let text = write_scheme_json(&scheme, &lambda);
        let (scheme2, lambda2) = read_scheme_json(&text).unwrap();
        assert_eq!(scheme2.len(), 4);
        assert_eq!(lambda2.lambdas(), lambda.lambdas());
        for (a, b) in scheme.unitaries().iter().zip(scheme2.unitaries()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn scheme_json_rejects_non_unitary() {
        let text = r#"{"d":2,"lambda":[0.5,0.5],
            "unitaries":[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[2.0,0.0]]]]}"#;
        assert!(matches!(read_scheme_json(text), Err(Error::InvalidScheme(_))));
    }
}
