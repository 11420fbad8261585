//! Python bindings for the densecode toolkit.
//!
//! Matrices cross the boundary as nested lists of (re, im) pairs, matching the
//! scheme JSON file format.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use densecode::model::{gram, verify_scheme, weyl_scheme as weyl, EncodingScheme};
use densecode::residual::certify_impossibility;
use densecode::search::{optimize, SearchConfig};
use densecode::{C64, CMatrix, SchmidtSpectrum};

type PyMatrix = Vec<Vec<(f64, f64)>>;

fn to_cmatrix(rows: &PyMatrix) -> PyResult<CMatrix> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(d, d, |r, c| {
        C64::new(rows[r][c].0, rows[r][c].1)
    }))
}

fn from_cmatrix(m: &CMatrix) -> PyMatrix {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| (m[(r, c)].re, m[(r, c)].im)).collect())
        .collect()
}

fn spectrum(lambdas: Vec<f64>) -> PyResult<SchmidtSpectrum> {
    SchmidtSpectrum::new(lambdas).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn scheme(unitaries: Vec<PyMatrix>) -> PyResult<EncodingScheme> {
    let mats = unitaries
        .iter()
        .map(to_cmatrix)
        .collect::<PyResult<Vec<_>>>()?;
    EncodingScheme::new(mats).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// The d² shift/clock unitaries, as nested (re, im) lists.
#[pyfunction]
fn weyl_scheme(d: usize) -> Vec<PyMatrix> {
    weyl(d).unitaries().iter().map(from_cmatrix).collect()
}

/// Gram matrix G_ij = tr(U_j Λ U_i†) of a scheme over a spectrum.
#[pyfunction]
fn gram_matrix(unitaries: Vec<PyMatrix>, lambdas: Vec<f64>) -> PyResult<PyMatrix> {
    let g = gram(&scheme(unitaries)?, &spectrum(lambdas)?)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(from_cmatrix(g.entries()))
}

/// Returns (ok, max_deviation) for the Gram-orthonormality check.
#[pyfunction]
#[pyo3(signature = (unitaries, lambdas, tol = 1e-8))]
fn verify(unitaries: Vec<PyMatrix>, lambdas: Vec<f64>, tol: f64) -> PyResult<(bool, f64)> {
    let report = verify_scheme(&scheme(unitaries)?, &spectrum(lambdas)?, tol)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((report.ok, report.max_deviation))
}

/// Seeded random-restart search for n encoding unitaries. Returns a dict with
/// the best scheme and the search diagnostics.
#[pyfunction]
#[pyo3(signature = (lambdas, n, restarts = 50, seed = 0))]
fn search(
    py: Python<'_>,
    lambdas: Vec<f64>,
    n: usize,
    restarts: u32,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let lambda = spectrum(lambdas)?;
    let mut config = SearchConfig::new(n);
    config.restarts = restarts;
    config.base_seed = seed;
    let result =
        optimize(&lambda, &config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("n", result.n_letters)?;
    dict.set_item("best_objective", result.best_objective)?;
    dict.set_item("succeeded", result.succeeded)?;
    dict.set_item("ambiguous", result.ambiguous)?;
    dict.set_item("seed_of_best", result.seed_of_best)?;
    dict.set_item("iterations_total", result.iterations_total)?;
    dict.set_item(
        "scheme",
        result
            .best_scheme
            .unitaries()
            .iter()
            .map(from_cmatrix)
            .collect::<Vec<_>>(),
    )?;
    Ok(dict.into_any().unbind())
}

/// Impossibility certificate for alphabet size d²−1 as a JSON string.
#[pyfunction]
fn certify(lambdas: Vec<f64>) -> PyResult<String> {
    let cert = certify_impossibility(&spectrum(lambdas)?)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(serde_json::to_string_pretty(&cert).expect("serializable"))
}

#[pymodule]
fn densecode_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(weyl_scheme, m)?)?;
    m.add_function(wrap_pyfunction!(gram_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    Ok(())
}
