//! Numerical search for encoding schemes: minimizes the summed squared
//! off-diagonal Gram energy over the unitary group, parametrized through the
//! exponential map, with seeded random restarts.
//!
//! The first unitary is gauge-fixed to the identity: left-multiplying every
//! member by a common unitary leaves the Gram matrix unchanged, so any
//! solution can be rotated to have U_0 = I.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, hermitian_basis, hermitian_from_params, C64, CMatrix};
use crate::model::{gram, EncodingScheme, SchmidtSpectrum};

/// Below this step length a restart is considered stalled.
const STEP_FLOOR: f64 = 1e-14;
/// Descents run past success_tol down to this fraction of it.
const STOP_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub n_letters: usize,
    pub restarts: u32,
    pub max_iters: u32,
    /// Objective at or below this counts as an exact scheme.
    pub success_tol: f64,
    /// Objective above this after all restarts counts as a definite failure;
    /// landing in between is flagged ambiguous.
    pub failure_tol: f64,
    pub base_seed: u64,
    pub step_init: f64,
    pub step_shrink: f64,
}

impl SearchConfig {
    pub fn new(n_letters: usize) -> Self {
        Self {
            n_letters,
            restarts: 50,
            max_iters: 5000,
            success_tol: 1e-8,
            failure_tol: 1e-6,
            base_seed: 0,
            step_init: 0.1,
            step_shrink: 0.5,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.n_letters < 1 || self.n_letters > d * d {
            return Err(Error::InvalidArgument(format!(
                "n_letters must lie in [1, d²] = [1, {}], got {}",
                d * d,
                self.n_letters
            )));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.success_tol <= 0.0 {
            return Err(Error::InvalidArgument("success_tol must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.step_shrink) || self.step_shrink == 0.0 {
            return Err(Error::InvalidArgument("step_shrink must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Final state of one restart.
#[derive(Debug, Clone, Serialize)]
pub struct RestartRecord {
    pub seed: u64,
    pub objective: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub n_letters: usize,
    pub best_scheme: EncodingScheme,
    pub best_objective: f64,
    pub succeeded: bool,
    /// Best objective between success_tol and failure_tol: neither a scheme
    /// nor a confident failure.
    pub ambiguous: bool,
    pub restarts_used: u32,
    pub iterations_total: u64,
    pub seed_of_best: u64,
    pub restart_records: Vec<RestartRecord>,
}

/// Σ_{i<j} |G_ij|²; zero exactly for a valid deterministic scheme.
pub fn objective(scheme: &EncodingScheme, lambda: &SchmidtSpectrum) -> Result<f64> {
    let g = gram(scheme, lambda)?;
    let n = g.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += g.entries()[(i, j)].norm_sqr();
        }
    }
    Ok(acc)
}

fn split_blocks(params: &[f64], d: usize) -> Result<usize> {
    let dd = d * d;
    if params.is_empty() || params.len() % dd != 0 {
        return Err(Error::InvalidDimension(format!(
            "parameter vector of length {} is not a multiple of d² = {dd}",
            params.len()
        )));
    }
    Ok(params.len() / dd)
}

/// Per-unitary decomposition cache for one parameter block.
struct BlockEig {
    values: Vec<f64>,
    vectors: CMatrix,
    unitary: CMatrix,
}

fn decompose_block(theta: &[f64], d: usize) -> Result<BlockEig> {
    let h = hermitian_from_params(theta, d)?;
    let (values, vectors) = eig_hermitian(&h)?;
    let phases = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, values[r])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let unitary = &vectors * phases * vectors.adjoint();
    Ok(BlockEig {
        values,
        vectors,
        unitary,
    })
}

fn unitaries_from_flat(params: &[f64], lambda: &SchmidtSpectrum) -> Result<Vec<BlockEig>> {
    let d = lambda.d();
    let n = split_blocks(params, d)?;
    let dd = d * d;
    (0..n)
        .map(|k| decompose_block(&params[k * dd..(k + 1) * dd], d))
        .collect()
}

fn gram_entries(blocks: &[BlockEig], lambda: &SchmidtSpectrum) -> Result<CMatrix> {
    let n = blocks.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = crate::linalg::weighted_inner(
                &blocks[j].unitary,
                &blocks[i].unitary,
                lambda.lambdas(),
            )?;
        }
    }
    Ok(g)
}

fn objective_of_gram(g: &CMatrix) -> f64 {
    let n = g.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += g[(i, j)].norm_sqr();
        }
    }
    acc
}

/// Objective as a function of flat parameters (N blocks of d² each).
pub fn objective_from_params(params: &[f64], lambda: &SchmidtSpectrum) -> Result<f64> {
    let blocks = unitaries_from_flat(params, lambda)?;
    Ok(objective_of_gram(&gram_entries(&blocks, lambda)?))
}

/// Divided-difference kernel of x ↦ e^{ix} on the eigenvalue pairs.
fn frechet_kernel(values: &[f64]) -> CMatrix {
    let d = values.len();
    CMatrix::from_fn(d, d, |a, b| {
        let (x, y) = (values[a], values[b]);
        if (x - y).abs() < 1e-9 {
            // derivative at the midpoint
            C64::new(0.0, 1.0) * C64::from_polar(1.0, 0.5 * (x + y))
        } else {
            (C64::from_polar(1.0, x) - C64::from_polar(1.0, y)) / C64::new(x - y, 0.0)
        }
    })
}

/// Analytic gradient of the Gram objective with respect to the flat parameter
/// vector. Built from the eigenbasis divided-difference form of the derivative
/// of the matrix exponential.
pub fn gradient(params: &[f64], lambda: &SchmidtSpectrum) -> Result<Vec<f64>> {
    let d = lambda.d();
    let dd = d * d;
    let n = split_blocks(params, d)?;
    let blocks = unitaries_from_flat(params, lambda)?;
    let g = gram_entries(&blocks, lambda)?;
    let lam = lambda.diagonal_matrix();
    // Λ U_i† for every member
    let lam_udag: Vec<CMatrix> = blocks.iter().map(|b| &lam * b.unitary.adjoint()).collect();
    let basis = hermitian_basis(d);
    let mut grad = vec![0.0; n * dd];
    for k in 0..n {
        // cotangent of U_k: d objective = 2 Re tr(dU_k · m_k)
        let mut m_k = CMatrix::zeros(d, d);
        for i in 0..k {
            m_k += lam_udag[i].scale_complex(g[(i, k)].conj());
        }
        for j in (k + 1)..n {
            m_k += lam_udag[j].scale_complex(g[(k, j)]);
        }
        let v = &blocks[k].vectors;
        let phi = frechet_kernel(&blocks[k].values);
        let w = v.adjoint() * m_k * v;
        for (m, h_m) in basis.iter().enumerate() {
            let b = v.adjoint() * h_m * v;
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                for c in 0..d {
                    acc += phi[(a, c)] * b[(a, c)] * w[(c, a)];
                }
            }
            grad[k * dd + m] = 2.0 * acc.re;
        }
    }
    Ok(grad)
}

trait ScaleComplex {
    fn scale_complex(&self, z: C64) -> CMatrix;
}

impl ScaleComplex for CMatrix {
    fn scale_complex(&self, z: C64) -> CMatrix {
        self.map(|e| e * z)
    }
}

struct RestartOutcome {
    record: RestartRecord,
    params: Vec<f64>,
    /// Accepted objective values, in order. Only inspected by tests.
    #[cfg_attr(not(test), allow(dead_code))]
    trace: Vec<f64>,
}

/// Backtracking gradient descent on one seeded start. The first parameter
/// block stays pinned at zero (U_0 = I).
fn descend(
    mut params: Vec<f64>,
    lambda: &SchmidtSpectrum,
    config: &SearchConfig,
    seed: u64,
) -> Result<RestartOutcome> {
    let d = lambda.d();
    let dd = d * d;
    let stop_tol = config.success_tol * STOP_FRACTION;
    let mut f = objective_from_params(&params, lambda)?;
    let mut trace = vec![f];
    let mut step = config.step_init;
    let mut iterations = 0u32;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    while iterations < config.max_iters && f > stop_tol {
        iterations += 1;
        let mut g = gradient(&params, lambda)?;
        for slot in g.iter_mut().take(dd) {
            *slot = 0.0;
        }
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-13 {
            break;
        }
        // Barzilai-Borwein trial step from the last accepted move; the
        // backtracking loop below restores monotonicity when it overshoots
        if let Some((px, pg)) = &prev {
            let mut s_dot_s = 0.0;
            let mut s_dot_y = 0.0;
            for i in 0..params.len() {
                let s = params[i] - px[i];
                let y = g[i] - pg[i];
                s_dot_s += s * s;
                s_dot_y += s * y;
            }
            if s_dot_y > 0.0 && s_dot_s > 0.0 {
                step = (s_dot_s / s_dot_y).clamp(STEP_FLOOR, 1e3);
            }
        }
        prev = Some((params.clone(), g.clone()));
        let mut accepted = false;
        while step >= STEP_FLOOR {
            let trial: Vec<f64> = params
                .iter()
                .zip(&g)
                .map(|(x, gi)| x - step * gi)
                .collect();
            let ft = objective_from_params(&trial, lambda)?;
            if ft < f {
                params = trial;
                f = ft;
                trace.push(f);
                accepted = true;
                break;
            }
            step *= config.step_shrink;
        }
        if !accepted {
            break;
        }
    }
    Ok(RestartOutcome {
        record: RestartRecord {
            seed,
            objective: f,
            iterations,
        },
        params,
        trace,
    })
}

/// Runs `restarts` independent seeded descents (restart r uses seed
/// base_seed + r) and returns the best. Restarts may execute concurrently;
/// the reduction is keyed by (objective, seed) so the outcome is identical to
/// sequential execution.
pub fn optimize(lambda: &SchmidtSpectrum, config: &SearchConfig) -> Result<SearchResult> {
    if lambda.has_zero() {
        return Err(Error::DegenerateSpectrum);
    }
    let d = lambda.d();
    config.validate(d)?;
    let dd = d * d;
    let n = config.n_letters;
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = config.base_seed.wrapping_add(r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut params = vec![0.0; n * dd];
            for slot in params.iter_mut().skip(dd) {
                *slot = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            }
            descend(params, lambda, config, seed)
        })
        .collect::<Result<_>>()?;
    let best = outcomes
        .iter()
        .min_by(|a, b| {
            (a.record.objective, a.record.seed)
                .partial_cmp(&(b.record.objective, b.record.seed))
                .unwrap()
        })
        .expect("restarts >= 1");
    let best_scheme = EncodingScheme::new(
        unitaries_from_flat(&best.params, lambda)?
            .into_iter()
            .map(|b| b.unitary)
            .collect(),
    )?;
    let best_objective = best.record.objective;
    Ok(SearchResult {
        n_letters: n,
        best_scheme,
        best_objective,
        succeeded: best_objective <= config.success_tol,
        ambiguous: best_objective > config.success_tol && best_objective <= config.failure_tol,
        restarts_used: config.restarts,
        iterations_total: outcomes.iter().map(|o| o.record.iterations as u64).sum(),
        seed_of_best: best.record.seed,
        restart_records: outcomes.into_iter().map(|o| o.record).collect(),
    })
}

#[derive(Debug)]
pub struct AlphabetEstimate {
    /// Largest N for which the search found an exact scheme. This is a lower
    /// bound on the true maximal alphabet: a failed search proves nothing.
    pub n_estimate: usize,
    pub per_n: Vec<SearchResult>,
}

/// Sweeps N = d, d+1, …, d² with the given config template.
pub fn estimate_max_alphabet(
    lambda: &SchmidtSpectrum,
    template: &SearchConfig,
) -> Result<AlphabetEstimate> {
    let d = lambda.d();
    let mut per_n = Vec::new();
    for n in d..=d * d {
        let config = SearchConfig {
            n_letters: n,
            ..template.clone()
        };
        per_n.push(optimize(lambda, &config)?);
    }
    let n_estimate = per_n
        .iter()
        .filter(|r| r.succeeded)
        .map(|r| r.n_letters)
        .max()
        .unwrap_or(0);
    Ok(AlphabetEstimate { n_estimate, per_n })
}
