//! Command-line front end: verify scheme files, run searches and sweeps, emit
//! impossibility certificates and CSV tables.
//!
//! Exit codes: 0 success, 1 the check or search failed, 2 invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use densecode::model::{read_scheme_json, verify_scheme, SchemeFile};
use densecode::residual::certify_impossibility;
use densecode::search::{optimize, SearchConfig};
use densecode::{Error, SchmidtSpectrum};

#[derive(Parser)]
#[command(name = "densecode", version, about = "Deterministic dense coding: verify, search, certify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scheme file for Gram orthonormality.
    Verify {
        /// Path to a scheme JSON file.
        scheme_file: PathBuf,
        /// Max allowed entry-wise Gram deviation.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Search for N encoding unitaries over a given spectrum.
    Search {
        #[arg(long)]
        d: usize,
        /// Comma-separated Schmidt weights (normalized internally).
        #[arg(long)]
        lambda: String,
        /// Alphabet size to attempt.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the result JSON (scheme included).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an impossibility certificate for alphabet size d²−1.
    Certify {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep λ₀ over a grid and tabulate search outcomes as CSV.
    Sweep {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Grid for λ₀ as start:stop:step; the remaining mass is split
        /// uniformly over the other d−1 coefficients.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 50)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("DENSECODE_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("error: DENSECODE_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify { scheme_file, tol } => cmd_verify(&scheme_file, tol),
        Command::Search {
            d,
            lambda,
            n,
            restarts,
            seed,
            out,
        } => cmd_search(d, &lambda, n, restarts, seed, out.as_deref()),
        Command::Certify { d, lambda, out } => cmd_certify(d, &lambda, out.as_deref()),
        Command::Sweep {
            d,
            n,
            grid,
            restarts,
            seed,
            out,
        } => cmd_sweep(d, n, &grid, restarts, seed, &out),
    };
    ExitCode::from(code)
}

fn invalid(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    2
}

/// Parses comma-separated weights, normalizing the total to 1. A deviation of
/// more than 1e-6 from unit sum gets a warning; smaller deviations are fixed
/// silently.
fn parse_lambda(d: usize, text: &str) -> Result<SchmidtSpectrum, String> {
    let raw: Vec<f64> = text
        .split(',')
        .map(|tok| tok.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("cannot parse --lambda: {e}"))?;
    if raw.len() != d {
        return Err(format!("--lambda has {} entries, expected d = {d}", raw.len()));
    }
    if raw.iter().any(|&l| !l.is_finite() || l < 0.0) {
        return Err("Schmidt weights must be finite and nonnegative".into());
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err("Schmidt weights must have positive total".into());
    }
    if (sum - 1.0).abs() > 1e-6 {
        eprintln!("warning: weights sum to {sum}; normalizing");
    }
    let normalized: Vec<f64> = raw.iter().map(|l| l / sum).collect();
    SchmidtSpectrum::new(normalized).map_err(|e| e.to_string())
}

fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_manifest(
    out: &Path,
    command: &str,
    config: serde_json::Value,
    base_seed: u64,
    started: Instant,
    outputs: &[&Path],
) {
    let manifest = json!({
        "command": command,
        "config": config,
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "base_seed": base_seed,
        "duration_seconds": started.elapsed().as_secs_f64(),
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    let path = manifest_path(out);
    if let Err(e) = fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()) {
        eprintln!("warning: could not write manifest {}: {e}", path.display());
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cmd_verify(scheme_file: &Path, tol: f64) -> u8 {
    let text = match fs::read_to_string(scheme_file) {
        Ok(t) => t,
        Err(e) => return invalid(format!("cannot read {}: {e}", scheme_file.display())),
    };
    let (scheme, lambda) = match read_scheme_json(&text) {
        Ok(parts) => parts,
        Err(e) => return invalid(e),
    };
    let report = match verify_scheme(&scheme, &lambda, tol) {
        Ok(r) => r,
        Err(e) => return invalid(e),
    };
    println!(
        "max Gram deviation {} -> {}",
        full_precision(report.max_deviation),
        if report.ok { "ok" } else { "FAIL" }
    );
    if report.ok {
        0
    } else {
        1
    }
}

fn cmd_search(
    d: usize,
    lambda_text: &str,
    n: usize,
    restarts: u32,
    seed: u64,
    out: Option<&Path>,
) -> u8 {
    let started = Instant::now();
    let lambda = match parse_lambda(d, lambda_text) {
        Ok(l) => l,
        Err(e) => return invalid(e),
    };
    let mut config = SearchConfig::new(n);
    config.restarts = restarts;
    config.base_seed = seed;
    let result = match optimize(&lambda, &config) {
        Ok(r) => r,
        Err(e) => return invalid(e),
    };
    for record in &result.restart_records {
        eprintln!(
            "restart seed={} objective={} iterations={}",
            record.seed,
            full_precision(record.objective),
            record.iterations
        );
    }
    println!(
        "n={} best_objective={} succeeded={} ambiguous={} seed_of_best={}",
        n,
        full_precision(result.best_objective),
        result.succeeded,
        result.ambiguous,
        result.seed_of_best
    );
    if let Some(path) = out {
        let payload = json!({
            "d": d,
            "n": n,
            "lambda": lambda.lambdas(),
            "best_objective": result.best_objective,
            "succeeded": result.succeeded,
            "ambiguous": result.ambiguous,
            "restarts_used": result.restarts_used,
            "iterations_total": result.iterations_total,
            "seed_of_best": result.seed_of_best,
            "restart_records": result.restart_records,
            "scheme": SchemeFile::from_parts(&result.best_scheme, &lambda),
        });
        if let Err(e) = fs::write(path, serde_json::to_string_pretty(&payload).unwrap()) {
            return invalid(format!("cannot write {}: {e}", path.display()));
        }
        write_manifest(
            path,
            "search",
            json!({"d": d, "lambda": lambda_text, "n": n, "restarts": restarts, "seed": seed,
                   "success_tol": config.success_tol, "failure_tol": config.failure_tol,
                   "max_iters": config.max_iters, "step_init": config.step_init,
                   "step_shrink": config.step_shrink}),
            seed,
            started,
            &[path],
        );
    }
    if result.succeeded {
        0
    } else {
        1
    }
}

fn cmd_certify(d: usize, lambda_text: &str, out: Option<&Path>) -> u8 {
    let started = Instant::now();
    let lambda = match parse_lambda(d, lambda_text) {
        Ok(l) => l,
        Err(e) => return invalid(e),
    };
    let cert = match certify_impossibility(&lambda) {
        Ok(c) => c,
        Err(e @ (Error::NotPartialEntanglement | Error::DegenerateSpectrum)) => {
            return invalid(format!("{e}; no certificate applies"))
        }
        Err(e) => return invalid(e),
    };
    let text = serde_json::to_string_pretty(&cert).unwrap();
    println!(
        "certificate: route={:?} t={} subalgebra_dim={} target_n={} verdict={}",
        cert.route, cert.t, cert.subalgebra_dim, cert.target_n, cert.verdict
    );
    if let Some(path) = out {
        if let Err(e) = fs::write(path, &text) {
            return invalid(format!("cannot write {}: {e}", path.display()));
        }
        write_manifest(
            path,
            "certify",
            json!({"d": d, "lambda": lambda_text}),
            0,
            started,
            &[path],
        );
    }
    0
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err("grid spec must be start:stop:step".into());
    }
    let start: f64 = parts[0].trim().parse().map_err(|e| format!("grid start: {e}"))?;
    let stop: f64 = parts[1].trim().parse().map_err(|e| format!("grid stop: {e}"))?;
    let step: f64 = parts[2].trim().parse().map_err(|e| format!("grid step: {e}"))?;
    if !(step > 0.0) || stop < start {
        return Err("grid requires step > 0 and stop >= start".into());
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| start + step * i as f64)
        .filter(|&v| v <= stop + 1e-12)
        .collect();
    if grid.is_empty() {
        return Err("grid spec defines no points".into());
    }
    Ok(grid)
}

fn cmd_sweep(d: usize, n: usize, grid_spec: &str, restarts: u32, seed: u64, out: &Path) -> u8 {
    let started = Instant::now();
    if d < 2 {
        return invalid("--d must be at least 2");
    }
    let grid = match parse_grid(grid_spec) {
        Ok(g) => g,
        Err(e) => return invalid(e),
    };
    let mut csv = String::new();
    for j in 0..d {
        csv.push_str(&format!("lambda_{j},"));
    }
    csv.push_str("n,best_objective,succeeded,restarts_used,seconds\n");
    for &lambda0 in &grid {
        if !(lambda0 > 0.0 && lambda0 < 1.0) {
            return invalid(format!("grid point {lambda0} is not a probability"));
        }
        let rest = (1.0 - lambda0) / (d - 1) as f64;
        let mut weights = vec![rest; d];
        weights[0] = lambda0;
        let lambda = match SchmidtSpectrum::new(weights) {
            Ok(l) => l,
            Err(e) => return invalid(e),
        };
        let mut config = SearchConfig::new(n);
        config.restarts = restarts;
        config.base_seed = seed;
        let row_start = Instant::now();
        let result = match optimize(&lambda, &config) {
            Ok(r) => r,
            Err(e) => return invalid(e),
        };
        for l in lambda.lambdas() {
            csv.push_str(&full_precision(*l));
            csv.push(',');
        }
        csv.push_str(&format!(
            "{n},{},{},{},{:.3}\n",
            full_precision(result.best_objective),
            result.succeeded,
            result.restarts_used,
            row_start.elapsed().as_secs_f64()
        ));
        println!(
            "lambda0={lambda0:.4} n={n} best_objective={} succeeded={}",
            full_precision(result.best_objective),
            result.succeeded
        );
    }
    if let Err(e) = fs::write(out, csv) {
        return invalid(format!("cannot write {}: {e}", out.display()));
    }
    write_manifest(
        out,
        "sweep",
        json!({"d": d, "n": n, "grid": grid_spec, "restarts": restarts, "seed": seed,
               "grid_rule": "lambda_0 swept; remaining mass split uniformly over the other d-1 coefficients, then sorted"}),
        seed,
        started,
        &[out],
    );
    0
}
