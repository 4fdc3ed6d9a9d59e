use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::counts::{born, outcome_probabilities, Setting, TomographyCounts};
use crate::detection::{hermitize, DensityMatrix2Q};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Converged once one iteration gains less log-likelihood than this.
    pub ll_tol: f64,
    /// After convergence, keep iterating until the largest entry change
    /// drops below this (or `max_iter` is reached).
    pub step_tol: f64,
    pub max_iter: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions { ll_tol: 1e-10, step_tol: 1e-9, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleReport {
    pub state: DensityMatrix2Q,
    pub iterations: usize,
    /// Mean log-likelihood per event.
    pub log_likelihood: f64,
    pub converged: bool,
}

/// Maximum-likelihood state for the observed counts.
pub fn mle_reconstruct(c: &TomographyCounts) -> Result<DensityMatrix2Q> {
    let report = mle_with_options(c, MleOptions::default())?;
    if !report.converged {
        return Err(Error::Numerical(format!(
            "MLE did not converge in {} iterations (log-likelihood {})",
            report.iterations, report.log_likelihood
        )));
    }
    Ok(report.state)
}

pub fn mle_with_options(c: &TomographyCounts, opts: MleOptions) -> Result<MleReport> {
    c.check_complete()?;
    if c.shots == 0 {
        return Err(Error::param("no counts"));
    }
    let events = c.events();
    let total: f64 = events.iter().map(|(_, n)| n).sum();
    let weighted: Vec<(Vector4<Complex64>, f64)> = events.into_iter().map(|(w, n)| (w, n / total)).collect();
    rrr(&weighted, c.settings.len() as f64, opts)
}

/// Reconstruction from exact outcome probabilities (rows ordered as
/// [`Setting::all`]), i.e. the infinite-shot limit.
pub fn mle_from_probabilities(probs: &[[f64; 4]], opts: MleOptions) -> Result<MleReport> {
    let settings = Setting::all();
    if probs.len() != settings.len() {
        return Err(Error::param("one probability row per Pauli setting required"));
    }
    let n = settings.len() as f64;
    let weighted: Vec<(Vector4<Complex64>, f64)> = settings
        .iter()
        .zip(probs)
        .flat_map(|(s, row)| s.outcome_vectors().into_iter().zip(row.map(|p| p / n)))
        .collect();
    rrr(&weighted, n, opts)
}

/// Exact probabilities of `rho` fed back through the reconstruction.
pub fn mle_exact(rho: &Matrix4<Complex64>, opts: MleOptions) -> Result<MleReport> {
    mle_from_probabilities(&outcome_probabilities(rho), opts)
}

fn log_likelihood(rho: &Matrix4<Complex64>, events: &[(Vector4<Complex64>, f64)]) -> f64 {
    events.iter().filter(|(_, f)| *f > 0.0).map(|(w, f)| f * born(rho, w).ln()).sum()
}

/// Diluted iterative RρR. `events` carry frequencies summing to one; the
/// outcome projectors sum to `norm` times the identity.
fn rrr(events: &[(Vector4<Complex64>, f64)], norm: f64, opts: MleOptions) -> Result<MleReport> {
    let id = Matrix4::<Complex64>::identity();
    let mut rho = id * Complex64::new(0.25, 0.0);
    let mut ll = log_likelihood(&rho, events);
    let mut eps: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut r = Matrix4::<Complex64>::zeros();
        for (w, f) in events {
            let p = born(&rho, w);
            if *f > 0.0 && p > 0.0 {
                r += w * w.adjoint() * Complex64::new(f / (p * norm), 0.0);
            }
        }
        let (next, next_ll) = loop {
            let m = id + r * Complex64::new(eps, 0.0);
            let cand = hermitize(&(m * rho * m));
            let cand = cand / cand.trace();
            let cand_ll = log_likelihood(&cand, events);
            if cand_ll >= ll || eps < 1e-12 {
                break (cand, cand_ll);
            }
            eps *= 0.5;
        };
        let gain = next_ll - ll;
        let step = (next - rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        rho = next;
        ll = next_ll;
        if !ll.is_finite() {
            return Err(Error::Numerical("log-likelihood diverged".into()));
        }
        if gain < opts.ll_tol {
            converged = true;
        }
        if converged && step < opts.step_tol {
            break;
        }
        eps = (eps * 2.0).min(1e6);
    }
    Ok(MleReport { state: DensityMatrix2Q::new(rho, 1.0)?, iterations, log_likelihood: ll, converged })
}
