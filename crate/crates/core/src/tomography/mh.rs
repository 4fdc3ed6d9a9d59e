use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::counts::{born, TomographyCounts};
use super::mle::{mle_with_options, MleOptions};
use crate::detection::{fidelity_to_pure, psd_sqrt, psi_minus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhOptions {
    pub burn_in: usize,
    pub thin: usize,
    /// Acceptance rate the step size is tuned toward during burn-in.
    pub target_acceptance: f64,
    pub initial_step: f64,
}

impl Default for MhOptions {
    fn default() -> Self {
        MhOptions { burn_in: 10_000, thin: 10, target_acceptance: 0.3, initial_step: 0.02 }
    }
}

/// Fidelities to |Ψ⁻⟩ of the retained chain states.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySamples {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Acceptance rate after burn-in.
    pub acceptance_rate: f64,
    /// Tuned step size.
    pub step: f64,
}

impl FidelitySamples {
    fn from_samples(samples: Vec<f64>, acceptance_rate: f64, step: f64) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        FidelitySamples { samples, mean, std: var.sqrt(), acceptance_rate, step }
    }
}

pub fn mh_fidelity_distribution(c: &TomographyCounts, n_samples: usize, seed: u64) -> Result<FidelitySamples> {
    mh_with_options(c, n_samples, seed, MhOptions::default())
}

/// Random walk over normalized 4×4 purifications `A`, with `ρ = A A†`.
///
/// The proposal `(A + σG) / ‖A + σG‖` with Gaussian `G` is symmetric on the
/// unit sphere, so acceptance uses the likelihood ratio alone.
pub fn mh_with_options(c: &TomographyCounts, n_samples: usize, seed: u64, opts: MhOptions) -> Result<FidelitySamples> {
    if n_samples < 100 {
        return Err(Error::param(format!("need at least 100 samples, got {n_samples}")));
    }
    if c.total() == 0 {
        return Err(Error::param("all counts are zero; likelihood is flat"));
    }
    if opts.thin == 0 || !(opts.initial_step > 0.0) {
        return Err(Error::param("thinning and step size must be positive"));
    }
    let events: Vec<(Vector4<Complex64>, f64)> = c.events().into_iter().filter(|(_, n)| *n > 0.0).collect();
    let loglik = |a: &Matrix4<Complex64>| -> f64 {
        let rho = a * a.adjoint();
        events.iter().map(|(w, n)| n * born(&rho, w).ln()).sum()
    };

    let start = mle_with_options(c, MleOptions::default())?;
    let mut a = psd_sqrt(start.state.rho.as_ref().expect("MLE returns a state"));
    a /= Complex64::new(a.norm(), 0.0);
    let mut ll = loglik(&a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut step = opts.initial_step;

    let propose = |a: &Matrix4<Complex64>, step: f64, rng: &mut ChaCha8Rng| {
        let g = Matrix4::from_fn(|_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let b = a + g * Complex64::new(step, 0.0);
        let n = b.norm();
        b / Complex64::new(n, 0.0)
    };

    const BATCH: usize = 100;
    let mut accepted_in_batch = 0usize;
    for i in 0..opts.burn_in {
        let cand = propose(&a, step, &mut rng);
        let cand_ll = loglik(&cand);
        if accept(cand_ll - ll, &mut rng) {
            a = cand;
            ll = cand_ll;
            accepted_in_batch += 1;
        }
        if (i + 1) % BATCH == 0 {
            let rate = accepted_in_batch as f64 / BATCH as f64;
            step *= (2.0 * (rate - opts.target_acceptance)).exp();
            accepted_in_batch = 0;
        }
    }

    let psi = psi_minus();
    let mut samples = Vec::with_capacity(n_samples);
    let mut accepted = 0usize;
    let total_steps = n_samples * opts.thin;
    for i in 0..total_steps {
        let cand = propose(&a, step, &mut rng);
        let cand_ll = loglik(&cand);
        if accept(cand_ll - ll, &mut rng) {
            a = cand;
            ll = cand_ll;
            accepted += 1;
        }
        if (i + 1) % opts.thin == 0 {
            samples.push(fidelity_to_pure(&(a * a.adjoint()), &psi));
        }
    }
    Ok(FidelitySamples::from_samples(samples, accepted as f64 / total_steps as f64, step))
}

fn accept(delta_ll: f64, rng: &mut ChaCha8Rng) -> bool {
    if delta_ll.is_nan() {
        return false;
    }
    delta_ll >= 0.0 || rng.random::<f64>().ln() < delta_ll
}
