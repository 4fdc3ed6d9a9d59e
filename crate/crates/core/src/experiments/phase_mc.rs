use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detection::{fidelity_to_psi_minus, HeraldPattern};
use crate::error::{Error, Result};
use crate::interference::{PhaseResolvedRun, PhaseSet};
use crate::protocol::ExperimentConfig;

pub const PHASE_MC_HEADER: [&str; 7] = ["alpha_sq", "f_min", "f_max", "f_mean", "f_std", "n_sets", "seed"];
pub const HISTOGRAM_HEADER: [&str; 4] = ["alpha_sq", "bin_lo", "bin_hi", "count"];
pub const AVERAGED_HEADER: [&str; 3] = ["alpha_sq", "herald_prob_mean", "f_from_mean_probs"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMcOptions {
    pub n_sets: usize,
    pub seed: u64,
    pub vary_pump: bool,
    pub vary_prep: bool,
    pub hist_bins: usize,
}

impl Default for PhaseMcOptions {
    fn default() -> Self {
        PhaseMcOptions { n_sets: 1000, seed: 1, vary_pump: true, vary_prep: true, hist_bins: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn new(values: &[f64], bins: usize, lo: f64, hi: f64) -> Self {
        let mut counts = vec![0; bins];
        let width = (hi - lo) / bins as f64;
        for &v in values {
            let k = if width > 0.0 { ((v - lo) / width) as usize } else { 0 };
            counts[k.min(bins - 1)] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + k as f64 * width, self.lo + (k + 1) as f64 * width)
    }
}

/// Spread of the heralded fidelity `F_total` over random phase sets at one `α²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMcRow {
    pub alpha_sq: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub f_mean: f64,
    pub f_std: f64,
    pub n_sets: usize,
    pub seed: u64,
    pub herald_prob_mean: f64,
    /// Fidelity of the state obtained by accumulating herald events over all
    /// phase sets, `Σ P_s F_s / Σ P_s`.
    pub f_from_mean_probs: f64,
    pub histogram: Histogram,
}

impl PhaseMcRow {
    pub fn band_width(&self) -> f64 {
        self.f_max - self.f_min
    }
}

/// Uniform phases on `[0, 2π)`; disabled groups stay at zero.
pub fn random_phase_sets(n: usize, seed: u64, vary_pump: bool, vary_prep: bool) -> Vec<PhaseSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut draw = |on: bool| {
                let x = rng.random::<f64>() * TAU;
                if on {
                    x
                } else {
                    0.0
                }
            };
            let theta_a = draw(vary_pump);
            let theta_b = draw(vary_pump);
            let prep = [draw(vary_prep), draw(vary_prep), draw(vary_prep), draw(vary_prep)];
            PhaseSet { theta_a, theta_b, prep }
        })
        .collect()
}

/// The same phase sets are used at every `α²`. Rows sorted by `α²`.
pub fn phase_monte_carlo(cfg: &ExperimentConfig, alpha_sqs: &[f64], opts: &PhaseMcOptions) -> Result<Vec<PhaseMcRow>> {
    if opts.n_sets < 2 {
        return Err(Error::param(format!("n_sets = {} must be at least 2", opts.n_sets)));
    }
    if opts.hist_bins == 0 {
        return Err(Error::param("histogram needs at least one bin"));
    }
    if let Some(x) = alpha_sqs.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::param(format!("alpha_sq = {x} outside (0, 1)")));
    }
    let sets = random_phase_sets(opts.n_sets, opts.seed, opts.vary_pump, opts.vary_prep);
    let pattern = HeraldPattern::standard(cfg.detector_model);
    let mut sorted = alpha_sqs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for a2 in sorted {
        let run = PhaseResolvedRun::new(&cfg.clone().with_alpha_sq(a2), &pattern)?;
        let per_set: Vec<(f64, f64)> = sets
            .par_iter()
            .map(|s| {
                let out = run.outcome(s)?;
                Ok((out.herald_prob, fidelity_to_psi_minus(&out.conditional)?.f_total))
            })
            .collect::<Result<_>>()?;
        rows.push(summarize(a2, &per_set, opts));
    }
    Ok(rows)
}

fn summarize(alpha_sq: f64, per_set: &[(f64, f64)], opts: &PhaseMcOptions) -> PhaseMcRow {
    let f: Vec<f64> = per_set.iter().map(|p| p.1).collect();
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let var = f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let f_min = f.iter().copied().fold(f64::INFINITY, f64::min);
    let f_max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p_sum: f64 = per_set.iter().map(|p| p.0).sum();
    let weighted: f64 = per_set.iter().map(|(p, f)| p * f).sum();
    PhaseMcRow {
        alpha_sq,
        f_min,
        f_max,
        f_mean: mean,
        f_std: var.sqrt(),
        n_sets: f.len(),
        seed: opts.seed,
        herald_prob_mean: p_sum / n,
        f_from_mean_probs: if p_sum > 0.0 { weighted / p_sum } else { 0.0 },
        histogram: Histogram::new(&f, opts.hist_bins, f_min, f_max),
    }
}

pub fn write_phase_mc_csv<W: Write>(rows: &[PhaseMcRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(PHASE_MC_HEADER)?;
    for r in rows {
        wr.write_record([
            r.alpha_sq.to_string(),
            r.f_min.to_string(),
            r.f_max.to_string(),
            r.f_mean.to_string(),
            r.f_std.to_string(),
            r.n_sets.to_string(),
            r.seed.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(rows: &[PhaseMcRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(HISTOGRAM_HEADER)?;
    for r in rows {
        for (k, n) in r.histogram.counts.iter().enumerate() {
            let (lo, hi) = r.histogram.edges(k);
            wr.write_record([r.alpha_sq.to_string(), lo.to_string(), hi.to_string(), n.to_string()])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_averaged_csv<W: Write>(rows: &[PhaseMcRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(AVERAGED_HEADER)?;
    for r in rows {
        wr.write_record([r.alpha_sq, r.herald_prob_mean, r.f_from_mean_probs].map(|x| x.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}
