use std::io::Write;

use rayon::prelude::*;

use crate::detection::{fidelity_to_psi_minus, herald, HeraldPattern};
use crate::error::{Error, Result};
use crate::protocol::{self, ExperimentConfig};

pub const SWEEP_HEADER: [&str; 5] = ["alpha_sq", "herald_prob", "fourfold_norm", "f_postselected", "f_heralded"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha_sq: f64,
    pub herald_prob: f64,
    /// Herald followed by one photon at each receiver.
    pub fourfold_prob: f64,
    /// `fourfold_prob` over its maximum across the sweep.
    pub fourfold_norm: f64,
    pub f_postselected: f64,
    /// Fidelity including the vacuum and multi-photon part of the delivered state.
    pub f_heralded: f64,
}

/// One run per `α²` with everything else taken from `cfg`; rows sorted by `α²`.
pub fn sweep_alpha(cfg: &ExperimentConfig, alpha_sqs: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some(x) = alpha_sqs.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::param(format!("alpha_sq = {x} outside (0, 1)")));
    }
    let pattern = HeraldPattern::standard(cfg.detector_model);
    let mut rows = alpha_sqs
        .par_iter()
        .map(|&a2| {
            let out = herald(&protocol::run(&cfg.clone().with_alpha_sq(a2))?, &pattern)?;
            let f = fidelity_to_psi_minus(&out.conditional)?;
            Ok(SweepRow {
                alpha_sq: a2,
                herald_prob: out.herald_prob,
                fourfold_prob: out.fourfold_prob(),
                fourfold_norm: 0.0,
                f_postselected: f.f_postselected,
                f_heralded: f.f_total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.alpha_sq.total_cmp(&b.alpha_sq));
    let max = rows.iter().map(|r| r.fourfold_prob).fold(0.0, f64::max);
    if max > 0.0 {
        for r in &mut rows {
            r.fourfold_norm = r.fourfold_prob / max;
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SWEEP_HEADER)?;
    for r in rows {
        wr.write_record(
            [r.alpha_sq, r.herald_prob, r.fourfold_norm, r.f_postselected, r.f_heralded].map(|x| x.to_string()),
        )?;
    }
    wr.flush()?;
    Ok(())
}
