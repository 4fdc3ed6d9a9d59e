use std::io::Write;

use crate::detection::{fidelity_to_psi_minus, herald, purity, DensityMatrix2Q, HeraldPattern};
use crate::error::{Error, Result};
use crate::protocol::{self, ExperimentConfig};
use crate::tomography::{mh_fidelity_distribution, mle_reconstruct, simulate_counts, TomographyCounts};

pub const TOMO_HEADER: [&str; 4] = ["quantity", "true_value", "reconstructed", "mh_std"];

#[derive(Debug, Clone, PartialEq)]
pub struct TomoRow {
    pub quantity: &'static str,
    pub true_value: f64,
    pub reconstructed: f64,
    pub mh_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoReport {
    pub truth: DensityMatrix2Q,
    pub reconstructed: DensityMatrix2Q,
    pub counts: TomographyCounts,
    pub rows: Vec<TomoRow>,
}

impl TomoReport {
    pub fn row(&self, quantity: &str) -> Option<&TomoRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

fn max_abs_imag(d: &DensityMatrix2Q) -> f64 {
    d.rho.as_ref().map_or(0.0, |r| r.iter().map(|z| z.im.abs()).fold(0.0, f64::max))
}

/// Tomography of an arbitrary two-qubit state: counts, MLE and MH error bar.
pub fn tomography_of(truth: &DensityMatrix2Q, shots: u64, seed: u64, mh_samples: usize) -> Result<TomoReport> {
    let counts = simulate_counts(truth, shots, seed)?;
    let mle = mle_reconstruct(&counts)?;
    let mh = mh_fidelity_distribution(&counts, mh_samples, seed.wrapping_add(1))?;
    let f_true = fidelity_to_psi_minus(truth)?.f_postselected;
    let f_rec = fidelity_to_psi_minus(&mle)?.f_postselected;
    let rows = vec![
        TomoRow { quantity: "f_postselected", true_value: f_true, reconstructed: f_rec, mh_std: Some(mh.std) },
        TomoRow { quantity: "f_postselected_mh_mean", true_value: f_true, reconstructed: mh.mean, mh_std: Some(mh.std) },
        TomoRow { quantity: "purity", true_value: purity(truth)?, reconstructed: purity(&mle)?, mh_std: None },
        TomoRow { quantity: "max_abs_imag", true_value: max_abs_imag(truth), reconstructed: max_abs_imag(&mle), mh_std: None },
    ];
    Ok(TomoReport { truth: truth.clone(), reconstructed: mle, counts, rows })
}

/// Runs the protocol, takes the heralded two-qubit state and reconstructs it
/// from simulated counts.
pub fn tomography_roundtrip(cfg: &ExperimentConfig, shots: u64, seed: u64, mh_samples: usize) -> Result<TomoReport> {
    if shots == 0 {
        return Err(Error::param("shots must be positive"));
    }
    let out = herald(&protocol::run(cfg)?, &HeraldPattern::standard(cfg.detector_model))?;
    if out.conditional.is_absent() {
        return Err(Error::Numerical("no heralded two-qubit state to measure".into()));
    }
    tomography_of(&out.conditional, shots, seed, mh_samples)
}

pub fn write_tomo_csv<W: Write>(rows: &[TomoRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TOMO_HEADER)?;
    for r in rows {
        wr.write_record([
            r.quantity.to_string(),
            r.true_value.to_string(),
            r.reconstructed.to_string(),
            r.mh_std.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
