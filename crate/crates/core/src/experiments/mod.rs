//! Named experiments that write CSV tables for plotting.
//!
//! Each driver takes a [`ConfigFile`], a seed and an output directory. It
//! writes its tables plus a `manifest_<name>.json`. Tables depend only on the
//! configuration and seed; the manifest also records wall time.

mod config;
mod hom;
mod phase_mc;
mod sweep;
mod tomo;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{ConfigFile, PbsSpec};
pub use hom::{
    coincidence_probability, fit_dip, fit_scan, hom_scan, write_fit_csv, write_hom_csv, Combo, DipFit, HomPoint,
    HOM_FIT_HEADER, HOM_HEADER,
};
pub use phase_mc::{
    phase_monte_carlo, random_phase_sets, write_averaged_csv, write_histogram_csv, write_phase_mc_csv, Histogram,
    PhaseMcOptions, PhaseMcRow, AVERAGED_HEADER, HISTOGRAM_HEADER, PHASE_MC_HEADER,
};
pub use sweep::{sweep_alpha, write_sweep_csv, SweepRow, SWEEP_HEADER};
pub use tomo::{tomography_of, tomography_roundtrip, write_tomo_csv, TomoReport, TomoRow, TOMO_HEADER};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SweepAlpha,
    PhaseMc,
    Hom,
    Tomo,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SweepAlpha => "sweep_alpha",
            Experiment::PhaseMc => "phase_mc",
            Experiment::Hom => "hom",
            Experiment::Tomo => "tomo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config: ConfigFile,
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub version: String,
}

fn create(dir: &FsPath, name: &str, outputs: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    outputs.push(path);
    Ok(BufWriter::new(f))
}

/// Runs `exp` and writes its tables and manifest into `out_dir`.
pub fn run_experiment(exp: Experiment, file: &ConfigFile, seed: u64, out_dir: &FsPath) -> Result<RunManifest> {
    let start = Instant::now();
    let cfg = file.experiment()?;
    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    match exp {
        Experiment::SweepAlpha => {
            let rows = sweep_alpha(&cfg, &file.alpha_sq_grid)?;
            write_sweep_csv(&rows, create(out_dir, "sweep_alpha.csv", &mut outputs)?)?;
        }
        Experiment::PhaseMc => {
            let opts = PhaseMcOptions {
                n_sets: file.n_sets,
                seed,
                vary_pump: file.vary_pump_phases,
                vary_prep: file.vary_prep_phases,
                hist_bins: file.hist_bins,
            };
            let rows = phase_monte_carlo(&cfg, &file.alpha_sq_grid, &opts)?;
            write_phase_mc_csv(&rows, create(out_dir, "phase_mc.csv", &mut outputs)?)?;
            write_histogram_csv(&rows, create(out_dir, "phase_mc_hist.csv", &mut outputs)?)?;
            write_averaged_csv(&rows, create(out_dir, "phase_mc_averaged.csv", &mut outputs)?)?;
        }
        Experiment::Hom => {
            let points = hom_scan(&cfg, &file.hom_delays_ps, file.hom_sigma_ps)?;
            write_hom_csv(&points, create(out_dir, "hom.csv", &mut outputs)?)?;
            write_fit_csv(&fit_scan(&points)?, create(out_dir, "hom_fit.csv", &mut outputs)?)?;
        }
        Experiment::Tomo => {
            let report = tomography_roundtrip(&cfg, file.shots, seed, file.mh_samples)?;
            write_tomo_csv(&report.rows, create(out_dir, "tomo.csv", &mut outputs)?)?;
            report.counts.write_csv(create(out_dir, "tomo_counts.csv", &mut outputs)?)?;
        }
    }
    let manifest = RunManifest {
        experiment: exp.name().to_string(),
        config: file.clone(),
        seed,
        outputs,
        wall_time_s: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mpath = out_dir.join(format!("manifest_{}.json", exp.name()));
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&mpath, json)?;
    Ok(manifest)
}
