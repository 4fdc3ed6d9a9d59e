//! Flat JSON configuration files.
//!
//! Every [`ExperimentConfig`] field has its own key and must be present.
//! Experiment settings (grids, shot counts) are optional. Unknown keys are
//! rejected.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::detection::DetectorModel;
use crate::error::{Error, Result};
use crate::fock::Path;
use crate::optics::{BsConvention, PbsImperfection};
use crate::protocol::{ExperimentConfig, LOSSY_PATHS, PREP_PATHS};
use crate::sources::SourceConfig;

/// PBS imperfections; a `null` extinction ratio means no leakage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PbsSpec {
    pub extinction_h_db: Option<f64>,
    pub extinction_v_db: Option<f64>,
    pub misalignment_rad: f64,
}

impl From<PbsImperfection> for PbsSpec {
    fn from(p: PbsImperfection) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        PbsSpec {
            extinction_h_db: finite(p.extinction_h_db),
            extinction_v_db: finite(p.extinction_v_db),
            misalignment_rad: p.misalignment_rad,
        }
    }
}

impl From<PbsSpec> for PbsImperfection {
    fn from(p: PbsSpec) -> Self {
        PbsImperfection {
            extinction_h_db: p.extinction_h_db.unwrap_or(f64::INFINITY),
            extinction_v_db: p.extinction_v_db.unwrap_or(f64::INFINITY),
            misalignment_rad: p.misalignment_rad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: f64,
    pub p: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub n_pair_max: u8,
    pub ideal_input: bool,
    pub split_pbs_a: PbsSpec,
    pub split_pbs_b: PbsSpec,
    pub comb_pbs_a: PbsSpec,
    pub comb_pbs_b: PbsSpec,
    pub bsm_pbs_e: PbsSpec,
    pub bsm_pbs_f: PbsSpec,
    /// Keys `a`, `b`, `c`, `d`.
    pub path_eta: BTreeMap<String, f64>,
    /// Keys `A`, `A'`, `B`, `B'`.
    pub prep_phases: BTreeMap<String, f64>,
    pub overlap_mu: f64,
    pub detector_model: DetectorModel,
    pub bs_convention: BsConvention,

    #[serde(default = "default_alpha_sq_grid")]
    pub alpha_sq_grid: Vec<f64>,
    #[serde(default = "default_n_sets")]
    pub n_sets: usize,
    #[serde(default = "default_true")]
    pub vary_pump_phases: bool,
    #[serde(default = "default_true")]
    pub vary_prep_phases: bool,
    #[serde(default = "default_hist_bins")]
    pub hist_bins: usize,
    #[serde(default = "default_delays")]
    pub hom_delays_ps: Vec<f64>,
    #[serde(default = "default_sigma")]
    pub hom_sigma_ps: f64,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_mh_samples")]
    pub mh_samples: usize,
}

fn default_alpha_sq_grid() -> Vec<f64> {
    vec![0.5, 0.55, 0.6, 0.66, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99]
}
fn default_n_sets() -> usize {
    1000
}
fn default_true() -> bool {
    true
}
fn default_hist_bins() -> usize {
    20
}
fn default_delays() -> Vec<f64> {
    (-15..=15).map(f64::from).collect()
}
fn default_sigma() -> f64 {
    2.0
}
fn default_shots() -> u64 {
    10_000
}
fn default_mh_samples() -> usize {
    1000
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile::from_experiment(&ExperimentConfig::measured_midpoint(std::f64::consts::FRAC_1_SQRT_2))
    }
}

fn path_key(p: Path) -> String {
    p.to_string()
}

fn lookup(name: &str, allowed: &[Path], what: &str) -> Result<Path> {
    allowed
        .iter()
        .copied()
        .find(|p| path_key(*p) == name)
        .ok_or_else(|| Error::Config(format!("unknown {what} path {name:?}")))
}

impl ConfigFile {
    pub fn from_experiment(cfg: &ExperimentConfig) -> Self {
        ConfigFile {
            alpha: cfg.source.alpha,
            p: cfg.source.p,
            theta_a: cfg.source.theta_a,
            theta_b: cfg.source.theta_b,
            n_pair_max: cfg.source.n_pair_max,
            ideal_input: cfg.ideal_input,
            split_pbs_a: cfg.split_pbs_a.into(),
            split_pbs_b: cfg.split_pbs_b.into(),
            comb_pbs_a: cfg.comb_pbs_a.into(),
            comb_pbs_b: cfg.comb_pbs_b.into(),
            bsm_pbs_e: cfg.bsm_pbs_e.into(),
            bsm_pbs_f: cfg.bsm_pbs_f.into(),
            path_eta: cfg.path_eta.iter().map(|(p, e)| (path_key(*p), *e)).collect(),
            prep_phases: cfg.prep_phases.iter().map(|(p, e)| (path_key(*p), *e)).collect(),
            overlap_mu: cfg.overlap_mu,
            detector_model: cfg.detector_model,
            bs_convention: cfg.bs_convention,
            alpha_sq_grid: default_alpha_sq_grid(),
            n_sets: default_n_sets(),
            vary_pump_phases: true,
            vary_prep_phases: true,
            hist_bins: default_hist_bins(),
            hom_delays_ps: default_delays(),
            hom_sigma_ps: default_sigma(),
            shots: default_shots(),
            mh_samples: default_mh_samples(),
        }
    }

    /// The physics configuration, validated. Invalid values are config errors.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let path_eta = self
            .path_eta
            .iter()
            .map(|(k, v)| Ok((lookup(k, &LOSSY_PATHS, "loss")?, *v)))
            .collect::<Result<_>>()?;
        let prep_phases = self
            .prep_phases
            .iter()
            .map(|(k, v)| Ok((lookup(k, &PREP_PATHS, "preparation")?, *v)))
            .collect::<Result<_>>()?;
        let cfg = ExperimentConfig {
            source: SourceConfig {
                alpha: self.alpha,
                p: self.p,
                theta_a: self.theta_a,
                theta_b: self.theta_b,
                n_pair_max: self.n_pair_max,
            },
            ideal_input: self.ideal_input,
            split_pbs_a: self.split_pbs_a.into(),
            split_pbs_b: self.split_pbs_b.into(),
            comb_pbs_a: self.comb_pbs_a.into(),
            comb_pbs_b: self.comb_pbs_b.into(),
            bsm_pbs_e: self.bsm_pbs_e.into(),
            bsm_pbs_f: self.bsm_pbs_f.into(),
            path_eta,
            prep_phases,
            overlap_mu: self.overlap_mu,
            detector_model: self.detector_model,
            bs_convention: self.bs_convention,
        };
        cfg.validate().map_err(as_config)?;
        self.validate_settings()?;
        Ok(cfg)
    }

    fn validate_settings(&self) -> Result<()> {
        if let Some(x) = self.alpha_sq_grid.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::Config(format!("alpha_sq_grid value {x} outside (0, 1)")));
        }
        if self.n_sets < 2 {
            return Err(Error::Config("n_sets must be at least 2".into()));
        }
        if self.hist_bins == 0 {
            return Err(Error::Config("hist_bins must be positive".into()));
        }
        if self.hom_delays_ps.iter().any(|d| !d.is_finite()) || !(self.hom_sigma_ps > 0.0) {
            return Err(Error::Config("HOM delays must be finite and hom_sigma_ps positive".into()));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be positive".into()));
        }
        if self.mh_samples < 100 {
            return Err(Error::Config("mh_samples must be at least 100".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.experiment()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ConfigFile::from_json(&text)
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::Config(m),
        other => other,
    }
}
