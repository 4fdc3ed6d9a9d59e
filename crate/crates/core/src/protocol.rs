//! The full swapping circuit as an ordered list of transforms.
//!
//! Per side: splitting PBS, preparation wave plates, preparation phases,
//! combining PBS (outputs: distributed path and central path), 45° rotation
//! of the central path. Then per-path loss on a, b, c, d, the central 50/50
//! beam splitter (c, d -> e, f) and the projection PBSs in front of the
//! detectors.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_8;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::detection::DetectorModel;
use crate::error::{Error, Result};
use crate::fock::{Arm, FockState, ModeId, ModeTransform, Path, Pol, Side};
use crate::optics::{self, BsConvention, PbsImperfection};
use crate::sources::{self, SourceConfig};

/// Required accuracy of norm preservation through a full run.
pub const RUN_NORM_TOL: f64 = 1e-10;

/// Every switchable parameter of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceConfig,
    /// Start from the prepared four-photon state instead of SPDC pairs.
    pub ideal_input: bool,
    pub split_pbs_a: PbsImperfection,
    pub split_pbs_b: PbsImperfection,
    pub comb_pbs_a: PbsImperfection,
    pub comb_pbs_b: PbsImperfection,
    pub bsm_pbs_e: PbsImperfection,
    pub bsm_pbs_f: PbsImperfection,
    /// Transmission per path (coupling, optics and detector efficiency
    /// combined); keys among a, b, c, d. Missing paths are lossless.
    pub path_eta: BTreeMap<Path, f64>,
    /// Phase per prepared path; keys among A, A', B, B'.
    pub prep_phases: BTreeMap<Path, f64>,
    /// Wavepacket overlap between Alice's and Bob's photons.
    pub overlap_mu: f64,
    pub detector_model: DetectorModel,
    pub bs_convention: BsConvention,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::ideal(std::f64::consts::FRAC_1_SQRT_2)
    }
}

pub const LOSSY_PATHS: [Path; 4] = [Path::Alice, Path::Bob, Path::C, Path::D];
pub const PREP_PATHS: [Path; 4] = [Path::A, Path::APrime, Path::B, Path::BPrime];

impl ExperimentConfig {
    /// Four-photon input, perfect optics, no loss.
    pub fn ideal(alpha: f64) -> Self {
        ExperimentConfig {
            source: SourceConfig { alpha, ..SourceConfig::default() },
            ideal_input: true,
            split_pbs_a: PbsImperfection::IDEAL,
            split_pbs_b: PbsImperfection::IDEAL,
            comb_pbs_a: PbsImperfection::IDEAL,
            comb_pbs_b: PbsImperfection::IDEAL,
            bsm_pbs_e: PbsImperfection::IDEAL,
            bsm_pbs_f: PbsImperfection::IDEAL,
            path_eta: BTreeMap::new(),
            prep_phases: BTreeMap::new(),
            overlap_mu: 1.0,
            detector_model: DetectorModel::Threshold,
            bs_convention: BsConvention::Symmetric,
        }
    }

    /// SPDC input with imperfections at the middle of the measured ranges:
    /// 30 dB extinction on every PBS, 1.5° misalignment of the splitting
    /// PBSs, pair probability 3e-3 per pulse, 70 % heralding efficiency times
    /// 84.5 % detector efficiency on c and d, 90 % coupling times 77.5 %
    /// transmission times 84.5 % detection on a and b.
    pub fn measured_midpoint(alpha: f64) -> Self {
        let er = 30.0;
        let leaky = PbsImperfection { extinction_h_db: er, extinction_v_db: er, misalignment_rad: 0.0 };
        let split = PbsImperfection { misalignment_rad: 1.5f64.to_radians(), ..leaky };
        let det = 0.845;
        let eta_central = 0.70 * det;
        let eta_local = 0.90 * 0.775 * det;
        ExperimentConfig {
            source: SourceConfig { alpha, p: 3e-3f64.sqrt(), theta_a: 0.0, theta_b: 0.0, n_pair_max: 2 },
            ideal_input: false,
            split_pbs_a: split,
            split_pbs_b: split,
            comb_pbs_a: leaky,
            comb_pbs_b: leaky,
            bsm_pbs_e: leaky,
            bsm_pbs_f: leaky,
            path_eta: [(Path::Alice, eta_local), (Path::Bob, eta_local), (Path::C, eta_central), (Path::D, eta_central)]
                .into_iter()
                .collect(),
            ..ExperimentConfig::ideal(alpha)
        }
    }

    pub fn with_alpha_sq(mut self, alpha_sq: f64) -> Self {
        self.source.alpha = alpha_sq.max(0.0).sqrt();
        self
    }

    /// Same loss on all four outgoing paths.
    pub fn with_uniform_eta(mut self, eta: f64) -> Self {
        self.path_eta = LOSSY_PATHS.iter().map(|&p| (p, eta)).collect();
        self
    }

    /// Same leakage on all six PBSs (misalignment untouched).
    pub fn with_extinction_db(mut self, er: f64) -> Self {
        for pbs in self.pbs_mut() {
            pbs.extinction_h_db = er;
            pbs.extinction_v_db = er;
        }
        self
    }

    pub fn eta(&self, path: Path) -> f64 {
        self.path_eta.get(&path).copied().unwrap_or(1.0)
    }

    pub fn prep_phase(&self, path: Path) -> f64 {
        self.prep_phases.get(&path).copied().unwrap_or(0.0)
    }

    pub fn pbs(&self) -> [PbsImperfection; 6] {
        [self.split_pbs_a, self.split_pbs_b, self.comb_pbs_a, self.comb_pbs_b, self.bsm_pbs_e, self.bsm_pbs_f]
    }

    fn pbs_mut(&mut self) -> [&mut PbsImperfection; 6] {
        [
            &mut self.split_pbs_a,
            &mut self.split_pbs_b,
            &mut self.comb_pbs_a,
            &mut self.comb_pbs_b,
            &mut self.bsm_pbs_e,
            &mut self.bsm_pbs_f,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        for pbs in self.pbs() {
            pbs.validate()?;
        }
        for (path, eta) in &self.path_eta {
            if !LOSSY_PATHS.contains(path) {
                return Err(Error::param(format!("no loss channel on path {path}")));
            }
            if !(0.0..=1.0).contains(eta) {
                return Err(Error::param(format!("eta {eta} on path {path} outside [0, 1]")));
            }
        }
        for (path, phi) in &self.prep_phases {
            if !PREP_PATHS.contains(path) {
                return Err(Error::param(format!("no preparation phase on path {path}")));
            }
            if !phi.is_finite() {
                return Err(Error::param(format!("preparation phase on {path} is not finite")));
            }
        }
        if !(0.0..=1.0).contains(&self.overlap_mu) {
            return Err(Error::param(format!("overlap_mu {} outside [0, 1]", self.overlap_mu)));
        }
        Ok(())
    }
}

/// How a stage is applied to the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageScope {
    /// On the declared modes only.
    Exact,
    /// On every wavepacket of the declared paths.
    AllWavepackets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Distinguishability,
    Split,
    Prep,
    Phase,
    Combine,
    Rotate,
    Loss(Path),
    CentralBs,
    Projection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub label: String,
    pub kind: StageKind,
    pub transform: ModeTransform,
    pub scope: StageScope,
}

/// Ordered circuit for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitPlan {
    stages: Vec<Stage>,
    /// Index of the first preparation-phase stage.
    phase_start: usize,
    /// Index of the first stage after the preparation phases.
    phase_end: usize,
}

impl CircuitPlan {
    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn labels(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.label.as_str()).collect()
    }

    /// Stages that precede the preparation phases.
    pub fn before_phases(&self) -> &[Stage] {
        &self.stages[..self.phase_start]
    }

    /// Stages that follow the preparation phases.
    pub fn after_phases(&self) -> &[Stage] {
        &self.stages[self.phase_end..]
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        apply_stages(&self.stages, state)
    }

    /// Applies stages up to (and excluding) the one labelled `label`.
    pub fn apply_until(&self, state: &FockState, label: &str) -> Result<FockState> {
        let end = self
            .stages
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::param(format!("no stage labelled {label}")))?;
        apply_stages(&self.stages[..end], state)
    }
}

pub fn apply_stages(stages: &[Stage], state: &FockState) -> Result<FockState> {
    let mut s = state.clone();
    for stage in stages {
        s = match stage.scope {
            StageScope::Exact => s.apply_transform(&stage.transform)?,
            StageScope::AllWavepackets => s.apply_transform_all_wavepackets(&stage.transform)?,
        };
    }
    Ok(s)
}

/// Combining PBS outputs: H from the unprimed path and V from the primed path
/// go to the distributed output; the other two go to the central path.
pub fn combining_outputs(side: Side) -> (Path, Path) {
    match side {
        Side::Alice => (Path::Alice, Path::C),
        Side::Bob => (Path::Bob, Path::D),
    }
}

fn stage(label: impl Into<String>, kind: StageKind, transform: ModeTransform) -> Stage {
    Stage { label: label.into(), kind, transform, scope: StageScope::AllWavepackets }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Alice => "A",
        Side::Bob => "B",
    }
}

/// Builds the circuit for `cfg`. Identical configurations give identical plans.
pub fn build_circuit(cfg: &ExperimentConfig) -> Result<CircuitPlan> {
    cfg.validate()?;
    let mut stages = Vec::new();
    if cfg.overlap_mu < 1.0 {
        let modes: Vec<ModeId> = if cfg.ideal_input {
            [Path::B, Path::BPrime].iter().flat_map(|&p| Pol::BOTH.map(|pol| ModeId::new(p, pol))).collect()
        } else {
            Pol::BOTH.map(|pol| ModeId::new(Path::Source(Side::Bob), pol)).to_vec()
        };
        stages.push(Stage {
            label: "distinguishability B".into(),
            kind: StageKind::Distinguishability,
            transform: distinguishability_transform(&modes, cfg.overlap_mu)?,
            scope: StageScope::Exact,
        });
    }
    if !cfg.ideal_input {
        for (side, imp, port) in [(Side::Alice, cfg.split_pbs_a, 0), (Side::Bob, cfg.split_pbs_b, 1)] {
            let (t, r) = sources::prepared_paths(side);
            let src = Path::Source(side);
            let pbs = optics::pbs_imperfect(src, Path::Port(port), t, r, imp)?
                .restrict_inputs(&[ModeId::h(src), ModeId::v(src)])?;
            stages.push(stage(format!("split PBS {}", side_name(side)), StageKind::Split, pbs));
        }
        let theta = sources::prep_hwp_angle(cfg.source.alpha)?;
        for side in [Side::Alice, Side::Bob] {
            let (t, r) = sources::prepared_paths(side);
            stages.push(stage(format!("prep HWP {t}"), StageKind::Prep, optics::hwp(t, theta)?));
            stages.push(stage(format!("prep HWP {r}"), StageKind::Prep, optics::hwp(r, std::f64::consts::FRAC_PI_2 - theta)?));
        }
    }
    let phase_start = stages.len();
    for path in PREP_PATHS {
        stages.push(stage(format!("phase {path}"), StageKind::Phase, optics::path_phase(path, cfg.prep_phase(path))?));
    }
    let phase_end = stages.len();
    for (side, imp) in [(Side::Alice, cfg.comb_pbs_a), (Side::Bob, cfg.comb_pbs_b)] {
        let (t, r) = sources::prepared_paths(side);
        let (dist, central) = combining_outputs(side);
        stages.push(stage(format!("combining PBS {}", side_name(side)), StageKind::Combine, optics::pbs_imperfect(t, r, dist, central, imp)?));
        stages.push(stage(format!("45deg HWP {central}"), StageKind::Rotate, optics::hwp(central, FRAC_PI_8)?));
    }
    for (sink, path) in LOSSY_PATHS.iter().enumerate() {
        let eta = cfg.eta(*path);
        if eta < 1.0 {
            stages.push(stage(format!("loss {path}"), StageKind::Loss(*path), optics::path_loss(*path, eta, sink as u16)?));
        }
    }
    stages.push(stage(
        "central BS",
        StageKind::CentralBs,
        optics::beam_splitter_paths(Path::C, Path::D, Path::E, Path::F, 0.5, cfg.bs_convention)?,
    ));
    for (arm, path, imp, port) in [(Arm::E, Path::E, cfg.bsm_pbs_e, 2), (Arm::F, Path::F, cfg.bsm_pbs_f, 3)] {
        let pbs = optics::pbs_imperfect(path, Path::Port(port), Path::Detector(arm, Pol::H), Path::Detector(arm, Pol::V), imp)?
            .restrict_inputs(&[ModeId::h(path), ModeId::v(path)])?;
        stages.push(stage(format!("projection PBS {path}"), StageKind::Projection, pbs));
    }
    Ok(CircuitPlan { stages, phase_start, phase_end })
}

/// Input state selected by the configuration.
pub fn input_state(cfg: &ExperimentConfig) -> Result<FockState> {
    if cfg.ideal_input {
        sources::four_photon_input(cfg.source.alpha)
    } else {
        sources::spdc_input(&cfg.source)
    }
}

/// Pushes the configured input through the full circuit.
pub fn run(cfg: &ExperimentConfig) -> Result<FockState> {
    let plan = build_circuit(cfg)?;
    let out = plan.apply(&input_state(cfg)?)?;
    let dev = (out.norm_sqr() - 1.0).abs();
    if dev > RUN_NORM_TOL {
        return Err(Error::Numerical(format!("norm drifted by {dev:e} through the circuit")));
    }
    Ok(out)
}

fn distinguishability_transform(modes: &[ModeId], mu: f64) -> Result<ModeTransform> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::param(format!("overlap mu = {mu} outside [0, 1]")));
    }
    let parts = modes
        .iter()
        .map(|&m| {
            ModeTransform::new(
                vec![m],
                vec![m, m.with_internal(1)],
                DMatrix::from_row_slice(1, 2, &[Complex64::new(mu.sqrt(), 0.0), Complex64::new((1.0 - mu).sqrt(), 0.0)]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ModeTransform::direct_sum(&parts)
}

/// Rewrites every photon on Bob's paths as `√μ |wavepacket 0⟩ + √(1-μ) |wavepacket 1⟩`.
///
/// Alice's photons stay in wavepacket 0, so the two-photon interference
/// visibility between the sides becomes `μ`.
pub fn distinguishability_split(state: &FockState, mu: f64) -> Result<FockState> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::param(format!("overlap mu = {mu} outside [0, 1]")));
    }
    if mu == 1.0 {
        return Ok(state.clone());
    }
    let modes: Vec<ModeId> = state
        .register()
        .iter()
        .filter(|m| m.internal == 0 && m.path.side() == Some(Side::Bob))
        .copied()
        .collect();
    if modes.is_empty() {
        return Ok(state.clone());
    }
    state.apply_transform(&distinguishability_transform(&modes, mu)?)
}

/// Gaussian overlap envelope `μ(Δt) = V₀ exp(-Δt² / (2σ²))`.
pub fn hom_overlap_at_delay(delta_t: f64, sigma_t: f64, v0: f64) -> Result<f64> {
    if !(sigma_t > 0.0) {
        return Err(Error::param(format!("sigma_t = {sigma_t} must be positive")));
    }
    if !(0.0..=1.0).contains(&v0) {
        return Err(Error::param(format!("peak visibility {v0} outside [0, 1]")));
    }
    Ok(v0 * (-delta_t * delta_t / (2.0 * sigma_t * sigma_t)).exp())
}
