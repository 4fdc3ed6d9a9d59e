//! Photon sources: the idealized four-photon input and truncated SPDC pairs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, ModeRegister, Path, Side};
use crate::optics::hwp;

/// Source settings for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    /// Amplitude kept on the distributed side, `|β|² = 1 - α²`.
    pub alpha: f64,
    /// Pair amplitude per pulse (`tanh λ`), not a probability.
    pub p: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    /// Pairs per side kept in the truncated TMSV.
    pub n_pair_max: u8,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig { alpha: std::f64::consts::FRAC_1_SQRT_2, p: 3e-3f64.sqrt(), theta_a: 0.0, theta_b: 0.0, n_pair_max: 2 }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return Err(Error::param(format!("pair amplitude p = {} must be >= 0", self.p)));
        }
        if !(1..=2).contains(&self.n_pair_max) {
            return Err(Error::param(format!("n_pair_max = {} must be 1 or 2", self.n_pair_max)));
        }
        if !self.theta_a.is_finite() || !self.theta_b.is_finite() {
            return Err(Error::param("pump phases must be finite"));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha * self.alpha).max(0.0).sqrt()
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha * self.alpha
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::param(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// Four single photons, already prepared:
///
/// `(α|H⟩ + β|V⟩)_A (α|V⟩ + β|H⟩)_A' (α|H⟩ + β|V⟩)_B (α|V⟩ + β|H⟩)_B'`.
pub fn four_photon_input(alpha: f64) -> Result<FockState> {
    check_alpha(alpha)?;
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let register = ModeRegister::from_paths(&[Path::A, Path::APrime, Path::B, Path::BPrime])?;
    let mut state = FockState::vacuum(register.clone())?.filter(|_| false);
    let factors = [
        (Path::A, [(ModeId::h(Path::A), alpha), (ModeId::v(Path::A), beta)]),
        (Path::APrime, [(ModeId::v(Path::APrime), alpha), (ModeId::h(Path::APrime), beta)]),
        (Path::B, [(ModeId::h(Path::B), alpha), (ModeId::v(Path::B), beta)]),
        (Path::BPrime, [(ModeId::v(Path::BPrime), alpha), (ModeId::h(Path::BPrime), beta)]),
    ];
    for mask in 0..16u32 {
        let mut amp = 1.0;
        let mut counts = Vec::with_capacity(4);
        for (k, (_, choices)) in factors.iter().enumerate() {
            let (mode, a) = choices[((mask >> k) & 1) as usize];
            amp *= a;
            counts.push((mode, 1u8));
        }
        if amp != 0.0 {
            let term = FockState::from_sparse_terms(register.clone(), [(counts.as_slice(), Complex64::new(amp, 0.0))])?;
            state = state.add(&term)?;
        }
    }
    Ok(state)
}

/// Two-mode squeezed vacuum truncated after `n_pair_max` pairs, on the H
/// (signal) and V (idler) modes of the crystal output of `side`:
///
/// `Σ_n e^{inθ} pⁿ |n_H, n_V⟩ / √(Σ_n p^{2n})`.
pub fn tmsv_truncated(p: f64, theta: f64, side: Side, n_pair_max: u8) -> Result<FockState> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::param(format!("pair amplitude p = {p} must be >= 0")));
    }
    if p > 0.2 {
        log::warn!("pair amplitude p = {p} is large; the truncated TMSV misses O(p^{}) terms", n_pair_max + 1);
    }
    let path = Path::Source(side);
    let register = ModeRegister::from_paths(&[path])?;
    let norm = (0..=n_pair_max).map(|n| p.powi(2 * i32::from(n))).sum::<f64>().sqrt();
    let terms = (0..=n_pair_max).map(|n| {
        let amp = Complex64::from_polar(p.powi(i32::from(n)) / norm, f64::from(n) * theta);
        (vec![n, n], amp)
    });
    FockState::from_terms(register, terms)
}

/// `tmsv(A) ⊗ tmsv(B)` with the configured pump phases.
pub fn spdc_input(cfg: &SourceConfig) -> Result<FockState> {
    cfg.validate()?;
    let a = tmsv_truncated(cfg.p, cfg.theta_a, Side::Alice, cfg.n_pair_max)?;
    let b = tmsv_truncated(cfg.p, cfg.theta_b, Side::Bob, cfg.n_pair_max)?;
    a.tensor_product(&b)
}

/// Paths leaving the splitting PBS of `side`: (transmitted H, reflected V).
pub fn prepared_paths(side: Side) -> (Path, Path) {
    match side {
        Side::Alice => (Path::A, Path::APrime),
        Side::Bob => (Path::B, Path::BPrime),
    }
}

/// HWP angle on the unprimed path that turns H into `α H + β V`: `arccos(α)/2`.
///
/// The primed path, carrying V, uses `π/2` minus this angle so that V becomes
/// `α V + β H`.
pub fn prep_hwp_angle(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha.acos() / 2.0)
}

/// Sets the input polarizations on one side with half-wave plates.
pub fn apply_state_prep(state: &FockState, alpha: f64, side: Side) -> Result<FockState> {
    let theta = prep_hwp_angle(alpha)?;
    let (unprimed, primed) = prepared_paths(side);
    state
        .apply_transform_all_wavepackets(&hwp(unprimed, theta)?)?
        .apply_transform_all_wavepackets(&hwp(primed, std::f64::consts::FRAC_PI_2 - theta)?)
}
