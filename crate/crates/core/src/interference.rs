//! Phase-resolved evaluation of the circuit.
//!
//! Pump phases and preparation phases only multiply components with fixed
//! photon numbers on the prepared paths A, A', B, B'. The state after the
//! preparation wave plates is split into those components, each component is
//! pushed through the remaining circuit once, and herald moments between
//! component pairs are cached. A phase set is then a weighted sum of cached
//! moments.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::detection::{self, HeraldMoments, HeraldOutcome, HeraldPattern, HeraldProjection};
use crate::error::Result;
use crate::fock::Path;
use crate::protocol::{self, ExperimentConfig, Stage, StageKind, PREP_PATHS};

/// Extra phases on top of those already in the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseSet {
    pub theta_a: f64,
    pub theta_b: f64,
    /// Path phases on A, A', B, B'.
    pub prep: [f64; 4],
}

impl PhaseSet {
    fn factor(&self, counts: &[u8; 4]) -> Complex64 {
        let n = counts.map(f64::from);
        let pump = self.theta_a * (n[0] + n[1]) / 2.0 + self.theta_b * (n[2] + n[3]) / 2.0;
        let prep: f64 = self.prep.iter().zip(n).map(|(phi, k)| phi * k).sum();
        Complex64::from_polar(1.0, pump + prep)
    }
}

#[derive(Debug, Clone)]
pub struct PhaseResolvedRun {
    keys: Vec<[u8; 4]>,
    /// `(k, l, moments of |k⟩⟨l|)` for `k <= l`.
    pairs: Vec<(usize, usize, HeraldMoments)>,
}

impl PhaseResolvedRun {
    pub fn new(cfg: &ExperimentConfig, pattern: &HeraldPattern) -> Result<Self> {
        let plan = protocol::build_circuit(cfg)?;
        let prepared = protocol::apply_stages(plan.before_phases(), &protocol::input_state(cfg)?)?;
        let slots: Vec<Option<usize>> =
            prepared.register().iter().map(|m| PREP_PATHS.iter().position(|p| *p == m.path)).collect();
        let components = prepared.split_by(|occ| {
            let mut k = [0u8; 4];
            for (n, slot) in occ.iter().zip(&slots) {
                if let Some(s) = slot {
                    k[*s] += n;
                }
            }
            k
        });
        let keys: Vec<[u8; 4]> = components.keys().copied().collect();
        // Loss on a and b commutes with the herald projection; applying it to
        // the accepted part only keeps the intermediate states small.
        let (local_loss, main): (Vec<Stage>, Vec<Stage>) = plan
            .after_phases()
            .iter()
            .cloned()
            .partition(|s| matches!(s.kind, StageKind::Loss(Path::Alice | Path::Bob)));
        // Terms with too few photons left for the central station never herald.
        let bs = main.iter().position(|s| s.kind == StageKind::CentralBs).unwrap_or(main.len());
        let (to_bsm, bsm) = main.split_at(bs);
        let need = pattern.min_photons();
        let projections: Vec<HeraldProjection> = components
            .into_par_iter()
            .map(|(_, c)| {
                let before = protocol::apply_stages(to_bsm, &c)?;
                let central: Vec<bool> =
                    before.register().iter().map(|m| matches!(m.path, Path::C | Path::D)).collect();
                let before = before.filter(|occ| {
                    occ.iter().zip(&central).filter(|(_, c)| **c).map(|(n, _)| *n as usize).sum::<usize>() >= need
                });
                let out = protocol::apply_stages(bsm, &before)?;
                let accepted = detection::accepted_part(&out, pattern)?;
                let delivered = protocol::apply_stages(&local_loss, &accepted)?;
                HeraldProjection::new(&accepted, &delivered)
            })
            .collect::<Result<_>>()?;
        let total = |k: &[u8; 4]| k.iter().map(|&n| n as u32).sum::<u32>();
        let index: Vec<(usize, usize)> = (0..keys.len())
            .flat_map(|k| (k..keys.len()).map(move |l| (k, l)))
            .filter(|&(k, l)| {
                total(&keys[k]) == total(&keys[l]) && !projections[k].is_empty() && !projections[l].is_empty()
            })
            .collect();
        let pairs = index
            .into_par_iter()
            .map(|(k, l)| Ok((k, l, projections[k].moments(&projections[l])?)))
            .collect::<Result<_>>()?;
        Ok(PhaseResolvedRun { keys, pairs })
    }

    /// Photon numbers on A, A', B, B' of each component.
    pub fn components(&self) -> &[[u8; 4]] {
        &self.keys
    }

    pub fn moments(&self, phases: &PhaseSet) -> HeraldMoments {
        let c: Vec<Complex64> = self.keys.iter().map(|k| phases.factor(k)).collect();
        let mut acc = HeraldMoments::zero();
        for (k, l, m) in &self.pairs {
            let term = m.scaled(c[*k] * c[*l].conj());
            acc.add_assign(&term);
            if k != l {
                acc.add_assign(&HeraldMoments { herald: term.herald.conj(), block: term.block.adjoint() });
            }
        }
        acc
    }

    pub fn outcome(&self, phases: &PhaseSet) -> Result<HeraldOutcome> {
        self.moments(phases).outcome()
    }

    /// Moments of each component on its own.
    pub fn component_moments(&self) -> Vec<([u8; 4], HeraldMoments)> {
        self.pairs.iter().filter(|(k, l, _)| k == l).map(|(k, _, m)| (self.keys[*k], *m)).collect()
    }

    /// Exact average over independent uniform phases on A, A', B, B': the
    /// cross terms between components vanish.
    pub fn phase_averaged(&self) -> HeraldMoments {
        let mut acc = HeraldMoments::zero();
        for (_, m) in self.component_moments() {
            acc.add_assign(&m);
        }
        acc
    }
}

/// Configuration with the phases of `set` added to its own.
pub fn with_phases(cfg: &ExperimentConfig, set: &PhaseSet) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.source.theta_a += set.theta_a;
    c.source.theta_b += set.theta_b;
    for (path, phi) in PREP_PATHS.iter().zip(set.prep) {
        let cur: f64 = c.prep_phase(*path);
        c.prep_phases.insert(*path, cur + phi);
    }
    c
}
