//! HOM scan at the central beam splitter.
//!
//! One photon from each side reaches the central station (H on c and on d,
//! rotated to D by the 45° wave plates). Bob's photon overlaps Alice's by
//! `μ(Δt)`. A combination `XY` is the coincidence between the `X` detector
//! behind e and the `Y` detector behind f.

use std::fmt;
use std::io::Write;

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DVector, Dyn, Matrix, OMatrix, Owned, Vector4, U4};
use num_complex::Complex64;

use crate::detection::{accepted_part, Channel, HeraldPattern};
use crate::error::{Error, Result};
use crate::fock::{Arm, FockState, ModeId, ModeRegister, Path, Pol};
use crate::protocol::{self, ExperimentConfig, Stage, StageKind};

pub const HOM_HEADER: [&str; 3] = ["combo", "delta_t_ps", "coincidence_prob"];
pub const HOM_FIT_HEADER: [&str; 5] = ["combo", "visibility", "center_ps", "sigma_ps", "baseline"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Combo {
    pub e: Pol,
    pub f: Pol,
}

impl Combo {
    pub const ALL: [Combo; 4] = [
        Combo { e: Pol::H, f: Pol::H },
        Combo { e: Pol::H, f: Pol::V },
        Combo { e: Pol::V, f: Pol::H },
        Combo { e: Pol::V, f: Pol::V },
    ];

    fn pattern(self) -> Result<HeraldPattern> {
        HeraldPattern::threshold(&[Channel::new(Arm::E, self.e), Channel::new(Arm::F, self.f)])
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.e, self.f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint {
    pub combo: Combo,
    pub delta_t_ps: f64,
    pub coincidence_prob: f64,
}

/// Inverted Gaussian `baseline · (1 - visibility · exp(-(t - center)² / (2 sigma²)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipFit {
    pub visibility: f64,
    pub center_ps: f64,
    pub sigma_ps: f64,
    pub baseline: f64,
}

impl DipFit {
    pub fn eval(&self, t: f64) -> f64 {
        dip(&Vector4::new(self.baseline, self.visibility, self.center_ps, self.sigma_ps), t)
    }
}

fn central_stages(cfg: &ExperimentConfig) -> Result<Vec<Stage>> {
    let plan = protocol::build_circuit(cfg)?;
    Ok(plan
        .stages()
        .iter()
        .filter(|s| {
            matches!(s.kind, StageKind::Rotate | StageKind::CentralBs | StageKind::Projection | StageKind::Loss(Path::C | Path::D))
        })
        .cloned()
        .collect())
}

fn two_photons() -> Result<FockState> {
    let register = ModeRegister::from_paths(&[Path::C, Path::D])?;
    FockState::from_sparse_terms(
        register,
        [([(ModeId::h(Path::C), 1u8), (ModeId::h(Path::D), 1u8)].as_slice(), Complex64::new(1.0, 0.0))],
    )
}

/// Coincidence probability for `combo` at overlap `mu`, using the central
/// station of `cfg` (45° plates, c/d loss, beam splitter, projection PBSs).
pub fn coincidence_probability(cfg: &ExperimentConfig, combo: Combo, mu: f64) -> Result<f64> {
    let stages = central_stages(cfg)?;
    let state = protocol::distinguishability_split(&two_photons()?, mu)?;
    let out = protocol::apply_stages(&stages, &state)?;
    Ok(accepted_part(&out, &combo.pattern()?)?.norm_sqr())
}

/// Coincidences for every combination and delay, with peak overlap
/// `cfg.overlap_mu`. Sorted by combination, then delay.
pub fn hom_scan(cfg: &ExperimentConfig, delays_ps: &[f64], sigma_ps: f64) -> Result<Vec<HomPoint>> {
    if delays_ps.iter().any(|d| !d.is_finite()) {
        return Err(Error::param("delays must be finite"));
    }
    let stages = central_stages(cfg)?;
    let mut delays = delays_ps.to_vec();
    delays.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(4 * delays.len());
    for combo in Combo::ALL {
        let pattern = combo.pattern()?;
        for &dt in &delays {
            let mu = protocol::hom_overlap_at_delay(dt, sigma_ps, cfg.overlap_mu)?;
            let state = protocol::distinguishability_split(&two_photons()?, mu)?;
            let out = protocol::apply_stages(&stages, &state)?;
            points.push(HomPoint { combo, delta_t_ps: dt, coincidence_prob: accepted_part(&out, &pattern)?.norm_sqr() });
        }
    }
    Ok(points)
}

fn dip(p: &Vector4<f64>, t: f64) -> f64 {
    let (b, v, c, s) = (p[0], p[1], p[2], p[3]);
    b * (1.0 - v * (-(t - c).powi(2) / (2.0 * s * s)).exp())
}

struct DipProblem {
    t: Vec<f64>,
    y: Vec<f64>,
    p: Vector4<f64>,
}

impl LeastSquaresProblem<f64, Dyn, U4> for DipProblem {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U4>;
    type ParameterStorage = Owned<f64, U4>;

    fn set_params(&mut self, p: &Vector4<f64>) {
        self.p = *p;
    }

    fn params(&self) -> Vector4<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        Some(DVector::from_iterator(self.t.len(), self.t.iter().zip(&self.y).map(|(t, y)| dip(&self.p, *t) - y)))
    }

    fn jacobian(&self) -> Option<Matrix<f64, Dyn, U4, Owned<f64, Dyn, U4>>> {
        let (b, v, c, s) = (self.p[0], self.p[1], self.p[2], self.p[3]);
        let mut j = OMatrix::<f64, Dyn, U4>::zeros(self.t.len());
        for (i, &t) in self.t.iter().enumerate() {
            let g = (-(t - c).powi(2) / (2.0 * s * s)).exp();
            j[(i, 0)] = 1.0 - v * g;
            j[(i, 1)] = -b * g;
            j[(i, 2)] = -b * v * g * (t - c) / (s * s);
            j[(i, 3)] = -b * v * g * (t - c).powi(2) / (s * s * s);
        }
        Some(j)
    }
}

/// Least-squares fit of an inverted Gaussian to a coincidence scan.
pub fn fit_dip(delays_ps: &[f64], probs: &[f64]) -> Result<DipFit> {
    if delays_ps.len() != probs.len() || delays_ps.len() < 5 {
        return Err(Error::param("dip fit needs at least five (delay, probability) pairs"));
    }
    let baseline = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(baseline > 0.0) {
        return Err(Error::param("no coincidences to fit"));
    }
    let (imin, ymin) = probs.iter().copied().enumerate().fold((0, f64::INFINITY), |m, (i, y)| if y < m.1 { (i, y) } else { m });
    let span = delays_ps.iter().copied().fold(f64::NEG_INFINITY, f64::max) - delays_ps.iter().copied().fold(f64::INFINITY, f64::min);
    let half = baseline - 0.5 * (baseline - ymin);
    let below = delays_ps.iter().zip(probs).filter(|(_, y)| **y < half).count();
    let step = span / (delays_ps.len() - 1) as f64;
    let sigma0 = ((below.max(1) as f64) * step / 2.355).max(step / 2.0);
    let problem = DipProblem {
        t: delays_ps.to_vec(),
        y: probs.to_vec(),
        p: Vector4::new(baseline, 1.0 - ymin / baseline, delays_ps[imin], sigma0),
    };
    let (solved, report) = LevenbergMarquardt::new().with_tol(1e-14).minimize(problem);
    if !report.termination.was_successful() {
        return Err(Error::Numerical(format!("dip fit did not converge: {:?}", report.termination)));
    }
    let p = solved.p;
    Ok(DipFit { baseline: p[0], visibility: p[1], center_ps: p[2], sigma_ps: p[3].abs() })
}

/// One fit per combination present in `points`.
pub fn fit_scan(points: &[HomPoint]) -> Result<Vec<(Combo, DipFit)>> {
    Combo::ALL
        .iter()
        .filter(|c| points.iter().any(|p| p.combo == **c))
        .map(|&c| {
            let (t, y): (Vec<f64>, Vec<f64>) =
                points.iter().filter(|p| p.combo == c).map(|p| (p.delta_t_ps, p.coincidence_prob)).unzip();
            Ok((c, fit_dip(&t, &y)?))
        })
        .collect()
}

pub fn write_hom_csv<W: Write>(points: &[HomPoint], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(HOM_HEADER)?;
    for p in points {
        wr.write_record([p.combo.to_string(), p.delta_t_ps.to_string(), p.coincidence_prob.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_fit_csv<W: Write>(fits: &[(Combo, DipFit)], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(HOM_FIT_HEADER)?;
    for (c, f) in fits {
        wr.write_record([
            c.to_string(),
            f.visibility.to_string(),
            f.center_ps.to_string(),
            f.sigma_ps.to_string(),
            f.baseline.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
