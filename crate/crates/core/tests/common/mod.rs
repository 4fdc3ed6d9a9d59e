//! Property checks shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use swapsim::detection::{fidelity_to_psi_minus, herald, psi_minus, DensityMatrix2Q, DetectorModel, HeraldPattern};
use swapsim::fock::{FockState, ModeId, ModeRegister, ModeTransform, Path};
use swapsim::interference::PhaseResolvedRun;
use swapsim::optics::{BsConvention, PbsImperfection};
use swapsim::protocol::{run, ExperimentConfig, LOSSY_PATHS, PREP_PATHS};

pub type C = Complex64;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Unitary from a complex Gaussian matrix by QR with the phases of `R`'s
/// diagonal pushed back into `Q`.
pub fn unitary_from(gaussian: &[f64], n: usize) -> DMatrix<C> {
    let g = DMatrix::from_fn(n, n, |i, j| C::new(gaussian[2 * (i * n + j)], gaussian[2 * (i * n + j) + 1]));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    DMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        q[(i, j)] * ph
    })
}

pub fn gaussians(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn ports(n: usize) -> Vec<ModeId> {
    (0..n as u16).map(|k| ModeId::h(Path::Port(k))).collect()
}

/// Every occupation of `modes` modes with at most `max` photons.
pub fn occupations(modes: usize, max: u8) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..modes {
        out = out
            .into_iter()
            .flat_map(|o: Vec<u8>| {
                let used: u8 = o.iter().sum();
                (0..=max - used).map(move |k| {
                    let mut v = o.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

fn permanent(m: &DMatrix<C>) -> C {
    let n = m.nrows();
    if n == 0 {
        return c(1.0);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = c(0.0);
    permute(&mut perm, 0, &mut |p| total += (0..n).map(|i| m[(i, p[i])]).product::<C>());
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Output amplitudes by permanents: `⟨m|U|n⟩ = Perm(U[n, m]) / √(Π n! Π m!)`.
pub fn permanent_apply(terms: &[(Vec<u8>, C)], u: &DMatrix<C>) -> BTreeMap<Vec<u8>, C> {
    let modes = u.nrows();
    let mut out: BTreeMap<Vec<u8>, C> = BTreeMap::new();
    for (n, amp) in terms {
        let total: u8 = n.iter().sum();
        let rows: Vec<usize> = n.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
        for m in occupations(modes, total).into_iter().filter(|m| m.iter().sum::<u8>() == total) {
            let cols: Vec<usize> = m.iter().enumerate().flat_map(|(j, &k)| std::iter::repeat_n(j, k as usize)).collect();
            let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| u[(rows[i], cols[j])]);
            let norm = (n.iter().map(|&k| factorial(k)).product::<f64>() * m.iter().map(|&k| factorial(k)).product::<f64>()).sqrt();
            *out.entry(m).or_insert(c(0.0)) += amp * permanent(&sub) / norm;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct OracleCase {
    pub modes: usize,
    pub terms: Vec<(Vec<u8>, C)>,
    pub unitary: DMatrix<C>,
}

impl OracleCase {
    pub fn build(modes: usize, max_photons: u8, weights: &[f64], gaussian: &[f64]) -> Self {
        let occs = occupations(modes, max_photons);
        let mut terms: Vec<(Vec<u8>, C)> = occs
            .into_iter()
            .zip(weights.chunks(2))
            .map(|(o, w)| (o, C::new(w[0], w.get(1).copied().unwrap_or(0.0))))
            .filter(|(_, a)| a.norm() > 1e-3)
            .collect();
        if terms.is_empty() {
            terms.push((vec![1; modes], c(1.0)));
        }
        let z = terms.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        for t in &mut terms {
            t.1 /= z;
        }
        OracleCase { modes, terms, unitary: unitary_from(gaussian, modes) }
    }

    pub fn random(rng: &mut ChaCha8Rng, max_photons: u8) -> Self {
        let modes = rng.random_range(1..=3);
        let weights = gaussians(rng, 2 * occupations(modes, max_photons).len());
        let g = gaussians(rng, 2 * modes * modes);
        OracleCase::build(modes, max_photons, &weights, &g)
    }
}

/// Sparse engine against the permanent formula.
pub fn check_oracle(case: &OracleCase) -> Result<(), String> {
    let register = ModeRegister::new(ports(case.modes)).map_err(|e| e.to_string())?;
    let state = FockState::from_terms(register, case.terms.clone()).map_err(|e| e.to_string())?;
    let t = ModeTransform::square(ports(case.modes), case.unitary.clone()).map_err(|e| e.to_string())?;
    let got = state.apply_transform(&t).map_err(|e| e.to_string())?;
    let want = permanent_apply(&case.terms, &case.unitary);
    for (occ, amp) in &want {
        let g = got.amplitude(occ);
        if (g - amp).norm() > 1e-10 {
            return Err(format!("amplitude of {occ:?}: engine {g}, permanent {amp}"));
        }
    }
    if got.num_terms() > want.iter().filter(|(_, a)| a.norm() >= 1e-12).count() {
        return Err("engine produced occupations the oracle does not have".into());
    }
    Ok(())
}

/// Unitaries and isometries into extra modes keep the norm.
pub fn check_isometry(case: &OracleCase, loss_eta: f64) -> Result<(), String> {
    let register = ModeRegister::new(ports(case.modes)).map_err(|e| e.to_string())?;
    let state = FockState::from_terms(register, case.terms.clone()).map_err(|e| e.to_string())?;
    let t = ModeTransform::square(ports(case.modes), case.unitary.clone()).map_err(|e| e.to_string())?;
    let out = state.apply_transform(&t).map_err(|e| e.to_string())?;
    let lossy = swapsim::optics::loss_channel(ports(case.modes)[0], loss_eta, 0).map_err(|e| e.to_string())?;
    let out2 = out.apply_transform(&lossy).map_err(|e| e.to_string())?;
    for (what, s) in [("unitary", &out), ("loss", &out2)] {
        let dev = (s.norm_sqr() - 1.0).abs();
        if dev > 1e-12 {
            return Err(format!("{what}: norm drift {dev:e}"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ProtocolCase {
    pub alpha_sq: f64,
    /// Extinction ratio per PBS; `None` for an ideal PBS.
    pub er_db: [Option<f64>; 6],
    pub misalignment_rad: [f64; 2],
    pub eta: [f64; 4],
    pub prep_phases: [f64; 4],
    pub overlap_mu: f64,
    pub pnr: bool,
}

impl ProtocolCase {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut er = [None; 6];
        for e in &mut er {
            if rng.random::<f64>() < 0.7 {
                *e = Some(rng.random_range(15.0..45.0));
            }
        }
        ProtocolCase {
            alpha_sq: rng.random_range(0.05..0.995),
            er_db: er,
            misalignment_rad: [rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)],
            eta: [0; 4].map(|_| rng.random_range(0.3..=1.0)),
            prep_phases: [0; 4].map(|_| rng.random_range(0.0..std::f64::consts::TAU)),
            overlap_mu: rng.random_range(0.5..=1.0),
            pnr: rng.random::<bool>(),
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        let pbs = |k: usize, mis: f64| {
            let er = self.er_db[k].unwrap_or(f64::INFINITY);
            PbsImperfection { extinction_h_db: er, extinction_v_db: er, misalignment_rad: mis }
        };
        let mut cfg = ExperimentConfig::ideal(0.7).with_alpha_sq(self.alpha_sq);
        cfg.split_pbs_a = pbs(0, self.misalignment_rad[0]);
        cfg.split_pbs_b = pbs(1, self.misalignment_rad[1]);
        cfg.comb_pbs_a = pbs(2, 0.0);
        cfg.comb_pbs_b = pbs(3, 0.0);
        cfg.bsm_pbs_e = pbs(4, 0.0);
        cfg.bsm_pbs_f = pbs(5, 0.0);
        cfg.path_eta = LOSSY_PATHS.iter().copied().zip(self.eta).collect();
        cfg.prep_phases = PREP_PATHS.iter().copied().zip(self.prep_phases).collect();
        cfg.overlap_mu = self.overlap_mu;
        cfg.detector_model = if self.pnr { DetectorModel::Pnr } else { DetectorModel::Threshold };
        cfg
    }

    /// The same case with SPDC input (one pair at most per side).
    pub fn spdc_config(&self) -> ExperimentConfig {
        let mut cfg = self.config();
        cfg.ideal_input = false;
        cfg.source.p = 0.1;
        cfg.source.n_pair_max = 1;
        cfg
    }
}

fn herald_prob(cfg: &ExperimentConfig) -> Result<f64, String> {
    let pattern = HeraldPattern::standard(cfg.detector_model);
    let out = run(cfg).map_err(|e| e.to_string())?;
    Ok(herald(&out, &pattern).map_err(|e| e.to_string())?.herald_prob)
}

/// Herald probabilities do not depend on the beam-splitter phase convention.
/// With SPDC input the comparison is made after averaging over phases.
pub fn check_convention(case: &ProtocolCase, spdc: bool) -> Result<(), String> {
    let real = |cfg: &ExperimentConfig| ExperimentConfig { bs_convention: BsConvention::RealSign, ..cfg.clone() };
    let (a, b) = if spdc {
        let cfg = case.spdc_config();
        let pattern = HeraldPattern::standard(cfg.detector_model);
        let avg = |cfg: &ExperimentConfig| -> Result<f64, String> {
            let pr = PhaseResolvedRun::new(cfg, &pattern).map_err(|e| e.to_string())?;
            Ok(pr.phase_averaged().herald.re)
        };
        (avg(&cfg)?, avg(&real(&cfg))?)
    } else {
        let cfg = case.config();
        (herald_prob(&cfg)?, herald_prob(&real(&cfg))?)
    };
    if (a - b).abs() > 1e-10 * a.abs().max(1e-6) {
        return Err(format!("herald probability {a:e} (symmetric) vs {b:e} (real)"));
    }
    Ok(())
}

/// The heralded fidelity never exceeds the postselected one.
pub fn check_f_total_le_f_ps(case: &ProtocolCase, spdc: bool) -> Result<(), String> {
    let cfg = if spdc { case.spdc_config() } else { case.config() };
    let pattern = HeraldPattern::standard(cfg.detector_model);
    let out = herald(&run(&cfg).map_err(|e| e.to_string())?, &pattern).map_err(|e| e.to_string())?;
    let f = fidelity_to_psi_minus(&out.conditional).map_err(|e| e.to_string())?;
    if f.f_total > f.f_postselected + 1e-12 {
        return Err(format!("F_total {} > F_ps {}", f.f_total, f.f_postselected));
    }
    Ok(())
}

/// Hilbert-Schmidt random state mixed with |Ψ⁻⟩ at weight `w`, so the
/// fidelities spread over (0, 1) while the state stays full rank.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix2Q {
    let g = gaussians(rng, 32);
    let a = nalgebra::Matrix4::from_fn(|i, j| C::new(g[2 * (4 * i + j)], g[2 * (4 * i + j) + 1]));
    let hs = a * a.adjoint();
    let hs = hs / hs.trace();
    let psi = psi_minus();
    let w = rng.random_range(0.0..0.9);
    let rho = hs * c(1.0 - w) + psi * psi.adjoint() * c(w);
    DensityMatrix2Q::new(rho, 1.0).expect("valid state")
}
