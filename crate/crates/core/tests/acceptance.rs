//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria that the model does not meet print FAIL. The run itself only
//! fails when a result is unexpected: a criterion that should pass fails, or
//! a known deviation moves away from its recorded value.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swapsim::detection::{accepted_part, fidelity_to_psi_minus, herald, DetectorModel, HeraldPattern};
use swapsim::experiments::{fit_scan, hom_scan, phase_monte_carlo, sweep_alpha, PhaseMcOptions};
use swapsim::fock::{FockState, ModeId, ModeRegister, Path, Side};
use swapsim::interference::PhaseResolvedRun;
use swapsim::optics::PbsImperfection;
use swapsim::protocol::{build_circuit, run, ExperimentConfig};
use swapsim::sources::spdc_input;
use swapsim::tomography::{mh_fidelity_distribution, mle_reconstruct, simulate_counts};

type Res<T> = Result<T, String>;

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Outcome {
    pass: bool,
    detail: String,
    /// For known deviations: whether the result still matches the recorded value.
    deviation: Option<bool>,
}

impl Outcome {
    fn checked(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, deviation: None }
    }

    fn deviation(pass: bool, detail: String, as_recorded: bool) -> Self {
        Outcome { pass, detail, deviation: Some(as_recorded) }
    }
}

fn threshold() -> HeraldPattern {
    HeraldPattern::standard(DetectorModel::Threshold)
}

/// Herald-relevant amplitudes of the ideal circuit, split by how many photons
/// stay on a and b and divided by α²β², αβ³ and β⁴.
fn structure_of_output() -> Res<Outcome> {
    let scale = |k: usize, a: f64, b: f64| match k {
        2 => a * a * b * b,
        1 => a * b * b * b,
        _ => b.powi(4),
    };
    let mut reference: Option<BTreeMap<(usize, Vec<u8>), C>> = None;
    let mut worst = 0.0f64;
    let mut sizes = [0usize; 3];
    for alpha_sq in [0.3, 0.5, 0.6, 0.75, 0.9] {
        let cfg = ExperimentConfig::ideal(0.7).with_alpha_sq(alpha_sq);
        let (a, b) = (cfg.source.alpha, cfg.source.beta());
        let accepted = accepted_part(&run(&cfg).map_err(s)?, &threshold()).map_err(s)?;
        let local: Vec<bool> = accepted.register().iter().map(|m| matches!(m.path, Path::Alice | Path::Bob)).collect();
        let mut scaled = BTreeMap::new();
        for (occ, amp) in accepted.terms() {
            let k: usize = occ.iter().zip(&local).filter(|(_, l)| **l).map(|(n, _)| *n as usize).sum();
            if k > 2 {
                return Err(format!("herald term with {k} photons on a, b"));
            }
            scaled.insert((k, occ.clone()), amp / scale(k, a, b));
        }
        match &reference {
            None => {
                for (k, _) in scaled.keys() {
                    sizes[2 - k] += 1;
                }
                reference = Some(scaled);
            }
            Some(r) => {
                if r.keys().ne(scaled.keys()) {
                    return Ok(Outcome::checked(false, format!("term set changes at alpha^2 = {alpha_sq}")));
                }
                for (key, v) in &scaled {
                    worst = worst.max((v - r[key]).norm());
                }
            }
        }
    }
    let pass = worst < 1e-10 && sizes.iter().all(|&n| n > 0);
    Ok(Outcome::checked(
        pass,
        format!(
            "{}/{}/{} terms scale as a^2b^2, ab^3, b^4 over 5 values of alpha; worst drift {worst:.1e}",
            sizes[0], sizes[1], sizes[2]
        ),
    ))
}

const IDEAL_GRID: [f64; 11] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99];

fn ideal_limit() -> Res<Outcome> {
    let rows = sweep_alpha(&ExperimentConfig::ideal(0.7), &IDEAL_GRID).map_err(s)?;
    let monotone = rows.windows(2).all(|w| w[1].f_heralded > w[0].f_heralded);
    let last = rows.last().unwrap().f_heralded;
    // F_total(0.99) follows from the ideal-circuit permanents; see README.
    let as_recorded = monotone && (last - 0.98501).abs() < 1e-5;
    Ok(Outcome::deviation(
        monotone && last > 0.99,
        format!("monotone increasing: {monotone}; F_total(0.99) = {last:.5}, needs > 0.99"),
        as_recorded,
    ))
}

fn rate_tradeoff() -> Res<Outcome> {
    let rows = sweep_alpha(&ExperimentConfig::ideal(0.7), &IDEAL_GRID).map_err(s)?;
    let decreasing = rows.windows(2).all(|w| w[1].fourfold_norm < w[0].fourfold_norm);
    Ok(Outcome::checked(
        decreasing,
        format!(
            "normalized fourfold {:.3} at 0.5 down to {:.2e} at 0.99, strictly decreasing: {decreasing}",
            rows[0].fourfold_norm,
            rows.last().unwrap().fourfold_norm
        ),
    ))
}

fn one_third() -> Res<Outcome> {
    let mut cfg = ExperimentConfig::ideal(0.7).with_alpha_sq(0.5);
    cfg.ideal_input = false;
    cfg.source.p = 0.02;
    cfg.source.n_pair_max = 2;
    // Each pair sector on its own.
    let input = spdc_input(&cfg.source).map_err(s)?;
    let reg = input.register().clone();
    let pairs = |occ: &[u8], side: Side| {
        let i = reg.position(&ModeId::h(Path::Source(side))).unwrap();
        occ[i]
    };
    let sectors = input.split_by(|occ| (pairs(occ, Side::Alice), pairs(occ, Side::Bob)));
    let plan = build_circuit(&cfg).map_err(s)?;
    let mut by_sector = BTreeMap::new();
    for (key, part) in sectors {
        let out = plan.apply(&part).map_err(s)?;
        by_sector.insert(key, accepted_part(&out, &threshold()).map_err(s)?.norm_sqr());
    }
    let total: f64 = by_sector.values().sum();
    let share = by_sector[&(1, 1)] / total;
    // Cross-check against the exact average over path phases.
    let averaged = PhaseResolvedRun::new(&cfg, &threshold()).map_err(s)?.phase_averaged().herald.re;
    let agree = ((averaged - total) / total).abs() < 1e-10;
    let single: f64 = by_sector.iter().filter(|((a, b), _)| a + b == 2 && a != b).map(|(_, p)| p).sum();
    let detail = format!(
        "share of (1,1) sector = {share:.4}, needs 1/3 +- 0.02; one-sided double pairs {:.4}; sector sum matches phase average: {agree}",
        single / total
    );
    Ok(Outcome::deviation((share - 1.0 / 3.0).abs() <= 0.02 && agree, detail, agree && (share - 0.5047).abs() < 5e-4))
}

/// `(αH + βV)_A (αV + βH)_A'` with B and B' empty.
fn alice_pair(alpha: f64) -> Res<FockState> {
    let beta = (1.0 - alpha * alpha).sqrt();
    let register = ModeRegister::from_paths(&[Path::A, Path::APrime, Path::B, Path::BPrime]).map_err(s)?;
    let mut state = FockState::vacuum(register.clone()).map_err(s)?.filter(|_| false);
    for (a, wa) in [(ModeId::h(Path::A), alpha), (ModeId::v(Path::A), beta)] {
        for (ap, wp) in [(ModeId::v(Path::APrime), alpha), (ModeId::h(Path::APrime), beta)] {
            let term = FockState::from_sparse_terms(register.clone(), [([(a, 1u8), (ap, 1u8)].as_slice(), c(wa * wp))])
                .map_err(s)?;
            state = state.add(&term).map_err(s)?;
        }
    }
    Ok(state)
}

fn plate_cancellation() -> Res<Outcome> {
    let ideal = ExperimentConfig::ideal(std::f64::consts::FRAC_1_SQRT_2);
    let one_sided = |cfg: &ExperimentConfig| -> Res<f64> {
        let out = build_circuit(cfg).map_err(s)?.apply(&alice_pair(cfg.source.alpha)?).map_err(s)?;
        Ok(herald(&out, &threshold()).map_err(s)?.herald_prob)
    };
    let p_ideal = one_sided(&ideal)?;
    let leaky = |h: f64, v: f64| ExperimentConfig {
        comb_pbs_a: PbsImperfection::new(h, v, 0.0).unwrap(),
        comb_pbs_b: PbsImperfection::new(h, v, 0.0).unwrap(),
        ..ideal.clone()
    };
    let p_leaky = one_sided(&leaky(20.0, 20.0))?;
    let p_h_only = one_sided(&leaky(20.0, f64::INFINITY))?;
    let detail = format!(
        "ideal PBS {p_ideal:.1e}; ER 20 dB on H and V {p_leaky:.1e}, needs > 0; ER 20 dB on H only {p_h_only:.2e}"
    );
    let as_recorded = p_ideal < 1e-12 && p_leaky < 1e-15 && p_h_only > 1e-4;
    Ok(Outcome::deviation(p_ideal < 1e-12 && p_leaky > 0.0, detail, as_recorded))
}

const LEAK_GRID: [f64; 13] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.9995, 0.9999, 0.99999];

fn leakage_turnover() -> Res<Outcome> {
    let cfg = ExperimentConfig::ideal(0.7).with_extinction_db(30.0);
    let clean = sweep_alpha(&cfg, &LEAK_GRID).map_err(s)?;
    let lossy = sweep_alpha(&cfg.with_uniform_eta(0.7), &LEAK_GRID).map_err(s)?;
    let f: Vec<f64> = clean.iter().map(|r| r.f_heralded).collect();
    // First interior point where the rise stops.
    let peak = (1..f.len() - 1).find(|&i| f[i + 1] < f[i]);
    let rises = peak.is_some_and(|i| f[..=i].windows(2).all(|w| w[1] > w[0]));
    let lower = clean.iter().zip(&lossy).all(|(a, b)| b.f_heralded < a.f_heralded);
    let tail: Vec<String> = f[peak.unwrap_or(0)..].iter().map(|x| format!("{x:.4}")).collect();
    let detail = match peak {
        Some(i) => format!(
            "rises to {:.4} at alpha^2 = {}, then {}; with eta = 0.7 lower at every point: {lower}",
            f[i],
            LEAK_GRID[i],
            tail[1..].join(", ")
        ),
        None => "no interior maximum".to_string(),
    };
    Ok(Outcome::checked(rises && lower, detail))
}

fn phase_band() -> Res<Outcome> {
    let cfg = ExperimentConfig::measured_midpoint(0.7);
    let grid = [0.5, 0.55, 0.6, 0.66, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99];
    let rows = phase_monte_carlo(&cfg, &grid, &PhaseMcOptions { n_sets: 1000, seed: 1, ..PhaseMcOptions::default() })
        .map_err(s)?;
    let at = |a2: f64| rows.iter().find(|r| (r.alpha_sq - a2).abs() < 1e-12).unwrap();
    let (r66, r75) = (at(0.66), at(0.75));
    let band = rows.iter().map(|r| r.band_width()).fold(f64::INFINITY, f64::min);
    let ordered = r75.f_mean < r66.f_mean;
    let detail = format!(
        "mean F_total {:.5} at 0.66, {:.5} at 0.75, needs a decrease; from averaged probabilities {:.5} to {:.5}; narrowest band {band:.4}",
        r66.f_mean, r75.f_mean, r66.f_from_mean_probs, r75.f_from_mean_probs
    );
    let as_recorded = band > 0.0 && !ordered && r75.f_from_mean_probs < r66.f_from_mean_probs;
    Ok(Outcome::deviation(ordered && band > 0.0, detail, as_recorded))
}

fn hom_visibility() -> Res<Outcome> {
    let delays: Vec<f64> = (-60..=60).map(|k| k as f64 * 0.25).collect();
    let mut worst_v = 0.0f64;
    let mut worst_c = 0.0f64;
    for v0 in [0.9, 0.97, 1.0] {
        let cfg = ExperimentConfig { overlap_mu: v0, ..ExperimentConfig::ideal(0.7) };
        let fits = fit_scan(&hom_scan(&cfg, &delays, 2.0).map_err(s)?).map_err(s)?;
        for (_, fit) in fits {
            worst_v = worst_v.max((fit.visibility - v0).abs());
            worst_c = worst_c.max(fit.center_ps.abs());
        }
    }
    Ok(Outcome::checked(
        worst_v <= 0.005 && worst_c < 1e-3,
        format!("V0 in {{0.9, 0.97, 1.0}}, 4 combinations: worst |V - V0| {worst_v:.1e}, worst |center| {worst_c:.1e} ps"),
    ))
}

fn tomography() -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut err = 0.0;
    let (mut std_lo, mut std_hi) = (0.0, 0.0);
    let n = 20;
    for k in 0..n {
        let truth = random_density(&mut rng);
        let f_true = fidelity_to_psi_minus(&truth).map_err(s)?.f_postselected;
        let hi = simulate_counts(&truth, 10_000, 100 + k).map_err(s)?;
        let lo = simulate_counts(&truth, 1_000, 200 + k).map_err(s)?;
        err += (fidelity_to_psi_minus(&mle_reconstruct(&hi).map_err(s)?).map_err(s)?.f_postselected - f_true).abs();
        std_hi += mh_fidelity_distribution(&hi, 1000, 300 + k).map_err(s)?.std;
        std_lo += mh_fidelity_distribution(&lo, 1000, 400 + k).map_err(s)?.std;
    }
    let mean_err = err / n as f64;
    let ratio = std_lo / std_hi;
    let want = 10f64.sqrt();
    Ok(Outcome::checked(
        mean_err < 0.01 && (0.7 * want..=1.3 * want).contains(&ratio),
        format!("20 states: mean |F_true - F_mle| = {mean_err:.4}; MH std ratio 1e3/1e4 shots = {ratio:.2} (sqrt 10 = {want:.2})"),
    ))
}

fn property_suites() -> Res<Outcome> {
    let cases = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures: Vec<String> = Vec::new();
    let mut note = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    for _ in 0..cases {
        let case = OracleCase::random(&mut rng, 3);
        note("oracle", check_oracle(&case));
        let eta = rand::Rng::random::<f64>(&mut rng);
        note("isometry", check_isometry(&OracleCase::random(&mut rng, 4), eta));
        let p = ProtocolCase::random(&mut rng);
        note("convention", check_convention(&p, false));
        note("convention (spdc, averaged)", check_convention(&p, true));
        note("F_total <= F_ps", check_f_total_le_f_ps(&p, false));
        note("F_total <= F_ps (spdc)", check_f_total_le_f_ps(&p, true));
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{cases} cases each: oracle, isometry, convention invariance, F_total <= F_ps; 0 violations")
    } else {
        format!("{} violations, first: {}", failures.len(), failures[0])
    };
    Ok(Outcome::checked(pass, detail))
}

fn main() -> ExitCode {
    // Accept and ignore libtest flags such as --nocapture.
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(u8, fn() -> Res<Outcome>); 10] = [
        (1, structure_of_output),
        (2, ideal_limit),
        (3, rate_tradeoff),
        (4, one_third),
        (5, plate_cancellation),
        (6, leakage_turnover),
        (7, phase_band),
        (8, hom_visibility),
        (9, tomography),
        (10, property_suites),
    ];
    let mut unexpected = 0;
    let mut counts = [0usize; 2];
    for (n, f) in criteria {
        if filter.as_ref().is_some_and(|x| *x != n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail, ok) = match f() {
            Ok(o) => {
                let ok = match o.deviation {
                    None => o.pass,
                    Some(as_recorded) => !o.pass && as_recorded,
                };
                (o.pass, o.detail, ok)
            }
            Err(e) => (false, format!("error: {e}"), false),
        };
        counts[usize::from(!pass)] += 1;
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if ok { "" } else { " [unexpected]" };
        println!("criterion {n}: {tag} {detail} ({:.1} s){note}", start.elapsed().as_secs_f64());
        if !ok {
            unexpected += 1;
        }
    }
    println!("acceptance: {} PASS, {} FAIL, {unexpected} unexpected", counts[0], counts[1]);
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
