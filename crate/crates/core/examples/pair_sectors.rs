//! SPDC input split into pair sectors: weights before the circuit and their
//! share of the Ve∧Hf herald after it.
//!
//! ```bash
//! cargo run --release --example pair_sectors
//! ```

use std::collections::BTreeMap;

use swapsim::detection::{accepted_part, DetectorModel, HeraldPattern};
use swapsim::fock::{ModeId, Path, Side};
use swapsim::interference::PhaseResolvedRun;
use swapsim::protocol::{build_circuit, ExperimentConfig};
use swapsim::sources::{spdc_input, tmsv_truncated};

fn main() -> swapsim::Result<()> {
    let one_side = tmsv_truncated(0.02, 0.0, Side::Alice, 3)?;
    println!("single TMSV, p = 0.02, photon-number weights: {:?}", one_side.photon_sectors());

    let mut cfg = ExperimentConfig::ideal(0.7).with_alpha_sq(0.5);
    cfg.ideal_input = false;
    cfg.source.p = 0.02;
    cfg.source.n_pair_max = 2;
    let pattern = HeraldPattern::standard(DetectorModel::Threshold);

    let input = spdc_input(&cfg.source)?;
    let register = input.register().clone();
    let pairs = |occ: &[u8], side: Side| occ[register.position(&ModeId::h(Path::Source(side))).unwrap()];
    let plan = build_circuit(&cfg)?;
    let mut heralds = BTreeMap::new();
    for (key, part) in input.split_by(|occ| (pairs(occ, Side::Alice), pairs(occ, Side::Bob))) {
        let weight = part.norm_sqr();
        let p = accepted_part(&plan.apply(&part)?, &pattern)?.norm_sqr();
        heralds.insert(key, (weight, p));
    }
    let total: f64 = heralds.values().map(|(_, p)| p).sum();
    println!("\n(pairs A, pairs B)   weight      herald      share");
    for ((a, b), (w, p)) in &heralds {
        println!("({a}, {b})  {w:>18.3e} {p:>11.3e} {:>10.4}", p / total);
    }

    let averaged = PhaseResolvedRun::new(&cfg, &pattern)?.phase_averaged().herald.re;
    println!("\nsector sum {total:.6e}, phase-averaged run {averaged:.6e}");
    Ok(())
}
