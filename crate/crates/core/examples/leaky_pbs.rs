//! Imperfect polarizing beam splitters: the mode matrix, and heralds from
//! Alice's pair alone once the combining PBS leaks.
//!
//! ```bash
//! cargo run --example leaky_pbs
//! ```

use swapsim::detection::{herald, DetectorModel, HeraldPattern};
use swapsim::fock::{FockState, ModeId, ModeRegister, Path};
use swapsim::optics::{pbs_imperfect, PbsImperfection};
use swapsim::protocol::{build_circuit, ExperimentConfig};

/// `(αH + βV)_A (αV + βH)_A'` with nothing on B and B'.
fn alice_pair(alpha: f64) -> swapsim::Result<FockState> {
    let beta = (1.0 - alpha * alpha).sqrt();
    let register = ModeRegister::from_paths(&[Path::A, Path::APrime, Path::B, Path::BPrime])?;
    let mut state = FockState::vacuum(register.clone())?.filter(|_| false);
    for (a, wa) in [(ModeId::h(Path::A), alpha), (ModeId::v(Path::A), beta)] {
        for (ap, wp) in [(ModeId::v(Path::APrime), alpha), (ModeId::h(Path::APrime), beta)] {
            let term = FockState::from_sparse_terms(register.clone(), [([(a, 1u8), (ap, 1u8)].as_slice(), (wa * wp).into())])?;
            state = state.add(&term)?;
        }
    }
    Ok(state)
}

fn main() -> swapsim::Result<()> {
    let pbs = pbs_imperfect(Path::A, Path::APrime, Path::Alice, Path::C, PbsImperfection::leaky(20.0)?)?;
    println!("20 dB PBS, rows H_A V_A H_A' V_A', columns by output mode:");
    for row in pbs.matrix().row_iter() {
        let cells: Vec<String> = row.iter().map(|z| format!("{:+.4}", z.re)).collect();
        println!("  {}", cells.join(" "));
    }

    let pattern = HeraldPattern::standard(DetectorModel::Threshold);
    let base = ExperimentConfig::ideal(0.7).with_alpha_sq(0.5);
    let cases = [
        ("ideal", PbsImperfection::IDEAL),
        ("20 dB both", PbsImperfection::leaky(20.0)?),
        ("20 dB H only", PbsImperfection::new(20.0, f64::INFINITY, 0.0)?),
        ("20 dB, 1.5°", PbsImperfection::new(20.0, 20.0, 1.5f64.to_radians())?),
    ];
    println!("\nherald from Alice's pair only, α² = 0.5:");
    for (name, imp) in cases {
        let cfg = ExperimentConfig { comb_pbs_a: imp, ..base.clone() };
        let out = build_circuit(&cfg)?.apply(&alice_pair(cfg.source.alpha)?)?;
        println!("  {name:<14} {:.3e}", herald(&out, &pattern)?.herald_prob);
    }
    Ok(())
}
