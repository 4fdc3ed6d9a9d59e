//! Ideal entanglement swap: herald rate and fidelities across the split ratio.
//!
//! ```bash
//! cargo run --release --example swap_circuit
//! ```

use swapsim::detection::{fidelity_to_psi_minus, herald, DetectorModel, HeraldPattern};
use swapsim::protocol::{build_circuit, run, ExperimentConfig};

fn main() -> swapsim::Result<()> {
    let plan = build_circuit(&ExperimentConfig::ideal(0.7))?;
    println!("stages: {}", plan.labels().join(" -> "));

    println!("{:>6} {:>10} {:>10} {:>8} {:>8}", "α²", "herald", "fourfold", "F_ps", "F_total");
    for alpha_sq in [0.5, 0.66, 0.75, 0.9, 0.99] {
        let cfg = ExperimentConfig::ideal(0.7).with_alpha_sq(alpha_sq);
        let out = herald(&run(&cfg)?, &HeraldPattern::standard(DetectorModel::Threshold))?;
        let f = fidelity_to_psi_minus(&out.conditional)?;
        println!(
            "{alpha_sq:>6.2} {:>10.3e} {:>10.3e} {:>8.5} {:>8.5}",
            out.herald_prob,
            out.fourfold_prob(),
            f.f_postselected,
            f.f_total
        );
    }
    Ok(())
}
