//! Pauli tomography of a heralded state: simulated counts, maximum
//! likelihood reconstruction and a Metropolis-Hastings fidelity posterior.
//!
//! ```bash
//! cargo run --release --example tomography
//! ```

use swapsim::detection::{fidelity_to_psi_minus, herald, purity, DetectorModel, HeraldPattern};
use swapsim::protocol::{run, ExperimentConfig};
use swapsim::tomography::{mh_fidelity_distribution, mle_reconstruct, simulate_counts};

fn main() -> swapsim::Result<()> {
    let cfg = ExperimentConfig::measured_midpoint(0.8f64.sqrt());
    let out = herald(&run(&cfg)?, &HeraldPattern::standard(DetectorModel::Threshold))?;
    let truth = out.conditional;
    println!("herald {:.3e}, true F_ps {:.4}, purity {:.4}", out.herald_prob, fidelity_to_psi_minus(&truth)?.f_postselected, purity(&truth)?);

    for shots in [100, 1000, 10_000] {
        let counts = simulate_counts(&truth, shots, 7)?;
        let rho = mle_reconstruct(&counts)?;
        let post = mh_fidelity_distribution(&counts, 1000, 7)?;
        println!(
            "{shots:>6} shots/setting: MLE F {:.4}, posterior {:.4} ± {:.4} (acceptance {:.2})",
            fidelity_to_psi_minus(&rho)?.f_postselected,
            post.mean,
            post.std,
            post.acceptance_rate
        );
    }
    Ok(())
}
