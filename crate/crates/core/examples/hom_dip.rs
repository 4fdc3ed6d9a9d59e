//! Hong-Ou-Mandel dip through the central station, with a Gaussian fit per
//! detector combination.
//!
//! ```bash
//! cargo run --release --example hom_dip
//! ```

use swapsim::experiments::{fit_scan, hom_scan};
use swapsim::protocol::{hom_overlap_at_delay, ExperimentConfig};

fn main() -> swapsim::Result<()> {
    let mut cfg = ExperimentConfig::ideal(0.7);
    cfg.overlap_mu = 0.95;
    let delays: Vec<f64> = (-40..=40).map(|k| f64::from(k) * 0.25).collect();
    let sigma = 2.0;

    println!("overlap at 0, σ, 2σ: {:.3} {:.3} {:.3}", hom_overlap_at_delay(0.0, sigma, 0.95)?, hom_overlap_at_delay(sigma, sigma, 0.95)?, hom_overlap_at_delay(2.0 * sigma, sigma, 0.95)?);

    let points = hom_scan(&cfg, &delays, sigma)?;
    println!("\ncombo  visibility  center_ps  sigma_ps  baseline");
    for (combo, fit) in fit_scan(&points)? {
        println!("{combo:<6} {:>10.4} {:>10.4} {:>9.4} {:>9.4}", fit.visibility, fit.center_ps, fit.sigma_ps, fit.baseline);
    }
    Ok(())
}
