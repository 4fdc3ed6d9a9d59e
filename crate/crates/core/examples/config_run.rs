//! Load a JSON config, run the α² sweep and write its CSV and manifest, as
//! the `swapsim sweep-alpha` verb does.
//!
//! ```bash
//! cargo run --release --example config_run -- configs/ideal.json out/
//! ```

use std::path::PathBuf;

use swapsim::experiments::{run_experiment, ConfigFile, Experiment};

fn main() -> swapsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let config = args.next().map_or_else(|| here.join("configs/ideal.json"), PathBuf::from);
    let out = args.next().map_or_else(|| std::env::temp_dir().join("swapsim_example"), PathBuf::from);

    let file = ConfigFile::load(&config)?;
    let manifest = run_experiment(Experiment::SweepAlpha, &file, 1, &out)?;
    for path in &manifest.outputs {
        println!("{}", path.display());
        print!("{}", std::fs::read_to_string(path).map_err(swapsim::Error::from)?);
    }
    Ok(())
}
