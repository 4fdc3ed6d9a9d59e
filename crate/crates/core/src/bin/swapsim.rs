use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swapsim::experiments::{run_experiment, ConfigFile, Experiment};
use swapsim::Error;

#[derive(Parser)]
#[command(version, about = "Heralded entanglement swapping experiments")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// JSON configuration; defaults to the measured-midpoint setup.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Use the prepared four-photon input instead of SPDC pairs.
    #[arg(long, global = true)]
    ideal_input: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Herald rate and fidelity against the splitting ratio.
    SweepAlpha,
    /// Fidelity spread over random phases.
    PhaseMc,
    /// HOM dip at the central beam splitter.
    Hom,
    /// Tomography round trip on the heralded state.
    Tomo,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    };
    let exp = match cli.verb {
        Verb::SweepAlpha => Experiment::SweepAlpha,
        Verb::PhaseMc => Experiment::PhaseMc,
        Verb::Hom => Experiment::Hom,
        Verb::Tomo => Experiment::Tomo,
    };
    let result = file.and_then(|mut f| {
        f.ideal_input |= cli.ideal_input;
        run_experiment(exp, &f, cli.seed, &cli.out)
    });
    match result {
        Ok(m) => {
            for p in &m.outputs {
                println!("{}", p.display());
            }
            eprintln!("{} done in {:.1} s", m.experiment, m.wall_time_s);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
