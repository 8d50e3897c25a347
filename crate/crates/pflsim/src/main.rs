mod config;
mod error;
mod report;
mod runner;

use clap::Parser;
use sha2::{Digest, Sha256};
use std::path::PathBuf;

use error::CliError;

#[derive(Parser)]
#[command(
    name = "pflsim",
    version,
    about = "Phase-Fresnel-lens imaging chain: design, PSF, spectra, photon budget, fits"
)]
struct Cli {
    /// TOML job configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Simulate the reduced-aperture (NA-preserving) lens for seconds-scale runs
    #[arg(long)]
    fast: bool,
    /// Seed for Monte-Carlo fit self-tests
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let raw = std::fs::read(&cli.config)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", cli.config.display())))?;
    let job = config::parse(&raw)?;

    let mut sha = Sha256::new();
    sha.update(&raw);
    let digest = sha.finalize();
    let config_sha256: String = digest.iter().map(|b| format!("{b:02x}")).collect();

    let ctx = runner::Context {
        stamp: report::Stamp {
            version: env!("CARGO_PKG_VERSION"),
            mode: job.mode,
            config_sha256,
            seed: cli.seed,
        },
        fast: cli.fast || job.fast_mode,
        seed: cli.seed,
        config_dir: cli
            .config
            .parent()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };

    // compute everything first: a failing mode leaves no partial outputs
    let files = runner::run(&job, &ctx)?;

    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&job.output_dir));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    for (name, contents) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
