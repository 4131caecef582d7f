use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use factorsource::pipeline::{self, RunConfig};
use factorsource::Error;

#[derive(Parser)]
#[command(name = "factorsource", version, about = "Multi-frequency factorization imaging of radiating sources")]
struct Cli {
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (defaults to the config's `[output] directory`, then `out`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Overrides `[noise] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize far- or near-field records for every observation.
    Simulate(Common),
    /// Image the support from simulated records and print contrast metrics.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Directory holding the records (defaults to the output directory).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the factorization, range and support-interval oracles.
    Validate {
        /// Build the catalog from this configuration instead of the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the report as CSV into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Factorize on a different quadrature than the data (negative control).
        #[arg(long)]
        mismatched_quadrature: bool,
    },
    /// Print directional extents or annulus radii of the configured domain.
    Extents {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Exit status for a failed run.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. }
        | Error::InvalidConfig(_)
        | Error::InvalidArgument(_)
        | Error::InvalidGeometry(_)
        | Error::ResolutionTooCoarse { .. }
        | Error::PositivityViolation { .. } => 2,
        Error::NumericFailure(_) | Error::Degenerate(_) | Error::SingularTestPoint { .. } => 3,
        Error::Data(_) | Error::IncompleteRecord { .. } | Error::Io(_) => 4,
    }
}

const ORACLE_FAILURE: u8 = 5;

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((config, out))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate(common) => {
            let (config, out) = load(&common)?;
            let manifest = pipeline::simulate(&config, &out)?;
            log::info!("wrote {} record files to {}", manifest.files.len(), out.display());
        }
        Command::Reconstruct { common, data } => {
            let (config, out) = load(&common)?;
            let data = data.unwrap_or_else(|| out.clone());
            let result = pipeline::reconstruct(&config, &data, &out)?;
            print!("{}", result.metric_lines());
            log::info!("wrote {} files to {}", result.manifest.files.len(), out.display());
        }
        Command::Validate { config, out, mismatched_quadrature } => {
            let config = config.as_deref().map(RunConfig::load).transpose()?;
            let report = pipeline::validate(config.as_ref(), mismatched_quadrature)?;
            print!("{}", report.to_text());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(Path::new(&dir).join("validation.csv"), report.to_csv())?;
            }
            if !report.passed() {
                for check in report.failures() {
                    eprintln!("oracle failed: {} = {:e} (bound {:e})", check.name, check.value, check.bound);
                }
                return Ok(ORACLE_FAILURE);
            }
        }
        Command::Extents { config } => {
            print!("{}", pipeline::extents_report(&RunConfig::load(&config)?)?);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
