//! `cubic-bm`: census, critical primes, local counting, Brauer evaluation,
//! Peyre assembly and point search for cubic surfaces.

mod commands;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use manifest::REPORT_HEADER;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
}

impl From<cubic_core::Error> for CliError {
    fn from(e: cubic_core::Error) -> Self {
        match e {
            cubic_core::Error::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<cubic_core::ParseError> for CliError {
    fn from(e: cubic_core::ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "cubic-bm", version, about = "Brauer–Manin toolkit for cubic surfaces")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record wall-clock time in the manifest (reports are then no longer byte-identical).
    #[arg(long, global = true)]
    timing: bool,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// H¹ census of subgroup classes.
    Census(CensusArgs),
    /// Critical primes of the surface attached to a sextic.
    Surface(SurfaceArgs),
    /// Point counts modulo p^m, p-adic and Tamagawa densities, real density.
    Count(CountArgs),
    /// Local evaluation tables and the Brauer-allowed fraction of adelic mass.
    Evaluate(EvaluateArgs),
    /// Peyre's constant and the predicted point count.
    Peyre(PeyreArgs),
    /// Rational points up to a height bound.
    Search(SearchArgs),
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    /// Do not fuse classes under W(E6).
    #[arg(long)]
    pub no_fusion: bool,
    /// Census of all subgroup classes of W(E6) instead of the double-six stabilizer.
    #[arg(long)]
    pub stretch: bool,
    /// Time limit for the subgroup search, in seconds.
    #[arg(long)]
    pub max_seconds: Option<u64>,
    /// Print one row per class.
    #[arg(long)]
    pub table: bool,
}

#[derive(Args, Debug)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub sextic: PathBuf,
    #[arg(long)]
    pub surface: PathBuf,
    /// Bad-prime search bound.
    #[arg(long, default_value_t = 50)]
    pub bound: u64,
    /// Bad primes known from elsewhere (repeatable).
    #[arg(long = "annotate")]
    pub annotated: Vec<u64>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub surface: PathBuf,
    /// Primes to count at (repeatable).
    #[arg(long = "prime")]
    pub primes: Vec<u64>,
    /// Largest exponent m for #S(Z/p^m).
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Sextic for Frobenius data; enables Tamagawa densities at good primes.
    #[arg(long)]
    pub sextic: Option<PathBuf>,
    /// Monte Carlo samples per chart for the real density (0 = skip).
    #[arg(long, default_value_t = 0)]
    pub real_samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Local mass tables (repeatable); override any computed table at the same place.
    #[arg(long = "table")]
    pub tables: Vec<PathBuf>,
    /// Label the supplied tables as published values rather than user input.
    #[arg(long)]
    pub published_tables: bool,
    /// Tritangent data for computing tables at `--place`.
    #[arg(long)]
    pub tritangent: Option<PathBuf>,
    #[arg(long)]
    pub surface: Option<PathBuf>,
    #[arg(long)]
    pub sextic: Option<PathBuf>,
    /// Finite places at which to compute tables (repeatable).
    #[arg(long = "place")]
    pub places: Vec<u64>,
    /// Invariants of the character group, e.g. `2` or `2,2`.
    #[arg(long, value_delimiter = ',')]
    pub group: Vec<u64>,
    #[arg(long, default_value_t = 6)]
    pub max_level: u32,
}

#[derive(Args, Debug)]
pub struct PeyreArgs {
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long)]
    pub sextic: PathBuf,
    /// Override α (exact rational).
    #[arg(long)]
    pub alpha: Option<String>,
    /// Override β.
    #[arg(long)]
    pub beta: Option<u64>,
    /// Override L(1, χ_P), e.g. `0.58+-0.01`.
    #[arg(long)]
    pub l_value: Option<String>,
    /// τ_H of the Brauer-unobstructed adelic points.
    #[arg(long)]
    pub adelic_mass: Option<String>,
    /// Published τ, reported separately from the recomputation.
    #[arg(long)]
    pub tau_published: Option<f64>,
    /// Euler product cutoff for the L-value.
    #[arg(long, default_value_t = 10_000)]
    pub cutoff: u64,
    /// Primes sampled to identify the Galois image.
    #[arg(long, default_value_t = 5000)]
    pub image_bound: u64,
    /// Height bound for the predicted count.
    #[arg(long, default_value_t = 4000)]
    pub bound: u64,
    /// Also count points up to this height.
    #[arg(long)]
    pub search: Option<i64>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long)]
    pub bound: i64,
    /// Write the points here, one per line as four integers.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let (mut manifest, body) = match &cli.command {
        Command::Census(a) => commands::census(a)?,
        Command::Surface(a) => commands::surface(a)?,
        Command::Count(a) => commands::count(a)?,
        Command::Evaluate(a) => commands::evaluate(a)?,
        Command::Peyre(a) => commands::peyre(a)?,
        Command::Search(a) => commands::search(a)?,
    };
    if cli.timing {
        manifest.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = format!("{REPORT_HEADER}\n# manifest {}\n{body}", manifest.to_json());
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Input(_) => 2,
                CliError::Resource(_) => 3,
            })
        }
    }
}
