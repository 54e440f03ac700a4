mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use config::CliError;

/// Rotation theory and circle factors of torus homeomorphisms.
///
/// Every command prints a JSON summary. With --out, tables are written as
/// CSV (or JSON with --format json) and each file starts with the resolved
/// configuration, the library version and the gallery manifest hash.
///
/// Exit codes: 0 success, 1 usage, 2 numeric check failed, 3 window exhausted.
#[derive(Parser, Debug)]
#[command(name = "circfactor", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rotation number of a circle map. No table.
    Rotnum(RotnumFlags),
    /// Deviation profile D(n). Table columns: n, forward, backward, combined.
    /// With --spread: n, forward, backward horizontal spread.
    Deviations(DeviationFlags),
    /// Orbit of the centralized skew product. Table columns: n, t, x, y.
    Skeworbit(SkewFlags),
    /// Circle factor of a map. Tables: factor (x, y, h) and one boundary
    /// cloud (x, y) per --sladder value.
    Factor(FactorFlags),
    /// Evidence report for a gallery example (3.1, 3.2, 3.3, 3.4-geometry, no-gap).
    Gallery(GalleryFlags),
    /// Pair of circle factors, one per coordinate. Table columns: x, y, h1, h2.
    DoubleFactor(DoubleFlags),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every command.
#[derive(Args, Debug, Serialize)]
pub struct Output {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Serialize)]
pub struct RotnumFlags {
    /// Rigid rotation by this angle.
    #[arg(long, conflicts_with_all = ["denjoy", "circle"])]
    #[serde(skip)]
    pub rigid: Option<f64>,
    /// Truncated Denjoy map with this rotation number (number, golden or silver).
    #[arg(long, conflicts_with = "circle")]
    #[serde(skip)]
    pub denjoy: Option<String>,
    /// Circle map definition as inline JSON or a file.
    #[arg(long)]
    #[serde(skip)]
    pub circle: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

/// Map definition as inline JSON, a file path, or a gallery id.
#[derive(Args, Debug, Serialize)]
pub struct MapFlag {
    #[arg(long)]
    #[serde(skip)]
    pub map: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct DeviationFlags {
    #[command(flatten)]
    #[serde(skip)]
    pub map: MapFlag,
    /// Direction v as "a,b".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Option<Vec<f64>>,
    /// Expected mean displacement along v (default: from the definition).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Horizontal spread table instead of deviations.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub spread: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct SkewFlags {
    #[command(flatten)]
    #[serde(skip)]
    pub map: MapFlag,
    /// Vertical rotation number (default: from the definition).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Initial state as "t,x,y".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub state: Option<Vec<f64>>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Samples for the commutation and closed-form checks.
    #[arg(long)]
    pub check_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct FactorFlags {
    #[command(flatten)]
    #[serde(skip)]
    pub map: MapFlag,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Seed point "x,y" of the invariant region.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub seed_point: Option<Vec<f64>>,
    /// Seed ball radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Cells "n_t,n_x,n_y".
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    /// Window half-height (default 2·C_est + 2).
    #[arg(long)]
    pub window: Option<f64>,
    /// Factor grid "n_x,n_y".
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Levels s whose boundary clouds are written.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sladder: Option<Vec<f64>>,
    /// Bisection tolerance (default half a cell).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Defect threshold in cells; exceeding it exits with code 2.
    #[arg(long)]
    pub max_defect_cells: Option<f64>,
    /// Orbit length of the deviation scan that sets the window.
    #[arg(long)]
    pub deviation_nmax: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct GalleryFlags {
    /// Example id.
    #[serde(skip)]
    pub id: String,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Proximality threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct DoubleFlags {
    #[command(flatten)]
    #[serde(skip)]
    pub map: MapFlag,
    /// Rotation vector "a,b" (default: from the definition).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho: Option<Vec<f64>>,
    /// Seed point "x,y", used in both coordinate systems.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub seed_point: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_defect_cells: Option<f64>,
    #[arg(long)]
    pub deviation_nmax: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Rotnum(f) => commands::rotnum(f),
        Command::Deviations(f) => commands::deviations(f),
        Command::Skeworbit(f) => commands::skeworbit(f),
        Command::Factor(f) => commands::factor(f),
        Command::Gallery(f) => commands::gallery(f),
        Command::DoubleFactor(f) => commands::double_factor(f),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
