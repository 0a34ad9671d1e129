use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dilatrix_cli::commands;
use dilatrix_cli::files::write_json;
use dilatrix_cli::report::ReportFile;
use dilatrix_cli::{CliError, EXIT_FAIL, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "dilatrix", version, about = "Dilations and commutant lifts for commuting contractions")]
struct Cli {
    /// Residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Directory for the report and any artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the report as JSON instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test membership of a tuple in the class.
    Check { tuple: PathBuf },
    /// Build the BCL triple and the dilation map.
    Dilate {
        tuple: PathBuf,
        /// Hardy-space truncation degree (adaptive when omitted).
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Compare ‖p(T)‖ with the supremum of |p| over the variety.
    Vn {
        tuple: PathBuf,
        poly: PathBuf,
        /// Number of circle points sampled.
        #[arg(long, default_value_t = 257)]
        grid: usize,
    },
    /// Lift a commuting contraction X to a multiplier M_Θ.
    Lift {
        tuple: PathBuf,
        x: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Write a seeded class member (and its triple, if any).
    Gen {
        /// direct_sum, bcl_compression or scalar.
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tuple length.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Block sizes, or degree and seed count for bcl_compression.
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        dims: Vec<usize>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("DILATRIX_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("DILATRIX_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<ReportFile, CliError> {
    configure_threads()?;
    let out = cli.out.as_deref();
    let report = match &cli.command {
        Command::Check { tuple } => commands::check(tuple, cli.tol)?,
        Command::Dilate { tuple, degree } => commands::dilate(tuple, cli.tol, *degree, out)?,
        Command::Vn { tuple, poly, grid } => commands::vn(tuple, poly, cli.tol, *grid)?,
        Command::Lift { tuple, x, degree } => commands::lift(tuple, x, cli.tol, *degree, out)?,
        Command::Gen { kind, seed, n, dims } => {
            let out = out.ok_or_else(|| CliError::Usage("gen needs --out".into()))?;
            commands::generate(kind, *seed, *n, dims, out)?
        }
    };
    if let Some(path) = commands::report_path(out) {
        std::fs::create_dir_all(out.expect("report path implies out"))
            .map_err(|e| CliError::Io(e.to_string()))?;
        write_json(&path, &report)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    // Library panics are bugs; report them as failures rather than aborting
    // with a backtrace.
    std::panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    let outcome = std::panic::catch_unwind(|| run(&cli));
    match outcome {
        Ok(Ok(report)) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.summary());
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL as u8)
            }
        }
        Ok(Err(e)) => {
            eprintln!("dilatrix: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
        Err(_) => ExitCode::from(EXIT_FAIL as u8),
    }
}
