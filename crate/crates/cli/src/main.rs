//! `acmkin`: analyse linkage manifests and catalog entries.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use acmkin::manifest::{Manifest, ManifestError};

use report::{Failure, Out};

#[derive(Parser)]
#[command(name = "acmkin", version, about = "Configuration spaces of linkages given as constraint diagrams")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the diagram axioms and constraint decomposition.
    Validate { manifest: PathBuf },
    /// Constraint skeleton and its acyclicity.
    Skeleton { manifest: PathBuf },
    /// Configuration space of the diagram.
    Limit {
        manifest: PathBuf,
        /// Write the reduction chain transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Replay this transcript and compare apices.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Dimension count, internal degrees of freedom and overconstraint.
    Mobility { manifest: PathBuf },
    /// Weld two actors into one.
    Weld { manifest: PathBuf, i: String, j: String },
    /// Slice of the configuration space cut out by a daemon at time `t`.
    DaemonSlice {
        manifest: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        daemon: Option<String>,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Realizability of motion sets and the normal form of a two-actor pair.
    PairCheck { manifest: PathBuf },
    /// Sample points of the configuration space as CSV.
    Sample {
        manifest: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the catalog, or analyse one entry.
    Catalog {
        name: Option<String>,
        /// Bar lengths (for `cylindrical`, the axis).
        #[arg(long = "L", num_args = 1.., allow_negative_numbers = true)]
        lengths: Vec<f64>,
        #[arg(long)]
        limit: bool,
        #[arg(long)]
        mobility: bool,
        /// Print the entry as a manifest instead of analysing it.
        #[arg(long)]
        export: bool,
    },
}

fn env_seed() -> Result<u64, Failure> {
    match std::env::var("ACMKIN_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| Failure::parse(format!("ACMKIN_SEED is not an unsigned integer: {:?}", s))),
        Err(_) => Ok(0),
    }
}

fn load(path: &Path) -> Result<Manifest, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {}", path.display(), e)))?;
    Manifest::from_json(&text).map_err(Failure::from)
}

fn run(cli: Cli) -> Result<Out, Failure> {
    let seed = env_seed()?;
    match cli.command {
        Command::Validate { manifest } => report::validate(&load(&manifest)?, seed),
        Command::Skeleton { manifest } => report::skeleton(&load(&manifest)?, seed),
        Command::Limit { manifest, transcript, replay } => report::limit(&load(&manifest)?, seed, transcript.as_deref(), replay.as_deref()),
        Command::Mobility { manifest } => report::mobility(&load(&manifest)?, seed),
        Command::Weld { manifest, i, j } => report::weld(&load(&manifest)?, seed, &i, &j),
        Command::DaemonSlice { manifest, t, daemon, n } => report::daemon_slice(&load(&manifest)?, seed, t, daemon.as_deref(), n),
        Command::PairCheck { manifest } => report::pair_check(&load(&manifest)?, seed),
        Command::Sample { manifest, n, seed: s, out } => report::sample(&load(&manifest)?, s.unwrap_or(seed), n, out.as_deref()),
        Command::Catalog { name: None, .. } => Ok(report::listing(seed)),
        Command::Catalog { name: Some(name), lengths, limit, mobility, export } => {
            let b = acmkin::linkcat::build(&name, &lengths).map_err(|e| Failure::validation(e.to_string()))?;
            let m = Manifest::from_build(&b);
            if export {
                return Ok(Out::Raw(m.to_json() + "\n"));
            }
            if mobility {
                report::mobility(&m, seed)
            } else if limit {
                report::limit(&m, seed, None, None)
            } else {
                report::validate(&m, seed)
            }
        }
    }
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Failure {
        match e {
            ManifestError::Json(_) | ManifestError::Expr { .. } | ManifestError::Invalid(_) => Failure::parse(e.to_string()),
            _ => Failure::validation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            print!("{}", out.render(json));
            ExitCode::from(out.code())
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
