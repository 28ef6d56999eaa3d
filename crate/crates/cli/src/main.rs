use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unital_cli::{cmd_construct, cmd_search, cmd_verify, CliError, ConstructOutcome, ConstructRequest, RunConfig};
use unital_core::search::DEFAULT_STARTER_LIMIT;
use unital_core::FieldSpec;

#[derive(Parser)]
#[command(name = "unital", version, about = "Spreads of the Hermitian unital in PG(2,q^2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Q4,
    Q5,
    Q7,
}

#[derive(Args)]
struct FieldArgs {
    /// Built-in field for q = 4, 5 or 7
    #[arg(long, value_enum, conflicts_with_all = ["p", "e", "poly"])]
    preset: Option<Preset>,
    /// Characteristic of a custom field
    #[arg(long, requires_all = ["e", "poly"])]
    p: Option<u32>,
    /// Degree of GF(q) over GF(p)
    #[arg(long, requires_all = ["p", "poly"])]
    e: Option<u32>,
    /// Primitive polynomial of degree 2e, coefficients from the constant term up
    #[arg(long, value_delimiter = ',', requires_all = ["p", "e"])]
    poly: Option<Vec<u32>>,
}

impl FieldArgs {
    fn spec(&self) -> Result<FieldSpec, CliError> {
        match (self.preset, self.p, self.e, &self.poly) {
            (Some(Preset::Q4), ..) => Ok(FieldSpec::q4()),
            (Some(Preset::Q5), ..) => Ok(FieldSpec::q5()),
            (Some(Preset::Q7), ..) => Ok(FieldSpec::q7()),
            (None, Some(p), Some(e), Some(poly)) => Ok(FieldSpec::new(p, e, poly.clone())),
            _ => Err(CliError::Config("give --preset or all of --p, --e and --poly".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all spreads up to equivalence and classify them
    Search {
        #[command(flatten)]
        field: FieldArgs,
        /// Stop refining starters once their number would exceed this
        #[arg(long, default_value_t = DEFAULT_STARTER_LIMIT)]
        starters: usize,
        /// Worker threads for the backtrack (default: all cores)
        #[arg(long)]
        workers: Option<usize>,
        /// Checkpoint file recording finished starters
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from the checkpoint instead of starting over
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Process at most this many pending starters and stop
        #[arg(long)]
        stop_after: Option<usize>,
        /// Record file for the class representatives
        #[arg(long)]
        out: Option<PathBuf>,
        /// Aligned summary table
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Summary table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build one spread from a known construction
    Construct {
        #[command(flatten)]
        field: FieldArgs,
        #[command(subcommand)]
        kind: ConstructKind,
        /// Record file to write
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Check every record of a spread file
    Verify { file: PathBuf },
}

#[derive(Subcommand)]
enum ConstructKind {
    /// Secants through an exterior point plus its polar
    Regular {
        /// Centre as a point token such as "(0,*,*)"
        #[arg(long)]
        center: Option<String>,
    },
    /// One orbit of a cyclic group of order q^2-q+1
    Cyclic,
    /// Triangle sides plus one ruling family per parameter
    Andre {
        /// Choice such as "3=V,1=H,2=D"; parameters are integers or w^k
        #[arg(long)]
        choice: String,
    },
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Search { field, starters, workers, checkpoint, resume, stop_after, out, summary, csv } => {
            let mut config = RunConfig::new(field.spec()?);
            config.starter_limit = starters;
            config.workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            config.checkpoint = checkpoint;
            config.resume = resume;
            config.stop_after = stop_after;
            config.records_out = out;
            config.summary_out = summary;
            config.csv_out = csv;
            let report = cmd_search(&config)?;
            eprintln!(
                "{} starters ({} done), {} spreads found, {} classes",
                report.starters,
                report.starters_done,
                report.spreads_found,
                report.records.len()
            );
            print!("{}", report.summary_text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Construct { field, kind, out } => {
            let mut config = RunConfig::new(field.spec()?);
            config.records_out = out;
            let request = match kind {
                ConstructKind::Regular { center } => ConstructRequest::Regular { center },
                ConstructKind::Cyclic => ConstructRequest::Cyclic,
                ConstructKind::Andre { choice } => ConstructRequest::Andre { choice },
            };
            match cmd_construct(&config, &request)? {
                ConstructOutcome::Built { text, .. } => print!("{text}"),
                ConstructOutcome::Nonexistent { reason } => println!("nonexistent: {reason}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { file } => {
            let report = cmd_verify(&file)?;
            match report.failure {
                None => {
                    println!("pass: {} records", report.records);
                    Ok(ExitCode::SUCCESS)
                }
                Some(f) => {
                    println!("fail: record {}, line {}: {}", f.record, f.line, f.message);
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
