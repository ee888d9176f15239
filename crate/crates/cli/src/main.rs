use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gesture_cli::commands::{self, Flags, Outcome, SimilarityArgs, DEFAULT_ETA};
use gesture_cli::matrix::{self, Format};
use gesture_cli::{corpus, CliError};
use gesture_core::similarity::DEFAULT_R0;

#[derive(Parser)]
#[command(name = "gestures", version, about = "Check, compare and perform musical gestures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CheckArgs {
    /// Residual tolerance.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Degree scale in `exp(-(r1 + r2)/r0)`.
    #[arg(long, default_value_t = DEFAULT_R0)]
    r0: f64,
    /// Points of the comparison grid.
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Label seeding the probe curves (default: the space name).
    #[arg(long)]
    seed_label: Option<String>,
}

impl CheckArgs {
    fn flags(&self) -> Flags {
        Flags {
            eta: self.eta,
            r0: self.r0,
            grid: self.grid,
            seed_label: self.seed_label.clone(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a gesture file.
    Validate { path: PathBuf },
    /// Test two gestures for similarity under a morphism and generators.
    Similarity {
        g: PathBuf,
        h: PathBuf,
        /// Morphism file; may be omitted when both gestures share a space.
        #[arg(long)]
        morphism: Option<PathBuf>,
        /// Generator labels, `f` or `f,g`.
        #[arg(long)]
        generators: Option<String>,
        /// Operator registry.
        #[arg(long)]
        operators: Option<PathBuf>,
        /// Base gestures of the generators, `a.json,b.json`.
        #[arg(long)]
        bases: Option<String>,
        /// Coordinate driving synthesized loudness.
        #[arg(long)]
        amplitude: Option<String>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Pairwise similarity degrees over a corpus directory.
    Matrix {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Also write matrix.csv and matrix.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0: all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Emit the straight-line family between two gestures.
    Homotopy {
        g: PathBuf,
        h: PathBuf,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify an orchestra scenario.
    Orchestra {
        scenario: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Compare two gesture changes spectrally and by similarity.
    Conjecture {
        path: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Smooth a symbolic gesture into a physical one.
    Perform {
        path: PathBuf,
        #[arg(long)]
        speed_bound: f64,
        #[arg(long, default_value_t = 8)]
        passes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the example corpus.
    Corpus { out: PathBuf },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Validate { path } => commands::validate(&path),
        Command::Similarity {
            g,
            h,
            morphism,
            generators,
            operators,
            bases,
            amplitude,
            check,
        } => commands::similarity(
            &SimilarityArgs {
                g,
                h,
                morphism,
                generators,
                operators,
                bases,
                amplitude,
            },
            &check.flags(),
        ),
        Command::Matrix {
            dir,
            format,
            out,
            threads,
            check,
        } => {
            let format = match format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            };
            matrix::matrix(&dir, &check.flags(), threads, format, out.as_deref())
        }
        Command::Homotopy { g, h, steps, out } => commands::homotopy(&g, &h, steps, &out),
        Command::Orchestra { scenario, check } => commands::orchestra(&scenario, &check.flags()),
        Command::Conjecture { path, check } => commands::conjecture(&path, &check.flags()),
        Command::Perform {
            path,
            speed_bound,
            passes,
            out,
        } => commands::perform(&path, speed_bound, passes, out.as_deref()),
        Command::Corpus { out } => {
            let files = corpus::write_corpus(&out)?;
            let listing: String = files.iter().map(|f| format!("{}\n", f.display())).collect();
            Ok(Outcome { code: 0, stdout: listing })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
