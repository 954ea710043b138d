//! `fatune`: tune the firefly algorithm with MC, QMC and LHS sampling and
//! compare the tuners statistically.

mod commands;
mod config;
mod error;
mod output;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fatune::analysis::TestFamily;
use fatune::sampling::SamplerKind;
use fatune::tuning::ProblemSpec;

use crate::commands::Overrides;
use crate::config::Preset;
use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "fatune", version, about = "Firefly algorithm parameter-tuning workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ExperimentArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scale preset used for keys the configuration leaves unset.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated tuning methods (MC, QMC, LHS).
    #[arg(long, value_delimiter = ',', value_parser = commands::parse_method)]
    methods: Option<Vec<SamplerKind>>,
    /// Comma-separated problems, each `name` or `name:dimension`.
    #[arg(long, value_delimiter = ',', value_parser = commands::parse_problem)]
    problems: Option<Vec<ProblemSpec>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to one per core).
    #[arg(long)]
    threads: Option<usize>,
}

impl From<ExperimentArgs> for Overrides {
    fn from(a: ExperimentArgs) -> Self {
        Overrides {
            config: a.config,
            preset: a.preset,
            seed: a.seed,
            methods: a.methods,
            problems: a.problems,
            out: a.out,
            threads: a.threads,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment and write the report, tables and boxplots.
    Run(ExperimentArgs),
    /// Hypothesis tests on a saved report.
    Stats {
        /// Path to report.json.
        report: PathBuf,
        /// Comma-separated subset of t, f, friedman, anova.
        #[arg(long, value_delimiter = ',', value_parser = commands::parse_family, default_value = "t,f,friedman,anova")]
        tests: Vec<TestFamily>,
        /// Output directory (defaults to the report's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boxplot data and SVG of the best parameter values in a report.
    Boxplot {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// More settings on a single problem, followed by pairwise t-tests.
    Extended {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Problem as `name` or `name:dimension`.
        #[arg(long)]
        problem: String,
        /// Settings per method.
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    /// List the benchmark problems.
    Problems,
    /// Check the statistics code against bundled reference values.
    Selftest,
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Run(args) => commands::run(&args.into()),
        Command::Stats { report, tests, out } => commands::stats(&report, &tests, out),
        Command::Boxplot { report, out } => commands::boxplot(&report, out),
        Command::Extended { experiment, problem, n } => commands::extended(&experiment.into(), &problem, n),
        Command::Problems => commands::problems(),
        Command::Selftest => commands::selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
