mod commands;
mod config;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;

/// Exit 1 for failed checks, exit 2 for usage and parse errors.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => write!(f, "failure: {m}"),
        }
    }
}

/// Library errors from a running computation: argument-like ones are usage
/// errors, the rest are failures.
pub fn classify(e: nonlocal::Error) -> CliError {
    use nonlocal::Error::*;
    match e {
        Config(_) | Argument(_) | Unsupported(_) => CliError::Usage(e.to_string()),
        _ => CliError::Failure(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Norms,
    Operator,
    Semigroup,
    Regularity,
}

#[derive(Parser, Debug)]
#[command(
    name = "nonlocal",
    version,
    about = "Solve and verify nonlocal parabolic equations on the torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Caps the number of worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the standing hypotheses of the configured problem.
    Validate(Common),
    /// Run an ensemble verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Solve the configured Cauchy problem.
    Solve(Common),
    /// Sample Lévy paths and check the characteristic function.
    SampleLevy(Common),
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure the thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", common.out.display())))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(c) => commands::validate(&load(&c)?, &c.out),
        Command::Verify { common, suite } => suites::verify(&load(&common)?, suite, &common.out),
        Command::Solve(c) => commands::solve(&load(&c)?, &c.out),
        Command::SampleLevy(c) => commands::sample_levy(&load(&c)?, &c.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
