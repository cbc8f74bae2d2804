//! Command-line front end: validate scenario configs, run experiments,
//! run the bundled two-grid comparison scenario, and cross-check the
//! rank-similarity implementation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gridtrust::config::{self, ConfigError};
use gridtrust::oracle;
use gridtrust::report::{self, ReportError};
use gridtrust::sim;

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;

#[derive(Parser)]
#[command(
    name = "gridtrust",
    version,
    about = "Reputation-based trust simulator for grid resource allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and report every constraint violation.
    Validate {
        /// Scenario TOML file.
        config: PathBuf,
    },
    /// Run a scenario file and write comparison reports.
    Run {
        /// Scenario TOML file.
        config: PathBuf,
        /// Master seed (shorthand for --override master_seed=N).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of runs (shorthand for --override runs=N).
        #[arg(long)]
        runs: Option<u32>,
        /// Output directory for the CSV reports.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Parameter overrides, e.g. --override eta=2.5.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the bundled two-grid comparison scenario (15 entities, two rating
    /// inverters, 10 runs) and print the comparison table.
    Table1 {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "table1_out")]
        out: PathBuf,
    },
    /// Cross-check the rank-similarity implementation against the
    /// brute-force pair-counting route.
    OracleKendall {
        /// Largest vector length to test.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Random cases per sampled length, and tie cases.
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

enum CliError {
    Validation(String),
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Io { .. } => CliError::Io(err.to_string()),
            ConfigError::Invalid(violations) => CliError::Validation(violations.join("\n  ")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(err: ReportError) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<sim::SimError> for CliError {
    fn from(err: sim::SimError) -> Self {
        CliError::Validation(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Validation(msg)) => {
            eprintln!("error: validation: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: io: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Validate { config } => {
            config::load(&config)?;
            println!("ok: configuration is valid");
            Ok(EXIT_OK)
        }
        Command::Run {
            config,
            seed,
            runs,
            out,
            overrides,
        } => {
            let mut pairs = Vec::new();
            for arg in &overrides {
                pairs.push(config::parse_override_arg(arg)?);
            }
            if let Some(seed) = seed {
                pairs.push(("master_seed".to_string(), seed.to_string()));
            }
            if let Some(runs) = runs {
                pairs.push(("runs".to_string(), runs.to_string()));
            }
            let cfg = config::load_with_overrides(&config, &pairs)?;
            let output = sim::run_all(&cfg)?;
            report::write_experiment(&out, &output)?;
            print!("{}", report::render_table(&output));
            eprintln!("reports written to {}", out.display());
            Ok(EXIT_OK)
        }
        Command::Table1 { seed, out } => {
            let cfg = sim::table1_config(seed, 10);
            let output = sim::run_all(&cfg)?;
            report::write_experiment(&out, &output)?;
            print!("{}", report::render_table(&output));
            eprintln!("reports written to {}", out.display());
            Ok(EXIT_OK)
        }
        Command::OracleKendall { n, cases } => {
            let exhaustive_max = n.min(5);
            let sampled: Vec<usize> = ((exhaustive_max + 1)..=n).collect();
            let check =
                oracle::run_similarity_check(exhaustive_max, &sampled, cases, cases, ORACLE_SEED);
            println!(
                "checked {} vector pairs (exhaustive to n={exhaustive_max}, sampled to n={n}): {} mismatch(es)",
                check.pairs_checked, check.mismatches
            );
            if check.passed() {
                println!("PASS");
                Ok(EXIT_OK)
            } else {
                println!("FAIL");
                Ok(EXIT_VALIDATION)
            }
        }
    }
}

const ORACLE_SEED: u64 = 0x6f72_6163;
