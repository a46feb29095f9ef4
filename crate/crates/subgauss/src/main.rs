use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use subgauss::cli::{dispatch, CliError, OutputFormat, RunConfig};
use subgauss::constants::Constants;

/// Tail bounds and near-isometry checks for sub-Gaussian random matrices.
///
/// Exit codes: 0 success, 1 usage error, 2 a verified bound was violated.
#[derive(Parser)]
#[command(name = "subgauss", version, disable_help_subcommand = true)]
struct Cli {
    /// One of: psi, width, tail, hw, concentrate, scaling, tightness, jl,
    /// sketch, nsp, binom, appendixc
    command: String,
    /// key=value parameters of the subcommand (e.g. `dist=rademacher alpha=2`)
    params: Vec<String>,
    /// Master seed; every run is a pure function of (params, seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo trial (or seed) count for the command's main loop
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; reported values never depend on this
    #[arg(long)]
    threads: Option<usize>,
    /// Write the report to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// `name=value # provenance` file overriding the frozen constants
    #[arg(long)]
    constants: Option<PathBuf>,
    /// key=value config file; explicit params win over file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Omit the timestamp field so reruns are byte-identical
    #[arg(long)]
    no_timestamp: bool,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };

    let mut cfg = RunConfig::new(&cli.command);
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.trials = cli.trials;
    cfg.out = cli.out;
    cfg.format = cli.format;
    cfg.no_timestamp = cli.no_timestamp;
    for pair in &cli.params {
        match pair.split_once('=') {
            Some((k, v)) => {
                cfg.params.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => {
                eprintln!("error: parameter {pair:?} is not key=value");
                return 1;
            }
        }
    }
    if let Some(path) = &cli.config {
        if let Err(e) = cfg.load_config_file(path) {
            eprintln!("error: {e}");
            return 1;
        }
    }
    if let Some(path) = &cli.constants {
        match Constants::load(path) {
            Ok(c) => cfg.constants = c,
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        }
    }

    let outcome = match cli.threads {
        Some(n) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: cannot build thread pool: {e}");
                    return 1;
                }
            };
            pool.install(|| dispatch(&cfg))
        }
        None => dispatch(&cfg),
    };

    match outcome {
        Ok(result) => {
            let rendered = match cfg.format {
                OutputFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&result.report)
                        .expect("reports are valid json");
                    s.push('\n');
                    s
                }
                OutputFormat::Csv => result.csv.clone(),
            };
            if let Some(path) = &cfg.out {
                if let Err(e) = std::fs::write(path, &rendered) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 1;
                }
            } else {
                print!("{rendered}");
            }
            if result.passed {
                0
            } else {
                2
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
