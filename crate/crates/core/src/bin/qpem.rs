use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qpem::harness::commands::{
    burn_in_report, depmatrix_from_kv, diagnose_from_kv, fit_from_kv, simulate_from_kv,
    DEPMATRIX_HEADER,
};
use qpem::harness::config::{constants_from_kv, ExperimentConfig, KvConfig};
use qpem::harness::io::{read_trajectory_csv, write_csv, write_key_values, write_trajectory_csv};
use qpem::harness::run_rate_experiment;
use qpem::{Error, Result};

#[derive(Parser)]
#[command(name = "qpem", version, about = "Prediction error estimation and rate diagnostics for ARMA models")]
struct Cli {
    /// Key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the one in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ARMA trajectory (CSV: t,Y,W).
    Simulate,
    /// Fit ARMA orders to a trajectory CSV.
    Fit {
        /// Trajectory CSV with a `Y` column.
        input: PathBuf,
    },
    /// Run the rate experiment (CSV).
    Rate,
    /// Offsets, information matrices, isometry rates and assumption constants.
    Diagnose,
    /// Burn-in times for a constant set.
    Burnin,
    /// Dependency-matrix norms of a finite Markov chain (CSV).
    Depmatrix,
}

fn load_config(path: Option<&Path>) -> Result<KvConfig> {
    match path {
        Some(p) => KvConfig::load(p),
        None => Err(Error::Config("--config is required".into())),
    }
}

fn output(cli: &Cli, kv: &KvConfig) -> Result<Box<dyn Write>> {
    let path = cli.out.clone().or_else(|| kv.raw("output").map(PathBuf::from));
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(&p).map_err(|e| {
            Error::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> Result<()> {
    let mut kv = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Simulate => {
            let data = simulate_from_kv(&kv, cli.seed)?;
            write_trajectory_csv(output(cli, &kv)?, &data.y, data.w.as_deref())
        }
        Command::Fit { input } => {
            let file = File::open(input)
                .map_err(|e| Error::Config(format!("cannot open {}: {e}", input.display())))?;
            let data = read_trajectory_csv(io::BufReader::new(file))?;
            write_key_values(output(cli, &kv)?, &fit_from_kv(&kv, &data)?)
        }
        Command::Rate => {
            if let Some(s) = cli.seed {
                kv.set("experiment.seed", s.to_string());
            }
            let cfg = ExperimentConfig::from_kv(&kv)?;
            let table = run_rate_experiment(&cfg)?;
            table.write_csv(output(cli, &kv)?)
        }
        Command::Diagnose => write_key_values(output(cli, &kv)?, &diagnose_from_kv(&kv, cli.seed)?),
        Command::Burnin => {
            kv.reject_unknown(&["constants.", "output"])?;
            write_key_values(output(cli, &kv)?, &burn_in_report(&constants_from_kv(&kv)?)?)
        }
        Command::Depmatrix => write_csv(output(cli, &kv)?, &DEPMATRIX_HEADER, &depmatrix_from_kv(&kv)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(4);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
