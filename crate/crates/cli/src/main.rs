use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use memlab_cli::commands;
use memlab_cli::config::ExperimentConfig;
use memlab_cli::suites::{run_suite, SUITE_NAMES};
use memlab_cli::sweep::{run_sweep, write_csv, RunOptions};
use memlab_cli::Result;
use memlab_core::tensor::EntryBudget;

#[derive(Parser)]
#[command(name = "memlab", version, about = "Planted-signal experiments under memory and communication limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalFlags,
}

#[derive(Args)]
struct GlobalFlags {
    /// Master seed mixed into every run seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent (a file is required for `sample`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and suites.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest number of f64 entries a single sample batch may hold.
    #[arg(long, global = true)]
    budget_entries: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (grid point, seed) pair of a config and write CSV rows.
    Sweep { config: PathBuf },
    /// Run a named verification suite and print its report.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITE_NAMES))]
        suite: String,
    },
    /// Draw the first run's sample batch and write it in binary form.
    Sample { config: PathBuf },
    /// Run the first run's quantized algorithm directly and as a blackboard protocol.
    Reduce {
        config: PathBuf,
        /// Also write the transcript, one `round writer bit` line per round.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    let opts = RunOptions {
        master_seed: g.seed,
        threads: g.threads,
        budget: g.budget_entries.map(EntryBudget).unwrap_or_default(),
    };
    match &cli.command {
        Command::Sweep { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let rows = run_sweep(&cfg, &opts)?;
            let path = g.out.as_deref().or(cfg.output.path.as_deref());
            let mut out = output(path)?;
            write_csv(&rows, &mut out)?;
            out.flush()?;
            Ok(true)
        }
        Command::Verify { suite } => {
            let report = match g.threads {
                Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(|| run_suite(suite, g.seed)),
                None => run_suite(suite, g.seed),
            }?;
            let mut out = output(g.out.as_deref())?;
            write!(out, "{report}")?;
            out.flush()?;
            if !report.all_passed() {
                for r in report.failures() {
                    eprintln!("FAILED {}: measured {:e}, target {:e}", r.id, r.measured, r.target);
                }
            }
            Ok(report.all_passed())
        }
        Command::Sample { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let batch = commands::sample_batch(&cfg, &opts)?;
            let Some(path) = g.out.as_deref().or(cfg.output.path.as_deref()) else {
                return Err(memlab_cli::CliError::Config("sample needs --out or output.path".into()));
            };
            let mut file = BufWriter::new(File::create(path)?);
            commands::write_sample(&batch, &mut file)?;
            file.flush()?;
            eprintln!("wrote {} records of length {} to {}", batch.len(), batch.record_len(), path.display());
            Ok(true)
        }
        Command::Reduce { config, transcript } => {
            let cfg = ExperimentConfig::load(config)?;
            let summary = commands::reduce(&cfg, &opts)?;
            let mut out = output(g.out.as_deref())?;
            writeln!(out, "{summary}")?;
            out.flush()?;
            if let Some(path) = transcript {
                std::fs::write(path, &summary.transcript)?;
            }
            Ok(summary.identical)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
