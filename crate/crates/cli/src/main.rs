use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scadec::harness::{self, AttackConfig, SweepConfig};
use scadec::{Error, LlrMode};

/// Simulate leakage traces of an SPN cipher and recover the expanded key.
#[derive(Parser)]
#[command(name = "scadec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a trace set and write it with its truth file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Attack a stored trace set and print the result as JSON.
    Attack {
        /// Search parameters, LLR mode and noise estimate are taken from
        /// this file.
        #[arg(long)]
        config: PathBuf,
        /// Trace directory written by `simulate`.
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mode: Option<LlrMode>,
        #[arg(long)]
        timing: bool,
    },
    /// Run a parameter grid and write one CSV row per run.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-cell success rates.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Overrides the base seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<LlrMode>,
        /// Fill the runtime column (makes the output machine dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Histogram correct and wrong-prefix LLRs.
    LlrHist {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<LlrMode>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate { config, out, seed } => {
            let mut cfg = AttackConfig::load(&config)?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            let outcome = harness::cmd_simulate(&cfg, &out)?;
            eprintln!(
                "wrote {} traces ({} features) to {}",
                outcome.n_traces,
                outcome.n_features,
                outcome.dir.display()
            );
        }
        Command::Attack {
            config,
            traces,
            out,
            mode,
            timing,
        } => {
            let mut cfg = AttackConfig::load(&config)?;
            cfg.mode = mode.unwrap_or(cfg.mode);
            let outcome = harness::cmd_attack(&traces, &cfg.attack_options(), timing)?;
            let mut text = serde_json::to_string_pretty(&outcome).expect("results serialize");
            text.push('\n');
            emit(out.as_deref(), &text)?;
            if let Some(s) = outcome.record.success {
                eprintln!("success: {s}");
            }
        }
        Command::Sweep {
            config,
            out,
            summary,
            seed,
            mode,
            timing,
        } => {
            let mut cfg = SweepConfig::load(&config)?;
            cfg.base_seed = seed.unwrap_or(cfg.base_seed);
            cfg.base.mode = mode.unwrap_or(cfg.base.mode);
            let output = harness::cmd_sweep(&cfg, timing)?;
            emit(out.as_deref(), &output.to_csv()?)?;
            if let Some(path) = summary {
                emit(Some(&path), &output.summary_csv()?)?;
            }
            let failed = output.rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("{failed} of {} runs failed; see the error column", output.rows.len());
            }
        }
        Command::LlrHist {
            config,
            out,
            bins,
            reps,
            seed,
            mode,
        } => {
            let mut cfg = AttackConfig::load(&config)?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.mode = mode.unwrap_or(cfg.mode);
            let (_, hist) = harness::cmd_llr_hist(&cfg, bins, reps)?;
            emit(out.as_deref(), &hist.to_csv(&harness::llr_hist_fingerprint(&cfg, bins, reps))?)?;
        }
    }
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
