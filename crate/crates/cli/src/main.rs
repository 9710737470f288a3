//! `llrq`: train the LLR autoencoder, fit baseline quantizers, run BLER
//! experiments and export tables and diagnostics.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use error::CliError;
use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "llrq", version, about = "LLR compression experiments")]
struct Cli {
    /// Configuration file, or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte-Carlo loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, created if needed.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Train the autoencoder; writes model.txt and loss.csv.
    Train,
    /// Single-transmission BLER curves.
    EvalSingle,
    /// Two-transmission HARQ BLER curves.
    EvalHarq,
    /// Fit a max-MI LLR codebook or a channel-gain quantizer.
    FitQuantizer,
    /// Tabulate decoder outputs for every quantized latent cell.
    ExportLut,
    /// Latent histograms of a trained model.
    Hist,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::EvalSingle => "eval-single",
            Self::EvalHarq => "eval-harq",
            Self::FitQuantizer => "fit-quantizer",
            Self::ExportLut => "export-lut",
            Self::Hist => "hist",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = Config::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", cli.out_dir.display())))?;
    let mut m = Manifest::new(cli.command.name(), &cfg, cli.seed);
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Train => commands::cmd_train(&cfg, out, &mut m)?,
        Command::EvalSingle => commands::cmd_eval(&cfg, out, &mut m, false)?,
        Command::EvalHarq => commands::cmd_eval(&cfg, out, &mut m, true)?,
        Command::FitQuantizer => commands::cmd_fit(&cfg, out, &mut m)?,
        Command::ExportLut => commands::cmd_export_lut(&cfg, out, &mut m)?,
        Command::Hist => commands::cmd_hist(&cfg, out, &mut m)?,
    }
    m.write(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
