// Copyright 2026 The casimir-spectroscopy contributors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.

//! `casimir`: simulate Casimir forces, generate synthetic datasets, train
//! the inverse model, and reconstruct permittivity spectra.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "casimir",
    version,
    about = "Broadband permittivity from Casimir force curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `paths.out`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// More progress output on stderr (repeatable).
    #[arg(long, short, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Lifshitz force curve between two materials.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Synthetic dataset directory.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Overrides `dataset.n_samples`.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Grid search and final forest from a dataset directory.
    Train {
        #[command(flatten)]
        common: Common,
        /// Overrides `paths.dataset`.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Predict a spectrum from a force curve file.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Overrides `paths.model`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Overrides `paths.curve`.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Reconstruction error against the maximum separation.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruction from a measured force-gradient file.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Overrides `paths.measured`.
        #[arg(long)]
        measured: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.paths.out = Some(out.clone());
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let (common, command) = match &cli.command {
        Command::Simulate { common }
        | Command::Generate { common, .. }
        | Command::Train { common, .. }
        | Command::Reconstruct { common, .. }
        | Command::Sweep { common }
        | Command::Experiment { common, .. } => (common, &cli.command),
    };
    let level = match common.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::Config("--workers: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    let mut config = load(common)?;
    match command {
        Command::Simulate { .. } => commands::simulate(&config),
        Command::Generate { samples, .. } => {
            if let Some(n) = samples {
                config.dataset.n_samples = *n;
            }
            commands::generate(&config)
        }
        Command::Train { dataset, .. } => {
            if let Some(d) = dataset {
                config.paths.dataset = Some(d.clone());
            }
            commands::train(&config)
        }
        Command::Reconstruct { model, curve, .. } => {
            if let Some(m) = model {
                config.paths.model = Some(m.clone());
            }
            if let Some(c) = curve {
                config.paths.curve = Some(c.clone());
            }
            commands::reconstruct(&config)
        }
        Command::Sweep { .. } => commands::sweep(&config),
        Command::Experiment { measured, .. } => {
            if let Some(m) = measured {
                config.paths.measured = Some(m.clone());
            }
            commands::experiment(&config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
