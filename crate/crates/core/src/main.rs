use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kslab::cli::{self, RunConfig};
use kslab::limits::LimitSystem;
use kslab::Error;

#[derive(Parser)]
#[command(name = "kslab", version, about = "Degenerate volume-filling Keller-Segel lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`
    #[arg(long)]
    output: Option<PathBuf>,
    /// Explicit c-update with dt = 1e-6 on 100 cells
    #[arg(long)]
    paper_fidelity: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.output {
            cfg.output_dir = out.clone();
        }
        if self.paper_fidelity {
            cfg.apply_reference_discretization();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full system and write snapshots and diagnostics
    Simulate(Common),
    /// Search an increasing steady state for m > 2
    Steady {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        chi: Option<f64>,
        #[arg(long)]
        n_cells: Option<usize>,
    },
    /// Distances to the tau = 0 limit
    SweepTau {
        #[command(flatten)]
        common: Common,
        /// Decreasing comma-separated values
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.1, 0.01])]
        values: Vec<f64>,
    },
    /// Distances to the eta = 0 limit
    SweepEta {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 0.5, 0.05])]
        values: Vec<f64>,
    },
    /// Fit exponential decay of the relative entropy
    Decay(Common),
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Simulate(common) => {
            cli::cmd_simulate(&common.load()?)?;
            Ok(cli::EXIT_OK)
        }
        Command::Steady {
            common,
            m,
            chi,
            n_cells,
        } => {
            let cfg = common.load()?;
            let m = m.unwrap_or(cfg.params.m);
            let chi = chi.unwrap_or(cfg.params.chi);
            // NoSolution is a regular outcome, reported by the command itself
            cli::cmd_steady(m, chi, n_cells.unwrap_or(cfg.n_cells), &cfg.output_dir)?;
            Ok(cli::EXIT_OK)
        }
        Command::SweepTau { common, values } => {
            let mut cfg = common.load()?;
            sweep_defaults(&mut cfg, &common);
            cli::cmd_sweep(LimitSystem::TauZero, &cfg, &values)?;
            Ok(cli::EXIT_OK)
        }
        Command::SweepEta { common, values } => {
            let mut cfg = common.load()?;
            sweep_defaults(&mut cfg, &common);
            cli::cmd_sweep(LimitSystem::EtaZero, &cfg, &values)?;
            Ok(cli::EXIT_OK)
        }
        Command::Decay(common) => Ok(cli::cmd_decay(&common.load()?)?.exit_code()),
    }
}

/// Without a config file, sweeps run the snapshot preset `t_end = 10`.
fn sweep_defaults(cfg: &mut RunConfig, common: &Common) {
    if common.config.is_none() {
        cfg.t_end = 10.0;
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
