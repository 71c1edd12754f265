use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use strandloss_cli::commands::{self, Outcome, Run};
use strandloss_cli::config;

/// Circulating-current losses in bundles of parallel strands.
#[derive(Parser)]
#[command(name = "strandloss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one bundle and write report.toml, waveforms.csv and sharing.csv.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Cross-check against a time-domain integration.
        #[arg(long)]
        oracle: bool,
    },
    /// Repeat the solve with the drive shape moved to each frequency.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated frequencies in Hz, overriding [sweep].
        #[arg(long, value_delimiter = ',')]
        frequencies: Option<Vec<f64>>,
    },
    /// Compare transposition schedules of a slot layout.
    TransposeCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Check the network; with --seed, also run the random property suite.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long)]
        grid_size: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding [output] dir.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    grid_size: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<(config::SimulationConfig, PathBuf)> {
        let mut cfg = config::load(&self.config)?;
        if let Some(g) = self.grid_size {
            set_grid(&mut cfg, g)?;
        }
        let out = self
            .out_dir
            .clone()
            .unwrap_or_else(|| cfg.output_dir.clone());
        Ok((cfg, out))
    }
}

fn set_grid(cfg: &mut config::SimulationConfig, g: usize) -> Result<()> {
    let min = strandloss::solver::MIN_SHARING_GRID;
    if g < min {
        bail!("--grid-size must be at least {min}");
    }
    cfg.analysis.grid_size = g;
    Ok(())
}

fn run(cli: Cli) -> Result<Run> {
    match cli.command {
        Command::Solve { common, oracle } => {
            let (mut cfg, out) = common.load()?;
            cfg.analysis.oracle |= oracle;
            commands::solve(&cfg, &out)
        }
        Command::Sweep {
            common,
            frequencies,
        } => {
            let (cfg, out) = common.load()?;
            let Some(freqs) = frequencies.or_else(|| cfg.frequencies.clone()) else {
                bail!(
                    "{}: no frequencies; add a [sweep] section or pass --frequencies",
                    cfg.path.display()
                );
            };
            commands::sweep(&cfg, &freqs, &out)
        }
        Command::TransposeCompare { common } => {
            let (cfg, out) = common.load()?;
            commands::transpose_compare(&cfg, &out)
        }
        Command::Validate {
            config,
            seed,
            cases,
            grid_size,
        } => {
            if config.is_none() && seed.is_none() {
                bail!("validate needs --config, --seed or both");
            }
            let mut summary = String::new();
            let mut outcome = Outcome::Ok;
            let mut grid = 1024;
            if let Some(path) = config {
                let mut cfg = config::load(Path::new(&path))?;
                if let Some(g) = grid_size {
                    set_grid(&mut cfg, g)?;
                }
                grid = cfg.analysis.grid_size;
                summary.push_str(&commands::validate(&cfg)?.summary);
            } else if let Some(g) = grid_size {
                grid = g;
            }
            if let Some(seed) = seed {
                let r = commands::self_test(seed, cases, grid)?;
                outcome = r.outcome;
                summary.push_str(&r.summary);
            }
            Ok(Run {
                outcome,
                summary,
                files: Vec::new(),
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(r) => {
            print!("{}", r.summary);
            for f in &r.files {
                println!("wrote            {}", f.display());
            }
            match r.outcome {
                Outcome::Ok => ExitCode::SUCCESS,
                Outcome::PropertyViolated => {
                    eprintln!("error: even-sharing loss bound violated");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
