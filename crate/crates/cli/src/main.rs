//! `loadcast` command line: cleaning, variable selection, model comparison,
//! forecasting and synthetic data.
//!
//! Exit codes: 0 success, 1 model or selection failure, 2 bad input.

mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loadcast::hybrid::ModelSpec;

use config::{parse_candidates, RunConfig, SplitChoice};
use error::{usage, CliResult};

#[derive(Parser)]
#[command(name = "loadcast", version, about = "Long-horizon hourly electric-demand forecasting")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed recorded with results and used by `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// error, warn, info, debug or trace.
    #[arg(long, global = true)]
    log_level: Option<String>,

    /// Also write SVG line charts next to the plot CSVs.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate to hourly, fill zero/NA gaps and write the cleaned series.
    Clean {
        /// Demand CSV; defaults to the configured one.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Add a natural-log column.
        #[arg(long)]
        log: bool,
    },
    /// List the variables the cross-validated LASSO retains.
    Select {
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Fit, forecast and rank every candidate model.
    Compare {
        /// Comma-separated candidates, e.g. `MLR,GAM1+SARIMA`.
        #[arg(long)]
        candidates: Option<String>,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Forecast over a future-exogenous file.
    Forecast {
        /// Saved model bundle (from `compare`).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Fit this candidate on all history instead of loading a model.
        #[arg(long)]
        candidate: Option<String>,
        /// Future weather/occupancy CSV (timestamp, temp_c, rh_pct?, fte, kw?).
        #[arg(long)]
        future: Option<PathBuf>,
    },
    /// Write a synthetic dataset with known structure.
    Simulate {
        /// Scenario file; the built-in scenario is used when absent.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    train_years: Option<u32>,
    #[arg(long)]
    test_years: Option<u32>,
    #[arg(long, conflicts_with_all = ["train_years", "test_years"])]
    train_fraction: Option<f64>,
}

impl SplitArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(f) = self.train_fraction {
            cfg.split = SplitChoice::Fraction(f);
        } else if self.train_years.is_some() || self.test_years.is_some() {
            let (train, test) = match cfg.split {
                SplitChoice::Years { train, test } => (train, test),
                SplitChoice::Fraction(_) => (1, None),
            };
            cfg.split = SplitChoice::Years {
                train: self.train_years.unwrap_or(train),
                test: self.test_years.or(test),
            };
        }
    }
}

fn load_config(global: &Global) -> CliResult<RunConfig> {
    let mut cfg = match &global.config {
        Some(p) if !p.exists() => return Err(usage(format!("config file {} does not exist", p.display()))),
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(d) = &global.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(l) = &global.log_level {
        cfg.log_level = l.clone();
    }
    cfg.svg |= global.svg;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = load_config(&cli.global)?;
    env_logger::Builder::new()
        .parse_filters(&cfg.log_level)
        .format_timestamp(None)
        .try_init()
        .ok();
    match cli.command {
        Command::Clean { input, log } => commands::clean(&cfg, input, log),
        Command::Select { split } => {
            split.apply(&mut cfg);
            commands::select(&cfg)
        }
        Command::Compare { candidates, split } => {
            if let Some(c) = candidates {
                cfg.candidates = parse_candidates(&c)?;
            }
            split.apply(&mut cfg);
            commands::compare(&cfg)
        }
        Command::Forecast {
            model,
            candidate,
            future,
        } => {
            if future.is_some() {
                cfg.future = future;
            }
            let candidate = candidate
                .map(|c| c.parse::<ModelSpec>().map_err(|e| usage(format!("bad candidate `{c}`: {e}"))))
                .transpose()?;
            commands::forecast(&cfg, model, candidate)
        }
        Command::Simulate { scenario } => commands::simulate(&cfg, scenario, cli.global.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
