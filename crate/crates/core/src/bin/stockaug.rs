use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use stockaug::config::{load_config, preset};
use stockaug::experiment::{self, DataSource, ExperimentPlan};
use stockaug::pipeline::{synth_panel, write_returns_csv, SynthParams};
use stockaug::plot::plot_bundle;
use stockaug::{Error, RngStream};

/// Time-series augmentation experiments for daily stock classification.
#[derive(Parser)]
#[command(name = "stockaug", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: full or desk.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of concurrent (split, spec) workers.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Root that relative output paths are resolved against.
    #[arg(long, global = true, env = "STOCKAUG_OUTPUT_ROOT")]
    output_root: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic return panel as CSV.
    GenerateData {
        /// Destination file (default: <output>/data.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of price days; the file holds one fewer return per stock.
        #[arg(long)]
        n_days: Option<usize>,
        #[arg(long)]
        n_stocks: Option<usize>,
        #[arg(long)]
        signal_strength: Option<f64>,
    },
    /// Build every split's windows and write per-split statistics.
    Prepare,
    /// Run the experiment; completed pairs are reused.
    Run,
    /// Rebuild the summary and tables from completed runs.
    Report,
    /// Draw cumulative-profit curves as SVG.
    Plot {
        /// Comma-separated spec names (default: every spec in the plan).
        #[arg(long, value_delimiter = ',')]
        specs: Option<Vec<String>>,
        /// Destination file (default: <output>/cumprofit.svg).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failed {
    Usage(String),
    Run(String),
}

impl From<Error> for Failed {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownSpec(_) | Error::InvalidParameter(_) => Failed::Usage(e.to_string()),
            other => Failed::Run(other.to_string()),
        }
    }
}

fn plan(common: &Common) -> Result<ExperimentPlan, Failed> {
    let mut plan = match (&common.config, &common.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => ExperimentPlan::default(),
    };
    if let Some(seed) = common.seed {
        plan.seed = seed;
    }
    if let Some(w) = common.workers {
        plan.workers = w;
    }
    if let Some(root) = &common.output_root {
        if plan.output.is_relative() {
            plan.output = root.join(&plan.output);
        }
    }
    Ok(plan)
}

fn dispatch(cli: Cli) -> Result<(), Failed> {
    let plan = plan(&cli.common)?;
    match cli.command {
        Command::GenerateData {
            out,
            n_days,
            n_stocks,
            signal_strength,
        } => {
            let mut p = match &plan.data {
                DataSource::Synthetic(p) => p.clone(),
                DataSource::Csv { .. } => SynthParams::default(),
            };
            // price days in, return days out
            let price_days = n_days.unwrap_or(p.n_days + 1);
            if price_days < 3 {
                return Err(Failed::Usage("--n-days must be at least 3".into()));
            }
            p.n_days = price_days - 1;
            p.n_stocks = n_stocks.unwrap_or(p.n_stocks);
            p.signal_strength = signal_strength.unwrap_or(p.signal_strength);
            let panel = synth_panel(&p, &RngStream::new(plan.seed).derive_named("data"))?;
            let out = out.unwrap_or_else(|| plan.output.join("data.csv"));
            if let Some(parent) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Failed::from(Error::io(parent, e)))?;
            }
            write_returns_csv(&panel, &out)?;
            info!("{} stocks x {} returns", panel.n_stocks(), panel.n_days());
            println!("{}", out.display());
        }
        Command::Prepare => {
            let stats = experiment::prepare(&plan)?;
            for s in &stats {
                info!(
                    "split {}: {} train / {} test windows, {} skipped",
                    s.split,
                    s.train_windows,
                    s.test_windows,
                    s.skipped.len()
                );
            }
            println!("{}", plan.output.join("prepared.json").display());
        }
        Command::Run => {
            let res = experiment::run(&plan)?;
            eprint!("{}", experiment::table_markdown(&res.summary));
            println!("{}", plan.output.join("summary.json").display());
            if !res.failures.is_empty() {
                for f in &res.failures {
                    error!("split {} {}: {}", f.split, f.spec, f.error);
                }
                return Err(Failed::Run(format!("{} run(s) failed", res.failures.len())));
            }
        }
        Command::Report => {
            let summary = experiment::report(&plan)?;
            print!("{}", experiment::table_markdown(&summary));
        }
        Command::Plot { specs, out } => {
            let specs = specs.unwrap_or_else(|| plan.spec_names());
            let svg = plot_bundle(&plan.output, &specs)?;
            let out = out.unwrap_or_else(|| plan.output.join("cumprofit.svg"));
            std::fs::write(&out, svg).map_err(|e| Failed::from(Error::io(&out, e)))?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failed::Run(msg)) => {
            error!("{msg}");
            ExitCode::from(1)
        }
        Err(Failed::Usage(msg)) => {
            error!("{msg}");
            ExitCode::from(2)
        }
    }
}
