//! `spikecast` command-line driver.
//!
//! Every subcommand resolves a [`RunConfig`] from an optional TOML file and
//! then applies command-line flags on top of it.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spikecast::config::{parse_config_unchecked, DatasetKind, ModelName, RunConfig};
use spikecast::experiment::{self, TABLE1_AMPLITUDES, TABLE1_PERIODS};
use spikecast::{Error, Result};

#[derive(Parser)]
#[command(name = "spikecast", version, about = "Online time-series forecasting with a plastic spiking network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured dataset to `series.csv`.
    Generate(Common),
    /// Run one model and write `record.csv`, `summary.json` and `manifest.json`.
    Run(Common),
    /// Run several models on the same series and write a comparison table.
    Compare(Common),
    /// Run the amplitude/period trend grid.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = TABLE1_AMPLITUDES)]
        amplitudes: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = TABLE1_PERIODS)]
        periods: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `lorenz` or `csv:<path>`.
    #[arg(long)]
    dataset: Option<String>,
    /// Value column for CSV datasets.
    #[arg(long)]
    column: Option<String>,
    /// Model name; `compare` and `table1` accept a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    model: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Network size.
    #[arg(long)]
    neurons: Option<usize>,
    /// Rolling loss window in steps.
    #[arg(long)]
    window: Option<usize>,
    /// Refit threshold (`inf` disables refits).
    #[arg(long)]
    threshold: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<(RunConfig, Vec<ModelName>)> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_config_unchecked(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(d) = &self.dataset {
            if d == "lorenz" {
                cfg.dataset.kind = DatasetKind::Lorenz;
            } else if let Some(path) = d.strip_prefix("csv:") {
                cfg.dataset.kind = DatasetKind::Csv;
                cfg.dataset.path = Some(PathBuf::from(path));
            } else {
                return Err(Error::invalid("dataset", format!("expected `lorenz` or `csv:<path>`, got `{d}`")));
            }
        }
        if let Some(c) = &self.column {
            cfg.dataset.column = c.clone();
        }
        let models = self.model.iter().map(|m| m.parse()).collect::<Result<Vec<ModelName>>>()?;
        if let [m] = models.as_slice() {
            cfg.model.kind = *m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(n) = self.neurons {
            cfg.model.spiking.rsnn.n_neurons = n;
        }
        if let Some(w) = self.window {
            cfg.model.window = w;
        }
        if let Some(t) = self.threshold {
            cfg.model.threshold = Some(t);
        }
        cfg.validate()?;
        Ok((cfg, models))
    }
}

fn all_if_empty(models: Vec<ModelName>) -> Vec<ModelName> {
    if models.is_empty() {
        ModelName::ALL.to_vec()
    } else {
        models
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(c) => {
            let (cfg, _) = c.resolve()?;
            let s = experiment::generate(&cfg)?;
            println!("wrote {} samples to {}", s.len(), cfg.out.join("series.csv").display());
        }
        Command::Run(c) => {
            let (cfg, models) = c.resolve()?;
            if models.len() > 1 {
                return Err(Error::invalid("model", "`run` takes a single model; use `compare`"));
            }
            let s = experiment::run_experiment(&cfg)?;
            println!("model      {}", s.model);
            println!("steps      {}", s.steps);
            println!("avg RMSE   {:.4} (raw units {:.4})", s.avg_rmse, s.avg_rmse_raw);
            println!("avg d_W    {:.4}", s.avg_dw);
            println!("per mode   {} RMSE, {} d_W", s.segments.rmse, s.segments.dw);
            println!("refits     {}", s.refits);
            println!("artifacts  {}", cfg.out.display());
        }
        Command::Compare(c) => {
            let (cfg, models) = c.resolve()?;
            let rows = experiment::compare(&cfg, &all_if_empty(models))?;
            print!("{}", experiment::format_comparison(&rows));
        }
        Command::Table1 { common, amplitudes, periods } => {
            let (cfg, models) = common.resolve()?;
            let models = all_if_empty(models);
            let cells = experiment::emit_table1(&cfg, &models, &amplitudes, &periods)?;
            print!("{}", experiment::format_table1(&cells, &models));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
