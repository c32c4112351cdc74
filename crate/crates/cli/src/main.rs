//! `qrc`: run reservoir experiments from presets or TOML configs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use qrc_core::experiments::{
    estimate_runtime, linspace_step, preset, run_experiment, sweep, write_run, write_sweep, ExperimentConfig,
    RunOptions, SummaryRow, TaskConfig,
};
use qrc_core::parallel::{effective_workers, Execution};
use qrc_core::{Error, Result};

#[derive(Parser)]
#[command(name = "qrc", version, about = "Quantum reservoir computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Short-term memory capacity per delay.
    RunStm(Common),
    /// Capacity for the product of two delayed inputs.
    RunMonomial(Common),
    /// Mackey-Glass closed-loop forecasting.
    RunMg(Common),
    /// Santa Fe laser k-step-ahead capacity.
    RunSantafe {
        #[command(flatten)]
        common: Common,
        /// Data file, overriding the configured path.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// BLP non-Markovianity over random state pairs.
    RunBlp(Common),
    /// Decay-rate audit of the Markovian propagator.
    RunDecay(Common),
    /// Repeat a run over values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter name, e.g. `lambda`, `omega`, `model.dt`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', conflicts_with = "range", required_unless_present = "range")]
        values: Vec<f64>,
        /// Inclusive range `start:stop:step`.
        #[arg(long)]
        range: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config; without it the subcommand's preset is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name, used when no config is given.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    skip_failures: bool,
    /// Override a parameter, `name=value`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    sets: Vec<String>,
}

impl Common {
    fn resolve(&self, default_preset: &str) -> Result<ExperimentConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => preset(default_preset)?,
        };
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(n) = self.realizations {
            config.set_param("realizations", n as f64)?;
        }
        for set in &self.sets {
            let (name, value) =
                set.split_once('=').ok_or_else(|| Error::config(set.as_str(), "expected NAME=VALUE"))?;
            let value: f64 =
                value.trim().parse().map_err(|_| Error::config(name.trim(), format!("not a number: `{value}`")))?;
            config.set_param(name.trim(), value)?;
        }
        if let Some(out) = &self.out {
            config.output_path = Some(out.clone());
        }
        config.validate()?;
        Ok(config)
    }

    fn options(&self) -> RunOptions {
        RunOptions { execution: Execution::from_workers(self.workers), skip_failures: self.skip_failures }
    }
}

fn out_dir(config: &ExperimentConfig, fallback: &str) -> PathBuf {
    config.output_path.clone().unwrap_or_else(|| PathBuf::from("runs").join(format!("{fallback}-{}", config.master_seed)))
}

fn expect_task(config: &ExperimentConfig, expected: &str) -> Result<()> {
    let got = config.task.name();
    if got != expected {
        return Err(Error::config("task.kind", format!("this subcommand runs `{expected}`, config has `{got}`")));
    }
    Ok(())
}

fn print_estimate(config: &ExperimentConfig, options: &RunOptions, runs: usize) -> Result<()> {
    let one = estimate_runtime(config, options.execution)?;
    let total = one.mul_f64(runs as f64);
    eprintln!(
        "estimated runtime: {} ({} realizations x {runs} run(s), {} worker(s))",
        human(total),
        config.realizations,
        effective_workers(options.execution).min(config.realizations)
    );
    Ok(())
}

fn human(d: Duration) -> String {
    let s = d.as_secs_f64();
    match s {
        s if s < 60.0 => format!("{s:.1}s"),
        s if s < 3600.0 => format!("{:.1}min", s / 60.0),
        s => format!("{:.1}h", s / 3600.0),
    }
}

fn print_summary(rows: &[SummaryRow]) {
    println!("{:<24} {:>4} {:>12} {:>12}", "metric", "n", "mean", "std");
    for r in rows {
        println!("{:<24} {:>4} {:>12.6} {:>12.6}", r.metric, r.n, r.mean, r.std);
    }
}

fn single(common: &Common, default_preset: &str, task: &str, data: Option<&PathBuf>) -> Result<()> {
    let mut config = common.resolve(default_preset)?;
    expect_task(&config, task)?;
    if let (Some(data), TaskConfig::SantaFe { path, .. }) = (data, &mut config.task) {
        *path = data.clone();
    }
    let options = common.options();
    print_estimate(&config, &options, 1)?;
    let output = run_experiment(&config, &options)?;
    let dir = out_dir(&config, task);
    write_run(&dir, &output)?;
    for f in &output.failures {
        eprintln!("skipped realization {} [{}]: {}", f.index, f.class, f.message);
    }
    print_summary(&output.summary);
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn run_sweep(common: &Common, param: &str, values: &[f64], range: Option<&str>) -> Result<()> {
    let config = common.resolve("monomial")?;
    let values = match range {
        Some(r) => {
            let parts: Vec<f64> = r
                .split(':')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::config("range", format!("expected start:stop:step, got `{r}`")))?;
            match parts[..] {
                [start, stop, step] => linspace_step(start, stop, step)?,
                _ => return Err(Error::config("range", format!("expected start:stop:step, got `{r}`"))),
            }
        }
        None => values.to_vec(),
    };
    let options = common.options();
    print_estimate(&config, &options, values.len())?;
    let output = sweep(&config, param, &values, &options)?;
    let dir = out_dir(&config, &format!("sweep-{param}"));
    write_sweep(&dir, &output)?;
    for (value, run) in output.values.iter().zip(&output.runs) {
        println!("{param} = {value}");
        print_summary(&run.summary);
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RunStm(c) => single(c, "stm", "stm", None),
        Command::RunMonomial(c) => single(c, "monomial", "monomial", None),
        Command::RunMg(c) => single(c, "mackey-glass", "mackey-glass", None),
        Command::RunSantafe { common, data } => single(common, "santa-fe", "santa-fe", data.as_ref()),
        Command::RunBlp(c) => single(c, "blp", "blp", None),
        Command::RunDecay(c) => single(c, "decay", "decay", None),
        Command::Sweep { common, param, values, range } => run_sweep(common, param, values, range.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
