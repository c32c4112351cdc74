//! Run directories.
//!
//! A run writes `config.resolved`, `records.csv`, `summary.csv` and
//! `log.txt`, plus `predictions.csv` (Mackey-Glass) or `blp.csv` (BLP) when
//! the task produces them. Every file except `log.txt` is a pure function of
//! the configuration; wall-clock times only appear in the log.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::runner::{ExperimentOutput, SummaryRow};
use super::sweep::SweepOutput;

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn create(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

pub fn records_csv(output: &ExperimentOutput) -> String {
    let mut s = String::from("realization,seed,metric,value,condition_number\n");
    for r in &output.records {
        writeln!(s, "{},{},{},{},{}", r.realization, r.seed, r.metric, r.value, r.condition_number).unwrap();
    }
    s
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("metric,n,mean,std,median,min,max\n");
    for r in rows {
        writeln!(s, "{},{},{},{},{},{},{}", r.metric, r.n, r.mean, r.std, r.median, r.min, r.max).unwrap();
    }
    s
}

pub fn predictions_csv(output: &ExperimentOutput) -> String {
    let mut s = String::from("realization,step,truth,prediction\n");
    for p in &output.predictions {
        writeln!(s, "{},{},{},{}", p.realization, p.step, p.truth, p.prediction).unwrap();
    }
    s
}

pub fn blp_csv(output: &ExperimentOutput) -> String {
    let mut s = String::from("omega,pair_index,sum\n");
    for b in &output.blp {
        writeln!(s, "{},{},{}", b.omega, b.pair_index, b.sum).unwrap();
    }
    s
}

pub fn sweep_csv(sweep: &SweepOutput) -> String {
    let mut s = String::from("param,value,realization,metric,metric_value\n");
    for r in &sweep.rows {
        writeln!(s, "{},{},{},{},{}", r.param, r.value, r.realization, r.metric, r.metric_value).unwrap();
    }
    s
}

pub fn write_run(dir: &Path, output: &ExperimentOutput) -> Result<()> {
    create(dir)?;
    write(dir, "config.resolved", &output.config.to_toml())?;
    write(dir, "records.csv", &records_csv(output))?;
    write(dir, "summary.csv", &summary_csv(&output.summary))?;
    write(dir, "log.txt", &(output.log.join("\n") + "\n"))?;
    if !output.predictions.is_empty() {
        write(dir, "predictions.csv", &predictions_csv(output))?;
    }
    if !output.blp.is_empty() {
        write(dir, "blp.csv", &blp_csv(output))?;
    }
    Ok(())
}

/// `sweep.csv` at the top plus one run directory per value, named
/// `<param>=<value>`.
pub fn write_sweep(dir: &Path, sweep: &SweepOutput) -> Result<()> {
    create(dir)?;
    write(dir, "sweep.csv", &sweep_csv(sweep))?;
    for (value, run) in sweep.values.iter().zip(&sweep.runs) {
        write_run(&dir.join(format!("{}={value}", sweep.param)), run)?;
    }
    Ok(())
}
