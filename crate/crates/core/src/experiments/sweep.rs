use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::runner::{run_experiment, run_family, shares_propagators, ExperimentOutput, RunOptions};

/// One row of the long-format sweep table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub realization: usize,
    pub metric: String,
    pub metric_value: f64,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub param: String,
    pub values: Vec<f64>,
    pub runs: Vec<ExperimentOutput>,
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    /// Mean of `metric` for each swept value.
    pub fn means(&self, metric: &str) -> Vec<Option<f64>> {
        self.runs.iter().map(|r| r.summary_for(metric).map(|s| s.mean)).collect()
    }
}

/// Runs `config` once per value of `param`, with the same master seed, so
/// realization `i` sees the same couplings, initial state and inputs at
/// every value. Parameters that leave the propagator unchanged are swept
/// in a single pass.
pub fn sweep(config: &ExperimentConfig, param: &str, values: &[f64], options: &RunOptions) -> Result<SweepOutput> {
    if values.is_empty() {
        return Err(Error::config(param, "sweep needs at least one value"));
    }
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = config.clone();
            c.set_param(param, v)?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = if configs.iter().all(|c| shares_propagators(&configs[0], c)) {
        run_family(&configs, options)?
    } else {
        configs.iter().map(|c| run_experiment(c, options)).collect::<Result<_>>()?
    };
    let mut out = SweepOutput { param: param.to_string(), values: values.to_vec(), runs: Vec::new(), rows: Vec::new() };
    for (run, &value) in runs.into_iter().zip(values) {
        out.rows.extend(run.records.iter().map(|r| SweepRow {
            param: param.to_string(),
            value,
            realization: r.realization,
            metric: r.metric.clone(),
            metric_value: r.value,
        }));
        out.runs.push(run);
    }
    Ok(out)
}

/// `start, start + step, …` up to `stop` inclusive (with a small tolerance).
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite()) || stop < start {
        return Err(Error::InvalidArgument(format!("bad range {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Rounding to 12 digits keeps 0.1 * 3 printing as 0.3.
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}
