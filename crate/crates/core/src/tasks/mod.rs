//! Input series and task targets.
//!
//! Targets are [`TargetSeries`] values: `values[i]` is the target for time
//! step `start + i`, where step `k` is the record measured right after input
//! `s_k` was injected.

mod forecast;
mod mackey_glass;
mod santa_fe;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use forecast::{closed_loop_run, ClosedLoopRun, ForecastMode, ForecastProtocol};
pub use mackey_glass::{mackey_glass, HistoryInit, MackeyGlassParams, MackeyGlassSeries};
pub use santa_fe::{santa_fe_load, santa_fe_parse};

use crate::error::{Error, Result};
use crate::readout::FeatureRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    UniformRandom,
    MackeyGlass,
    SantaFe,
    ClosedLoop,
}

/// The affine map `x -> (x - min) / (max - min)` onto `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: f64,
    pub max: f64,
}

impl Scaling {
    /// Min/max of `raw`. A constant series gets unit span so it maps to 0.
    pub fn fit(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidArgument("cannot scale an empty series".into()));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("series contains non-finite values".into()));
        }
        let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { min, max })
    }

    fn span(&self) -> f64 {
        if self.max > self.min {
            self.max - self.min
        } else {
            1.0
        }
    }

    pub fn scale(&self, x: f64) -> f64 {
        (x - self.min) / self.span()
    }

    pub fn unscale(&self, y: f64) -> f64 {
        y * self.span() + self.min
    }
}

/// Reservoir inputs, all in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSeries {
    values: Vec<f64>,
    pub seed: Option<u64>,
    pub provenance: Provenance,
    pub scaling: Option<Scaling>,
}

impl InputSeries {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("input {v} at index {i} outside [0, 1]")));
        }
        Ok(Self { values, seed: None, provenance, scaling: None })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Writes `t,raw,scaled` rows; `raw` is recovered through the scaling.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "t,raw,scaled").expect("vec write");
        for (t, &v) in self.values.iter().enumerate() {
            let raw = self.scaling.map_or(v, |s| s.unscale(v));
            writeln!(out, "{t},{raw},{v}").expect("vec write");
        }
        std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// I.i.d. uniform inputs on `[0, 1)`.
pub fn gen_uniform_inputs(length: usize, seed: u64) -> Result<InputSeries> {
    if length == 0 {
        return Err(Error::InvalidArgument("input length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..length).map(|_| rng.gen_range(0.0..1.0)).collect();
    let mut series = InputSeries::new(values, Provenance::UniformRandom)?;
    series.seed = Some(seed);
    Ok(series)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetSeries {
    pub start: usize,
    pub values: Vec<f64>,
}

impl TargetSeries {
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn at(&self, step: usize) -> Option<f64> {
        step.checked_sub(self.start).and_then(|i| self.values.get(i).copied())
    }
}

/// `y_k = s_{k - tau}` for `k >= tau`.
pub fn stm_target(inputs: &[f64], tau: usize) -> Result<TargetSeries> {
    if tau >= inputs.len() {
        return Err(Error::InvalidArgument(format!("delay {tau} for {} inputs", inputs.len())));
    }
    Ok(TargetSeries { start: tau, values: inputs[..inputs.len() - tau].to_vec() })
}

/// `y_k = s_{k - d1} s_{k - d2}` for `k >= max(d1, d2)`.
pub fn monomial_target(inputs: &[f64], d1: usize, d2: usize) -> Result<TargetSeries> {
    let start = d1.max(d2);
    if start >= inputs.len() {
        return Err(Error::InvalidArgument(format!("delays ({d1}, {d2}) for {} inputs", inputs.len())));
    }
    let values = (start..inputs.len()).map(|k| inputs[k - d1] * inputs[k - d2]).collect();
    Ok(TargetSeries { start, values })
}

/// `y_k = s_{k + steps_ahead}` for `k < len - steps_ahead`.
pub fn forecast_target(inputs: &[f64], steps_ahead: usize) -> Result<TargetSeries> {
    if steps_ahead == 0 || steps_ahead >= inputs.len() {
        return Err(Error::InvalidArgument(format!("{steps_ahead} steps ahead for {} inputs", inputs.len())));
    }
    Ok(TargetSeries { start: 0, values: inputs[steps_ahead..].to_vec() })
}

/// Pairs every record with its target, dropping records without one.
pub fn align(records: &[FeatureRecord], target: &TargetSeries) -> (Vec<FeatureRecord>, Vec<f64>) {
    records.iter().filter_map(|r| target.at(r.time_index).map(|y| (r.clone(), y))).unzip()
}
