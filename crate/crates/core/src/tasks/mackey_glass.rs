use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{InputSeries, Provenance, Scaling};

/// Initial history on `[-delay, 0]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryInit {
    Constant(f64),
    /// `base` plus seeded uniform noise in `[-amplitude, amplitude]` drawn at
    /// integer times and linearly interpolated, so that every integrator
    /// step sees the same history function.
    Perturbed { base: f64, amplitude: f64 },
}

/// `ds/dt = -decay s(t) + drive s(t - delay) / (1 + s(t - delay)^exponent)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MackeyGlassParams {
    pub decay: f64,
    pub drive: f64,
    pub exponent: i32,
    pub delay: f64,
    pub sample_spacing: f64,
    pub integrator_step: f64,
    /// Time integrated and discarded before the first sample.
    pub transient: f64,
    pub history: HistoryInit,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        Self {
            decay: 0.1,
            drive: 0.2,
            exponent: 10,
            delay: 17.0,
            sample_spacing: 3.0,
            integrator_step: 0.1,
            transient: 1000.0,
            history: HistoryInit::Perturbed { base: 0.9, amplitude: 0.01 },
        }
    }
}

fn whole_steps(span: f64, h: f64, what: &str) -> Result<usize> {
    let q = span / h;
    let n = q.round();
    if n < 1.0 || (q - n).abs() > 1e-9 * q.max(1.0) {
        return Err(Error::InvalidArgument(format!("{what} {span} is not a whole number of integrator steps {h}")));
    }
    Ok(n as usize)
}

impl MackeyGlassParams {
    pub fn validate(&self) -> Result<()> {
        let h = self.integrator_step;
        if !(h > 0.0 && h < self.sample_spacing) {
            return Err(Error::InvalidArgument(format!(
                "integrator step {h} must be positive and below the sample spacing {}",
                self.sample_spacing
            )));
        }
        if !(self.transient >= 0.0 && self.transient.is_finite()) {
            return Err(Error::InvalidArgument(format!("transient {} must be >= 0", self.transient)));
        }
        if !(self.decay.is_finite() && self.drive.is_finite()) {
            return Err(Error::InvalidArgument("decay and drive must be finite".into()));
        }
        whole_steps(self.delay, h, "delay")?;
        whole_steps(self.sample_spacing, h, "sample spacing")?;
        Ok(())
    }

    fn rhs(&self, x: f64, delayed: f64) -> f64 {
        -self.decay * x + self.drive * delayed / (1.0 + delayed.powi(self.exponent))
    }
}

/// Sampled Mackey-Glass trajectory: raw values and their `[0, 1]` rescaling.
#[derive(Clone, Debug, PartialEq)]
pub struct MackeyGlassSeries {
    pub raw: Vec<f64>,
    pub series: InputSeries,
}

fn history_function(init: HistoryInit, delay: f64, seed: u64) -> Box<dyn Fn(f64) -> f64> {
    match init {
        HistoryInit::Constant(c) => Box::new(move |_| c),
        HistoryInit::Perturbed { base, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let knots: Vec<f64> =
                (0..=delay.ceil() as usize).map(|_| base + amplitude * rng.gen_range(-1.0..=1.0)).collect();
            Box::new(move |t: f64| {
                // Knot i sits at time -i.
                let u = (-t).clamp(0.0, (knots.len() - 1) as f64);
                let i = (u.floor() as usize).min(knots.len() - 2);
                let w = u - i as f64;
                knots[i] * (1.0 - w) + knots[i + 1] * w
            })
        }
    }
}

/// Fixed-step RK4 integration with the delayed term read from a ring of the
/// last `delay / h + 1` grid values; half-step delayed values are linear
/// interpolations of neighbouring grid points.
pub fn mackey_glass(params: &MackeyGlassParams, n_samples: usize, seed: u64) -> Result<MackeyGlassSeries> {
    params.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let h = params.integrator_step;
    let m = whole_steps(params.delay, h, "delay")?;
    let spacing = whole_steps(params.sample_spacing, h, "sample spacing")?;
    let transient_steps = (params.transient / h).round() as usize;

    let hist = history_function(params.history, params.delay, seed);
    let mut ring: VecDeque<f64> = (0..=m).map(|j| hist(-params.delay + j as f64 * h)).collect();
    let mut raw = Vec::with_capacity(n_samples);
    let total = transient_steps + (n_samples - 1) * spacing;
    for n in 0..=total {
        if n >= transient_steps && (n - transient_steps).is_multiple_of(spacing) {
            raw.push(ring[m]);
        }
        if n == total {
            break;
        }
        let x = ring[m];
        let (d0, d1) = (ring[0], ring[1]);
        let dm = 0.5 * (d0 + d1);
        let k1 = params.rhs(x, d0);
        let k2 = params.rhs(x + 0.5 * h * k1, dm);
        let k3 = params.rhs(x + 0.5 * h * k2, dm);
        let k4 = params.rhs(x + h * k3, d1);
        let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::Numerical(format!("Mackey-Glass integration diverged at step {n}")));
        }
        ring.pop_front();
        ring.push_back(next);
    }
    let scaling = Scaling::fit(&raw)?;
    let mut series = InputSeries::new(raw.iter().map(|&x| scaling.scale(x).clamp(0.0, 1.0)).collect(), Provenance::MackeyGlass)?;
    series.seed = Some(seed);
    series.scaling = Some(scaling);
    Ok(MackeyGlassSeries { raw, series })
}
