//! Experiment configuration: schema, TOML round trip, validation and
//! parameter overrides.
//!
//! ```toml
//! master_seed = 42
//! realizations = 20
//! observables = "pauli12"   # or "z"
//! ridge = 0.0
//!
//! [model]
//! kind = "residual"          # markov | residual | embedded
//! n_qubits = 3
//! dt = 10.0
//! field = 1.0
//! gamma = 0.1
//! lambda = 0.1
//! tau_e = 10
//!
//! [task]
//! kind = "stm"               # stm | monomial | mackey-glass | santa-fe | blp | decay
//! delays = [0, 1, 2, 3]
//!
//! [phases]
//! washout = 1000
//! train = 1000
//! test = 1000
//! ```
//!
//! Omitted model fields and phases take the defaults shown by
//! [`ModelConfig::default`] and [`Phases::default`].

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonmarkov::DistanceScope;
use crate::readout::ObservableSet;
use crate::tasks::MackeyGlassParams;

/// Largest simulated register (reservoir plus auxiliaries).
pub const MAX_SIMULATED_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Markov,
    Residual,
    Embedded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Reservoir qubits; the embedded model adds as many auxiliaries.
    pub n_qubits: usize,
    pub dt: f64,
    pub field: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub tau_e: usize,
    pub eta: f64,
    pub omega: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Markov,
            n_qubits: 3,
            dt: 10.0,
            field: 1.0,
            gamma: 0.1,
            lambda: 1.0,
            tau_e: 10,
            eta: std::f64::consts::FRAC_PI_4,
            omega: 1.0,
        }
    }
}

impl ModelConfig {
    pub fn simulated_qubits(&self) -> usize {
        match self.kind {
            ModelKind::Embedded => 2 * self.n_qubits,
            _ => self.n_qubits,
        }
    }
}

fn default_delays() -> Vec<usize> {
    (0..=12).collect()
}

fn default_d2() -> usize {
    10
}

fn default_true() -> bool {
    true
}

fn default_steps_ahead() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_pair_steps() -> usize {
    1000
}

fn default_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    /// Short-term memory: capacity for every delay in `delays`.
    Stm {
        #[serde(default = "default_delays")]
        delays: Vec<usize>,
    },
    /// Capacity for `s_{k-d1} s_{k-d2}`.
    Monomial {
        #[serde(default)]
        d1: usize,
        #[serde(default = "default_d2")]
        d2: usize,
    },
    /// One-step-ahead training followed by an autonomous run over the test phase.
    MackeyGlass {
        #[serde(default)]
        params: MackeyGlassParams,
        #[serde(default = "default_true")]
        clip: bool,
    },
    /// Teacher-forced forecasting of a recorded series `steps_ahead` steps forward.
    SantaFe {
        path: PathBuf,
        #[serde(default = "default_steps_ahead")]
        steps_ahead: Vec<usize>,
    },
    /// Positive trace-distance increments of one initial-state pair per
    /// realization. `omegas` runs several depolarizing strengths on the same
    /// pairs; when empty the model's own `omega` is used.
    Blp {
        #[serde(default = "default_pair_steps")]
        n_steps: usize,
        #[serde(default)]
        scope: DistanceScope,
        #[serde(default)]
        omegas: Vec<f64>,
    },
    /// Contraction of the propagator over a grid of constant inputs.
    Decay {
        #[serde(default = "default_grid")]
        input_grid: Vec<f64>,
    },
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Stm { .. } => "stm",
            TaskConfig::Monomial { .. } => "monomial",
            TaskConfig::MackeyGlass { .. } => "mackey-glass",
            TaskConfig::SantaFe { .. } => "santa-fe",
            TaskConfig::Blp { .. } => "blp",
            TaskConfig::Decay { .. } => "decay",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Phases {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl Default for Phases {
    fn default() -> Self {
        Self { washout: 1000, train: 1000, test: 1000 }
    }
}

impl Phases {
    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableChoice {
    /// `sigma^z` on every reservoir qubit.
    Z,
    /// Every one- and two-site Pauli string on the reservoir qubits.
    Pauli12,
}

impl ObservableChoice {
    pub fn build(self, n_qubits: usize) -> ObservableSet {
        match self {
            ObservableChoice::Z => ObservableSet::z_sites(n_qubits),
            ObservableChoice::Pauli12 => ObservableSet::single_and_pairs(n_qubits),
        }
    }
}

fn default_realizations() -> usize {
    100
}

fn default_observables() -> ObservableChoice {
    ObservableChoice::Pauli12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub ridge: f64,
    #[serde(default = "default_observables")]
    pub observables: ObservableChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub phases: Phases,
}

fn check(ok: bool, path: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message()))
    }
}

fn finite_in(x: f64, lo: f64, hi: f64) -> bool {
    x.is_finite() && x >= lo && x <= hi
}

impl ExperimentConfig {
    pub fn new(model: ModelConfig, task: TaskConfig) -> Self {
        Self {
            master_seed: 0,
            realizations: default_realizations(),
            ridge: 0.0,
            observables: default_observables(),
            output_path: None,
            model,
            task,
            phases: Phases::default(),
        }
    }

    pub fn from_toml_str(text: &str, source: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::config(source, e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// The fully resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Rejects out-of-domain values; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        check(self.realizations >= 1, "realizations", || "must be at least 1".into())?;
        check(finite_in(self.ridge, 0.0, f64::MAX), "ridge", || format!("must be finite and >= 0, got {}", self.ridge))?;
        check(m.n_qubits >= 1, "model.n_qubits", || "must be at least 1".into())?;
        check(m.simulated_qubits() <= MAX_SIMULATED_QUBITS, "model.n_qubits", || {
            format!("{} simulated qubits exceed the limit of {MAX_SIMULATED_QUBITS}", m.simulated_qubits())
        })?;
        check(m.dt.is_finite() && m.dt > 0.0, "model.dt", || format!("must be positive, got {}", m.dt))?;
        check(m.field.is_finite() && m.field > 0.0, "model.field", || format!("must be positive, got {}", m.field))?;
        check(finite_in(m.gamma, 0.0, f64::MAX), "model.gamma", || format!("must be >= 0, got {}", m.gamma))?;
        check(finite_in(m.lambda, 0.0, 1.0), "model.lambda", || format!("must lie in [0, 1], got {}", m.lambda))?;
        check(m.tau_e >= 1, "model.tau_e", || "must be at least 1".into())?;
        check(m.eta.is_finite() && (0.0..FRAC_PI_2).contains(&m.eta), "model.eta", || {
            format!("must lie in [0, pi/2), got {}", m.eta)
        })?;
        check(finite_in(m.omega, 0.0, 1.0), "model.omega", || format!("must lie in [0, 1], got {}", m.omega))?;

        let p = &self.phases;
        let needs_phases = !matches!(self.task, TaskConfig::Blp { .. } | TaskConfig::Decay { .. });
        if needs_phases {
            check(p.train >= 1, "phases.train", || "must be at least 1".into())?;
            check(p.test >= 1, "phases.test", || "must be at least 1".into())?;
        }

        match &self.task {
            TaskConfig::Stm { delays } => {
                check(!delays.is_empty(), "task.delays", || "must not be empty".into())?;
                let max = delays.iter().copied().max().unwrap_or(0);
                check(max <= p.washout, "task.delays", || format!("delay {max} exceeds the washout {}", p.washout))?;
            }
            TaskConfig::Monomial { d1, d2 } => {
                let max = (*d1).max(*d2);
                check(max <= p.washout, "task.d2", || format!("delay {max} exceeds the washout {}", p.washout))?;
            }
            TaskConfig::MackeyGlass { params, .. } => {
                params.validate().map_err(|e| Error::config("task.params", e.to_string()))?;
            }
            TaskConfig::SantaFe { steps_ahead, .. } => {
                check(!steps_ahead.is_empty(), "task.steps_ahead", || "must not be empty".into())?;
                check(steps_ahead.iter().all(|&s| s >= 1), "task.steps_ahead", || "entries must be >= 1".into())?;
            }
            TaskConfig::Blp { n_steps, omegas, .. } => {
                check(*n_steps >= 1, "task.n_steps", || "must be at least 1".into())?;
                check(omegas.iter().all(|&w| finite_in(w, 0.0, 1.0)), "task.omegas", || "entries must lie in [0, 1]".into())?;
                check(omegas.is_empty() || m.kind == ModelKind::Embedded, "task.omegas", || {
                    "only the embedded model has a depolarizing strength".into()
                })?;
            }
            TaskConfig::Decay { input_grid } => {
                check(!input_grid.is_empty(), "task.input_grid", || "must not be empty".into())?;
                check(input_grid.iter().all(|&s| finite_in(s, 0.0, 1.0)), "task.input_grid", || {
                    "inputs must lie in [0, 1]".into()
                })?;
            }
        }
        Ok(())
    }

    /// Overrides one numeric parameter by short name (`lambda`) or dotted
    /// path (`model.lambda`, `phases.train`), then revalidates.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let short = name.rsplit('.').next().unwrap_or(name);
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::config(name, format!("expects a non-negative integer, got {v}")))
            }
        };
        let m = &mut self.model;
        match short {
            "n_qubits" => m.n_qubits = as_count(value)?,
            "dt" => m.dt = value,
            "field" | "h" => m.field = value,
            "gamma" => m.gamma = value,
            "lambda" => m.lambda = value,
            "tau_e" => m.tau_e = as_count(value)?,
            "eta" => m.eta = value,
            "omega" => m.omega = value,
            "ridge" => self.ridge = value,
            "realizations" => self.realizations = as_count(value)?,
            "master_seed" => self.master_seed = as_count(value)? as u64,
            "washout" => self.phases.washout = as_count(value)?,
            "train" => self.phases.train = as_count(value)?,
            "test" => self.phases.test = as_count(value)?,
            "d1" | "d2" => match &mut self.task {
                TaskConfig::Monomial { d1, d2 } => {
                    *(if short == "d1" { d1 } else { d2 }) = as_count(value)?;
                }
                _ => return Err(Error::config(name, "only the monomial task has delays d1, d2")),
            },
            "n_steps" => match &mut self.task {
                TaskConfig::Blp { n_steps, .. } => *n_steps = as_count(value)?,
                _ => return Err(Error::config(name, "only the blp task has n_steps")),
            },
            _ => return Err(Error::config(name, "unknown parameter")),
        }
        self.validate()
    }
}
