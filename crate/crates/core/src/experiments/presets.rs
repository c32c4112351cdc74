//! Ready-made configurations for the reference experiments.
//!
//! Residual-model presets use `N = 3, dt = 10, h = 1, gamma = 0.1`; embedded
//! presets use `h = 1, dt = 0.5, gamma = 0.1, eta = pi/4` with three
//! reservoir qubits (six simulated), or four with the `-full` suffix.
//! All presets run 100 realizations; pass a smaller count for quick runs.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::nonmarkov::DistanceScope;

use super::config::{ExperimentConfig, ModelConfig, ModelKind, ObservableChoice, Phases, TaskConfig};

pub const PRESET_NAMES: [&str; 9] =
    ["stm", "monomial", "mackey-glass", "mackey-glass-full", "blp", "blp-full", "embedded-stm", "santa-fe", "decay"];

fn residual(lambda: f64) -> ModelConfig {
    ModelConfig { kind: ModelKind::Residual, n_qubits: 3, dt: 10.0, field: 1.0, gamma: 0.1, lambda, tau_e: 10, ..Default::default() }
}

fn embedded(n_qubits: usize, omega: f64) -> ModelConfig {
    ModelConfig {
        kind: ModelKind::Embedded,
        n_qubits,
        dt: 0.5,
        field: 1.0,
        gamma: 0.1,
        eta: FRAC_PI_4,
        omega,
        ..Default::default()
    }
}

fn config(model: ModelConfig, task: TaskConfig) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(model, task);
    c.observables = ObservableChoice::Pauli12;
    c.realizations = 100;
    c
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let n = if name.ends_with("-full") { 4 } else { 3 };
    Ok(match name {
        "stm" => config(residual(0.1), TaskConfig::Stm { delays: (0..=12).collect() }),
        "monomial" => config(residual(0.1), TaskConfig::Monomial { d1: 0, d2: 10 }),
        "mackey-glass" | "mackey-glass-full" => {
            let mut c =
                config(embedded(n, 0.5), TaskConfig::MackeyGlass { params: Default::default(), clip: true });
            c.phases = Phases { washout: 1000, train: 1000, test: 150 };
            c
        }
        "blp" | "blp-full" => config(
            embedded(n, 0.5),
            TaskConfig::Blp { n_steps: 1000, scope: DistanceScope::Reservoir, omegas: vec![0.0, 0.25, 0.5, 0.75, 1.0] },
        ),
        "embedded-stm" => config(embedded(3, 0.5), TaskConfig::Stm { delays: (0..=12).collect() }),
        "santa-fe" => config(
            embedded(3, 0.5),
            TaskConfig::SantaFe { path: "santa_fe.txt".into(), steps_ahead: vec![1, 2, 3] },
        ),
        "decay" => config(residual(1.0), TaskConfig::Decay { input_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0] }),
        _ => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{name}`; known: {}", PRESET_NAMES.join(", ")),
            ))
        }
    })
}
