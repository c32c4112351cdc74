//! Quantum reservoir computing with Markovian, residual and embedded
//! non-Markovian reservoirs.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`] dense complex matrices, exponentials, partial traces;
//! * [`dynamics`] the input-driven Ising Liouvillian, propagators and the
//!   steady-state/contraction split of a propagator;
//! * [`reservoirs`] the three update rules behind one [`reservoirs::Reservoir`] trait;
//! * [`readout`] Pauli observables, least-squares readouts, capacity and MSE;
//! * [`tasks`] memory and forecasting tasks, Mackey-Glass and Santa Fe inputs;
//! * [`nonmarkov`] trace distance and the discrete BLP measure;
//! * [`experiments`] seeded, configuration-driven runs and sweeps;
//! * [`parallel`] realization-level parallelism (rayon, or sequential
//!   without the `parallel` feature).

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod nonmarkov;
pub mod parallel;
pub mod readout;
pub mod reservoirs;
pub mod tasks;

pub use error::{Error, Result};
