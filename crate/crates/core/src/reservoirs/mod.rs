//! Reservoir update rules behind a common stepping interface.
//!
//! Every model owns an `Arc<StepKernel>`. Models built from the same kernel
//! can be driven together by [`drive_shared`], which computes the propagator
//! for each input once and hands it to every model.

mod embedded;
mod markov;
mod residual;

use std::borrow::Cow;
use std::sync::Arc;

pub use embedded::{depolarize_aux, depolarizing_kraus, partial_swap_unitary, EmbeddedReservoir};
pub use markov::MarkovReservoir;
pub use residual::ResidualReservoir;

use crate::dynamics::{StepKernel, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::readout::{measure, FeatureRecord, ObservableSet};

pub trait Reservoir {
    fn kernel(&self) -> &Arc<StepKernel>;

    /// Advances one step given the propagator of the injected input.
    fn advance(&mut self, propagator: &Superoperator) -> Result<()>;

    /// Injects `input` and advances one step.
    fn step(&mut self, input: f64) -> Result<()> {
        let p = self.kernel().propagator(input)?;
        self.advance(&p)
    }

    /// State of the reservoir qubits.
    fn reservoir_state(&self) -> Cow<'_, DensityMatrix>;

    /// Everything that is simulated; the joint reservoir and auxiliary state
    /// for the embedded model.
    fn full_state(&self) -> &DensityMatrix;

    fn n_reservoir_qubits(&self) -> usize {
        self.kernel().spec().n_qubits()
    }

    /// Measures `set` on the reservoir state, or on the full state when the
    /// set spans all simulated qubits.
    fn observe(&self, set: &ObservableSet, time_index: usize) -> Result<FeatureRecord> {
        let rho = if set.n_qubits() == self.n_reservoir_qubits() {
            self.reservoir_state()
        } else {
            Cow::Borrowed(self.full_state())
        };
        let mut record = measure(&rho, set)?;
        record.time_index = time_index;
        Ok(record)
    }
}

/// Any of the three update rules.
#[derive(Clone, Debug)]
pub enum ReservoirModel {
    Markov(MarkovReservoir),
    Residual(ResidualReservoir),
    Embedded(EmbeddedReservoir),
}

impl Reservoir for ReservoirModel {
    fn kernel(&self) -> &Arc<StepKernel> {
        match self {
            ReservoirModel::Markov(r) => r.kernel(),
            ReservoirModel::Residual(r) => r.kernel(),
            ReservoirModel::Embedded(r) => r.kernel(),
        }
    }

    fn advance(&mut self, propagator: &Superoperator) -> Result<()> {
        match self {
            ReservoirModel::Markov(r) => r.advance(propagator),
            ReservoirModel::Residual(r) => r.advance(propagator),
            ReservoirModel::Embedded(r) => r.advance(propagator),
        }
    }

    fn reservoir_state(&self) -> Cow<'_, DensityMatrix> {
        match self {
            ReservoirModel::Markov(r) => r.reservoir_state(),
            ReservoirModel::Residual(r) => r.reservoir_state(),
            ReservoirModel::Embedded(r) => r.reservoir_state(),
        }
    }

    fn full_state(&self) -> &DensityMatrix {
        match self {
            ReservoirModel::Markov(r) => r.full_state(),
            ReservoirModel::Residual(r) => r.full_state(),
            ReservoirModel::Embedded(r) => r.full_state(),
        }
    }
}

fn check_sequence(len: usize, washout: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidArgument("empty input sequence".into()));
    }
    if washout >= len {
        return Err(Error::InvalidArgument(format!("washout {washout} leaves no steps out of {len}")));
    }
    Ok(())
}

/// Steps `model` through `inputs` and records observables for every step
/// at index `>= washout`. Record `k` is measured right after injecting `inputs[k]`.
pub fn run_sequence<R: Reservoir + ?Sized>(
    model: &mut R,
    inputs: &[f64],
    observables: &ObservableSet,
    washout: usize,
) -> Result<Vec<FeatureRecord>> {
    check_sequence(inputs.len(), washout)?;
    let mut records = Vec::with_capacity(inputs.len() - washout);
    for (k, &s) in inputs.iter().enumerate() {
        model.step(s)?;
        if k >= washout {
            records.push(model.observe(observables, k)?);
        }
    }
    Ok(records)
}

/// Drives several models that share one kernel with the same inputs,
/// computing each propagator once. `on_step(k, models)` runs after step `k`.
pub fn drive_shared<R, F>(models: &mut [R], inputs: &[f64], mut on_step: F) -> Result<()>
where
    R: Reservoir,
    F: FnMut(usize, &[R]) -> Result<()>,
{
    let Some(first) = models.first() else {
        return Ok(());
    };
    let kernel = Arc::clone(first.kernel());
    if models.iter().any(|m| !Arc::ptr_eq(m.kernel(), &kernel)) {
        return Err(Error::InvalidArgument("shared driving needs models built on one kernel".into()));
    }
    for (k, &s) in inputs.iter().enumerate() {
        let p = kernel.propagator(s)?;
        for m in models.iter_mut() {
            m.advance(&p)?;
        }
        on_step(k, models)?;
    }
    Ok(())
}

/// [`run_sequence`] for a group of models sharing a kernel; `observables[i]`
/// is measured on `models[i]`.
pub fn run_shared<R: Reservoir>(
    models: &mut [R],
    inputs: &[f64],
    observables: &[ObservableSet],
    washout: usize,
) -> Result<Vec<Vec<FeatureRecord>>> {
    check_sequence(inputs.len(), washout)?;
    if observables.len() != models.len() {
        return Err(Error::Dimension(format!(
            "{} observable sets for {} models",
            observables.len(),
            models.len()
        )));
    }
    let mut records: Vec<Vec<FeatureRecord>> =
        (0..models.len()).map(|_| Vec::with_capacity(inputs.len() - washout)).collect();
    drive_shared(models, inputs, |k, ms| {
        if k >= washout {
            for ((m, set), out) in ms.iter().zip(observables).zip(records.iter_mut()) {
                out.push(m.observe(set, k)?);
            }
        }
        Ok(())
    })?;
    Ok(records)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::dynamics::{IsingParams, LindbladSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn kernel(n: usize, gamma: f64, dt: f64, seed: u64) -> Arc<StepKernel> {
        let spec = LindbladSpec::new(IsingParams::sample(n, 1.0, seed).unwrap(), gamma).unwrap();
        Arc::new(StepKernel::new(spec, dt).unwrap())
    }

    pub fn random_state(dim: usize, seed: u64) -> DensityMatrix {
        DensityMatrix::random_full_rank(dim, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn inputs(len: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(0.0..1.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::nonmarkov::trace_distance;

    #[test]
    fn washout_boundary_gives_one_record() {
        let k = kernel(2, 0.1, 1.0, 1);
        let mut m = MarkovReservoir::new(k, random_state(4, 2)).unwrap();
        let xs = inputs(10, 3);
        let recs = run_sequence(&mut m, &xs, &ObservableSet::z_sites(2), 9).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].time_index, 9);
    }

    #[test]
    fn empty_or_overlong_washout_rejected() {
        let k = kernel(2, 0.1, 1.0, 1);
        let mut m = MarkovReservoir::new(k, random_state(4, 2)).unwrap();
        assert!(run_sequence(&mut m, &[], &ObservableSet::z_sites(2), 0).is_err());
        assert!(run_sequence(&mut m, &[0.5; 3], &ObservableSet::z_sites(2), 3).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let k = kernel(2, 0.1, 1.0, 4);
        let xs = inputs(50, 5);
        let set = ObservableSet::single_and_pairs(2);
        let a = run_sequence(&mut MarkovReservoir::new(k.clone(), random_state(4, 6)).unwrap(), &xs, &set, 10).unwrap();
        let b = run_sequence(&mut MarkovReservoir::new(k, random_state(4, 6)).unwrap(), &xs, &set, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shared_driving_matches_individual_runs() {
        let k = kernel(2, 0.1, 2.0, 7);
        let xs = inputs(40, 8);
        let set = ObservableSet::z_sites(2);
        let mut models = vec![
            ReservoirModel::Markov(MarkovReservoir::new(k.clone(), random_state(4, 9)).unwrap()),
            ReservoirModel::Residual(ResidualReservoir::new(k.clone(), 0.3, 4, random_state(4, 10)).unwrap()),
        ];
        let mut solo = models.clone();
        let shared = run_shared(&mut models, &xs, &[set.clone(), set.clone()], 5).unwrap();
        for (m, recs) in solo.iter_mut().zip(&shared) {
            assert_eq!(&run_sequence(m, &xs, &set, 5).unwrap(), recs);
        }
    }

    #[test]
    fn shared_driving_rejects_distinct_kernels() {
        let mut models = vec![
            MarkovReservoir::new(kernel(2, 0.1, 1.0, 1), random_state(4, 1)).unwrap(),
            MarkovReservoir::new(kernel(2, 0.1, 1.0, 1), random_state(4, 1)).unwrap(),
        ];
        assert!(drive_shared(&mut models, &[0.1], |_, _| Ok(())).is_err());
    }

    #[test]
    fn markov_features_forget_initial_state() {
        let k = kernel(3, 0.1, 10.0, 11);
        let xs = inputs(1100, 12);
        let set = ObservableSet::z_sites(3);
        let mut a = MarkovReservoir::new(k.clone(), random_state(8, 13)).unwrap();
        let mut b = MarkovReservoir::new(k, random_state(8, 14)).unwrap();
        let ra = run_sequence(&mut a, &xs, &set, 1000).unwrap();
        let rb = run_sequence(&mut b, &xs, &set, 1000).unwrap();
        for (x, y) in ra.iter().zip(&rb) {
            for (u, v) in x.features.iter().zip(&y.features) {
                assert!((u - v).abs() <= 1e-6);
            }
        }
        assert!(trace_distance(&a.reservoir_state(), &b.reservoir_state()).unwrap() <= 1e-6);
    }
}
