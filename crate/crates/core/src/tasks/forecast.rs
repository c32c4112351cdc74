use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::readout::{predict, ObservableSet, ReadoutWeights};
use crate::reservoirs::Reservoir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForecastMode {
    /// Feed the true series; predictions are one-step-ahead.
    TeacherForced,
    /// Feed the previous prediction back as the next input.
    Autonomous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForecastProtocol {
    pub mode: ForecastMode,
    pub horizon: usize,
    /// Clamp fed-back predictions to `[0, 1]`.
    pub clip: bool,
}

impl ForecastProtocol {
    pub fn autonomous(horizon: usize) -> Self {
        Self { mode: ForecastMode::Autonomous, horizon, clip: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopRun {
    pub predictions: Vec<f64>,
    /// Number of predictions that had to be clamped before being fed back.
    pub clip_events: usize,
}

/// Runs `protocol.horizon` forecast steps from the model's current state.
///
/// Each step measures, predicts the next input and then injects either that
/// prediction (autonomous) or `teacher[j]` (teacher-forced). Prediction `j`
/// estimates the input `j + 1` steps after the last one injected before the call.
pub fn closed_loop_run<R: Reservoir + ?Sized>(
    model: &mut R,
    weights: &ReadoutWeights,
    observables: &ObservableSet,
    protocol: &ForecastProtocol,
    teacher: Option<&[f64]>,
) -> Result<ClosedLoopRun> {
    if protocol.horizon == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
    }
    let teacher = match (protocol.mode, teacher) {
        (ForecastMode::TeacherForced, Some(t)) if t.len() + 1 >= protocol.horizon => Some(t),
        (ForecastMode::TeacherForced, _) => {
            return Err(Error::InvalidArgument(format!(
                "teacher forcing over {} steps needs at least {} true inputs",
                protocol.horizon,
                protocol.horizon - 1
            )))
        }
        (ForecastMode::Autonomous, _) => None,
    };
    let mut predictions = Vec::with_capacity(protocol.horizon);
    let mut clip_events = 0;
    for j in 0..protocol.horizon {
        let y = predict(weights, &model.observe(observables, j)?)?;
        if !y.is_finite() {
            return Err(Error::NonFinitePrediction { step: j });
        }
        predictions.push(y);
        if j + 1 == protocol.horizon {
            break;
        }
        let next = match teacher {
            Some(t) => t[j],
            None if protocol.clip => {
                let c = y.clamp(0.0, 1.0);
                if c != y {
                    clip_events += 1;
                }
                c
            }
            None => y,
        };
        model.step(next)?;
    }
    Ok(ClosedLoopRun { predictions, clip_events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{IsingParams, LindbladSpec, StepKernel};
    use crate::linalg::DensityMatrix;
    use crate::readout::{train, FeatureRecord};
    use crate::reservoirs::{run_sequence, MarkovReservoir};
    use std::sync::Arc;

    fn model(seed: u64) -> MarkovReservoir {
        let spec = LindbladSpec::new(IsingParams::sample(2, 1.0, seed).unwrap(), 0.1).unwrap();
        let k = Arc::new(StepKernel::new(spec, 1.0).unwrap());
        MarkovReservoir::new(k, DensityMatrix::maximally_mixed(4)).unwrap()
    }

    #[test]
    fn first_prediction_equals_teacher_forced() {
        let set = ObservableSet::z_sites(2);
        let mut m = model(1);
        for s in [0.2, 0.7, 0.4] {
            m.step(s).unwrap();
        }
        let w = ReadoutWeights { bias: 0.1, weights: vec![0.3, -0.2] };
        let auto = closed_loop_run(&mut m.clone(), &w, &set, &ForecastProtocol::autonomous(1), None).unwrap();
        let tf = ForecastProtocol { mode: ForecastMode::TeacherForced, horizon: 1, clip: true };
        let forced = closed_loop_run(&mut m.clone(), &w, &set, &tf, Some(&[])).unwrap();
        assert_eq!(auto.predictions.len(), 1);
        assert_eq!(auto.predictions, forced.predictions);
        let direct = predict(&w, &m.observe(&set, 0).unwrap()).unwrap();
        assert_eq!(auto.predictions[0], direct);
    }

    #[test]
    fn constant_series_gives_constant_orbit() {
        let set = ObservableSet::z_sites(2);
        let mut m = model(2);
        let c = 0.42;
        let recs: Vec<FeatureRecord> = run_sequence(&mut m, &vec![c; 600], &set, 500).unwrap();
        // Features are constant after washout, so the fit is bias-only.
        let w = train(&recs, &vec![c; recs.len()]).unwrap();
        let run = closed_loop_run(&mut m, &w, &set, &ForecastProtocol::autonomous(50), None).unwrap();
        assert!(run.predictions.iter().all(|p| (p - c).abs() < 1e-9));
        assert_eq!(run.clip_events, 0);
    }

    #[test]
    fn clipping_is_counted_and_nonfinite_rejected() {
        let set = ObservableSet::z_sites(2);
        let mut m = model(3);
        let w = ReadoutWeights { bias: 2.0, weights: vec![0.0, 0.0] };
        let run = closed_loop_run(&mut m, &w, &set, &ForecastProtocol::autonomous(5), None).unwrap();
        assert_eq!(run.clip_events, 4);
        let no_clip = ForecastProtocol { clip: false, ..ForecastProtocol::autonomous(5) };
        assert!(matches!(
            closed_loop_run(&mut m, &w, &set, &no_clip, None),
            Err(Error::InputOutOfRange(_))
        ));
        let bad = ReadoutWeights { bias: f64::NAN, weights: vec![0.0, 0.0] };
        assert!(matches!(
            closed_loop_run(&mut m, &bad, &set, &ForecastProtocol::autonomous(3), None),
            Err(Error::NonFinitePrediction { step: 0 })
        ));
        assert!(closed_loop_run(&mut m, &w, &set, &ForecastProtocol::autonomous(0), None).is_err());
    }
}
