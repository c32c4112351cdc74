use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{split_at, IsingParams, LindbladSpec, StepKernel};
use crate::error::{Error, Result};
use crate::linalg::{random_orthogonal_pair, DensityMatrix};
use crate::nonmarkov::pair_sums;
use crate::parallel::{effective_workers, map_indexed, Execution};
use crate::readout::{capacity, fit, mse, predict_all, FeatureRecord, ObservableSet};
use crate::reservoirs::{run_shared, EmbeddedReservoir, MarkovReservoir, Reservoir, ReservoirModel, ResidualReservoir};
use crate::tasks::{
    align, closed_loop_run, forecast_target, gen_uniform_inputs, mackey_glass, monomial_target, santa_fe_load,
    stm_target, ForecastMode, ForecastProtocol, InputSeries, TargetSeries,
};

use super::config::{ExperimentConfig, ModelConfig, ModelKind, TaskConfig};
use super::seeds::{realization_seed, stream_seed, Stream};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub execution: Execution,
    /// Drop failed realizations instead of aborting the run.
    pub skip_failures: bool,
}

/// One metric of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub realization: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    /// Condition number of the centered training features; NaN when no
    /// readout was trained.
    pub condition_number: f64,
    /// Seconds spent on the whole realization.
    pub wall_time: f64,
}

/// Mean and one sample standard deviation of a metric across realizations.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRow {
    pub realization: usize,
    /// Index into the test window.
    pub step: usize,
    pub truth: f64,
    pub prediction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlpRow {
    pub omega: f64,
    pub pair_index: usize,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub index: usize,
    pub class: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub predictions: Vec<PredictionRow>,
    pub blp: Vec<BlpRow>,
    /// Realizations dropped under `skip_failures`.
    pub failures: Vec<Failure>,
    pub log: Vec<String>,
}

impl ExperimentOutput {
    pub fn summary_for(&self, metric: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.metric == metric)
    }

    /// Per-realization values of `metric`, in realization order.
    pub fn values(&self, metric: &str) -> Vec<f64> {
        self.records.iter().filter(|r| r.metric == metric).map(|r| r.value).collect()
    }
}

pub fn stm_metric(tau: usize) -> String {
    format!("capacity_tau_{tau}")
}

pub fn ahead_metric(steps: usize) -> String {
    format!("capacity_ahead_{steps}")
}

pub fn blp_metric(omega: Option<f64>) -> String {
    match omega {
        Some(w) => format!("blp_sum_omega_{w}"),
        None => "blp_sum".into(),
    }
}

/// Groups records by metric (first-appearance order) and aggregates them.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.metric.as_str()) {
            order.push(&r.metric);
        }
    }
    order
        .into_iter()
        .map(|metric| {
            let mut v: Vec<f64> = records.iter().filter(|r| r.metric == metric).map(|r| r.value).collect();
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            v.sort_by(f64::total_cmp);
            let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
            SummaryRow { metric: metric.to_string(), n, mean, std, median, min: v[0], max: v[n - 1] }
        })
        .collect()
}

/// Data shared by every realization of a run.
struct Shared {
    observables: ObservableSet,
    series: Option<InputSeries>,
}

fn prepare(config: &ExperimentConfig, log: &mut Vec<String>) -> Result<Shared> {
    let observables = config.observables.build(config.model.n_qubits);
    let p = &config.phases;
    let series = match &config.task {
        TaskConfig::MackeyGlass { params, .. } => {
            let seed = stream_seed(config.master_seed, Stream::SharedSeries);
            let mg = mackey_glass(params, p.total(), seed)?;
            let sc = mg.series.scaling.expect("Mackey-Glass series is scaled");
            log.push(format!("mackey-glass series: seed {seed}, {} samples, scaling min {} max {}", p.total(), sc.min, sc.max));
            Some(mg.series)
        }
        TaskConfig::SantaFe { path, steps_ahead } => {
            let s = santa_fe_load(path)?;
            let need = p.total() + steps_ahead.iter().copied().max().unwrap_or(1);
            if s.len() < need {
                return Err(Error::config(
                    "task.path",
                    format!("{} has {} samples, the phases need {need}", path.display(), s.len()),
                ));
            }
            let sc = s.scaling.expect("Santa Fe series is scaled");
            log.push(format!("santa-fe series: {} samples, scaling min {} max {}", s.len(), sc.min, sc.max));
            Some(s)
        }
        _ => None,
    };
    Ok(Shared { observables, series })
}

fn lindblad_spec(model: &ModelConfig, seed: u64) -> Result<LindbladSpec> {
    let params = IsingParams::sample(model.n_qubits, model.field, stream_seed(seed, Stream::Couplings))?;
    LindbladSpec::new(params, model.gamma)
}

fn kernel(model: &ModelConfig, seed: u64) -> Result<Arc<StepKernel>> {
    Ok(Arc::new(StepKernel::new(lindblad_spec(model, seed)?, model.dt)?))
}

/// A reservoir of the configured kind; `omega` overrides the configured
/// depolarizing strength.
pub fn build_model(
    model: &ModelConfig,
    kernel: Arc<StepKernel>,
    initial: DensityMatrix,
    omega: Option<f64>,
) -> Result<ReservoirModel> {
    Ok(match model.kind {
        ModelKind::Markov => ReservoirModel::Markov(MarkovReservoir::new(kernel, initial)?),
        ModelKind::Residual => {
            ReservoirModel::Residual(ResidualReservoir::new(kernel, model.lambda, model.tau_e, initial)?)
        }
        ModelKind::Embedded => ReservoirModel::Embedded(EmbeddedReservoir::new(
            kernel,
            model.eta,
            omega.unwrap_or(model.omega),
            initial,
        )?),
    })
}

fn random_initial(dim: usize, seed: u64) -> DensityMatrix {
    DensityMatrix::random_full_rank(dim, &mut ChaCha8Rng::seed_from_u64(stream_seed(seed, Stream::InitialState)))
}

/// Trains on `train` and returns the test capacity and the training condition number.
fn score(train: &[FeatureRecord], test: &[FeatureRecord], target: &TargetSeries, ridge: f64) -> Result<(f64, f64)> {
    let (f, y) = align(train, target);
    let readout = fit(&f, &y, ridge)?;
    let (f, y) = align(test, target);
    let outputs = predict_all(&readout.weights, &f)?;
    Ok((capacity(&outputs, &y)?, readout.condition_number))
}

#[derive(Default)]
struct Realization {
    metrics: Vec<(String, f64, f64)>,
    predictions: Vec<PredictionRow>,
    blp: Vec<BlpRow>,
    notes: Vec<String>,
}

/// One realization of every config in a family. Family members differ only
/// in parameters that leave the propagator unchanged, so they are driven
/// together with one propagator per step.
fn run_realization(family: &[ExperimentConfig], shared: &Shared, index: usize, seed: u64) -> Result<Vec<Realization>> {
    let base = &family[0];
    let m = &base.model;
    let p = &base.phases;
    let set = &shared.observables;
    let sets = vec![set.clone(); family.len()];
    let build_all = |kernel: &Arc<StepKernel>| -> Result<Vec<ReservoirModel>> {
        let initial = random_initial(1 << m.n_qubits, seed);
        family.iter().map(|c| build_model(&c.model, kernel.clone(), initial.clone(), None)).collect()
    };
    let mut outs: Vec<Realization> = family.iter().map(|_| Realization::default()).collect();
    match &base.task {
        TaskConfig::Stm { .. } | TaskConfig::Monomial { .. } => {
            let inputs = gen_uniform_inputs(p.total(), stream_seed(seed, Stream::Inputs))?;
            let s = inputs.values();
            let mut models = build_all(&kernel(m, seed)?)?;
            let all_records = run_shared(&mut models, s, &sets, p.washout)?;
            for ((c, records), out) in family.iter().zip(&all_records).zip(&mut outs) {
                let (train, test) = records.split_at(p.train);
                if let TaskConfig::Stm { delays } = &c.task {
                    for &tau in delays {
                        let (cap, cond) = score(train, test, &stm_target(s, tau)?, c.ridge)?;
                        out.metrics.push((stm_metric(tau), cap, cond));
                    }
                } else if let TaskConfig::Monomial { d1, d2 } = c.task {
                    let (cap, cond) = score(train, test, &monomial_target(s, d1, d2)?, c.ridge)?;
                    out.metrics.push(("capacity".into(), cap, cond));
                }
            }
        }
        TaskConfig::MackeyGlass { clip, .. } => {
            let s = shared.series.as_ref().expect("prepared series").values();
            let fed = p.washout + p.train;
            let mut models = build_all(&kernel(m, seed)?)?;
            let all_records = run_shared(&mut models, &s[..fed], &sets, p.washout)?;
            let targets: Vec<f64> = (p.washout..fed).map(|k| s[k + 1]).collect();
            let truth = &s[fed..fed + p.test];
            let protocol = ForecastProtocol { mode: ForecastMode::Autonomous, horizon: p.test, clip: *clip };
            for (((c, records), model), out) in family.iter().zip(&all_records).zip(&mut models).zip(&mut outs) {
                let readout = fit(records, &targets, c.ridge)?;
                let run = closed_loop_run(model, &readout.weights, set, &protocol, None)?;
                out.metrics.push(("mse".into(), mse(&run.predictions, truth)?, readout.condition_number));
                out.metrics.push(("clip_events".into(), run.clip_events as f64, f64::NAN));
                if run.clip_events > 0 {
                    out.notes.push(format!("{} fed-back predictions clipped to [0, 1]", run.clip_events));
                }
                out.predictions = truth
                    .iter()
                    .zip(&run.predictions)
                    .enumerate()
                    .map(|(step, (&truth, &prediction))| PredictionRow { realization: index, step, truth, prediction })
                    .collect();
            }
        }
        TaskConfig::SantaFe { .. } => {
            let s = shared.series.as_ref().expect("prepared series").values();
            let mut models = build_all(&kernel(m, seed)?)?;
            let all_records = run_shared(&mut models, &s[..p.total()], &sets, p.washout)?;
            for ((c, records), out) in family.iter().zip(&all_records).zip(&mut outs) {
                let (train, test) = records.split_at(p.train);
                let TaskConfig::SantaFe { steps_ahead, .. } = &c.task else { unreachable!("family shares the task") };
                for &eta in steps_ahead {
                    let (cap, cond) = score(train, test, &forecast_target(s, eta)?, c.ridge)?;
                    out.metrics.push((ahead_metric(eta), cap, cond));
                }
            }
        }
        TaskConfig::Blp { .. } | TaskConfig::Decay { .. } => {
            for (c, out) in family.iter().zip(&mut outs) {
                *out = run_unshared(c, index, seed)?;
            }
        }
    }
    Ok(outs)
}

fn run_unshared(config: &ExperimentConfig, index: usize, seed: u64) -> Result<Realization> {
    let m = &config.model;
    let mut out = Realization::default();
    match &config.task {
        TaskConfig::Blp { n_steps, scope, omegas } => {
            let kernel = kernel(m, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, Stream::InitialState));
            let (a, b) = random_orthogonal_pair(1 << m.n_qubits, &mut rng);
            let (a, b) = (DensityMatrix::pure(&a)?, DensityMatrix::pure(&b)?);
            let inputs = gen_uniform_inputs(*n_steps, stream_seed(seed, Stream::Inputs))?;
            let variants: Vec<Option<f64>> =
                if omegas.is_empty() { vec![None] } else { omegas.iter().map(|&w| Some(w)).collect() };
            let mut models = Vec::with_capacity(2 * variants.len());
            for &w in &variants {
                models.push(build_model(m, kernel.clone(), a.clone(), w)?);
                models.push(build_model(m, kernel.clone(), b.clone(), w)?);
            }
            let sums = pair_sums(&mut models, inputs.values(), *n_steps, *scope)?;
            for (w, sum) in variants.into_iter().zip(sums) {
                out.metrics.push((blp_metric(w), sum, f64::NAN));
                out.blp.push(BlpRow { omega: w.unwrap_or(m.omega), pair_index: index, sum });
            }
        }
        TaskConfig::Decay { input_grid } => {
            let spec = lindblad_spec(m, seed)?;
            let (mut rate, mut norm, mut radius) = (f64::INFINITY, 0.0f64, 0.0f64);
            for &s in input_grid {
                let split = split_at(&spec, m.dt, s)?;
                rate = rate.min(split.decay_rate);
                norm = norm.max(split.t_norm);
                radius = radius.max(split.spectral_radius);
            }
            out.metrics.push(("decay_rate".into(), rate, f64::NAN));
            out.metrics.push(("t_norm".into(), norm, f64::NAN));
            out.metrics.push(("t_radius".into(), radius, f64::NAN));
        }
        _ => unreachable!("driven tasks run as a family"),
    }
    Ok(out)
}

/// Whether two configs can share propagators, realization by realization.
pub fn shares_propagators(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    let (ma, mb) = (&a.model, &b.model);
    a.master_seed == b.master_seed
        && a.realizations == b.realizations
        && a.observables == b.observables
        && a.task == b.task
        && a.phases == b.phases
        && ma.n_qubits == mb.n_qubits
        && ma.dt == mb.dt
        && ma.field == mb.field
        && ma.gamma == mb.gamma
}

/// Runs every realization of `config` and aggregates the metrics.
///
/// Realization `i` depends only on `(config, i)`, so parallel and
/// sequential execution give identical records.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentOutput> {
    Ok(run_family(std::slice::from_ref(config), options)?.remove(0))
}

/// Runs configs that differ only in readout or propagator-independent
/// model parameters (`lambda`, `tau_e`, `eta`, `omega`, `ridge`, the model
/// kind) in one pass. Each output equals what [`run_experiment`] returns for
/// that config.
pub fn run_family(family: &[ExperimentConfig], options: &RunOptions) -> Result<Vec<ExperimentOutput>> {
    let Some(base) = family.first() else {
        return Err(Error::InvalidArgument("empty experiment family".into()));
    };
    for c in family {
        c.validate()?;
        if !shares_propagators(base, c) {
            return Err(Error::InvalidArgument("family members must share seeds, task, phases and propagators".into()));
        }
    }
    let mut header = vec![format!(
        "task {} on {} reservoir qubits, {} realizations, master seed {}, {} workers",
        base.task.name(),
        base.model.n_qubits,
        base.realizations,
        base.master_seed,
        effective_workers(options.execution)
    )];
    let shared = prepare(base, &mut header)?;
    let results = map_indexed(base.realizations, options.execution, |i| {
        let seed = realization_seed(base.master_seed, i);
        let start = Instant::now();
        let r = run_realization(family, &shared, i, seed)?;
        Ok((seed, start.elapsed().as_secs_f64(), r))
    });

    let mut outs: Vec<ExperimentOutput> = family
        .iter()
        .map(|c| {
            let mut log = header.clone();
            log.insert(1, format!("model {:?}", c.model));
            ExperimentOutput {
                config: c.clone(),
                records: Vec::new(),
                summary: Vec::new(),
                predictions: Vec::new(),
                blp: Vec::new(),
                failures: Vec::new(),
                log,
            }
        })
        .collect();
    let mut first_error = None;
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok((seed, wall_time, realizations)) => {
                for (out, r) in outs.iter_mut().zip(realizations) {
                    let cond = r.metrics.iter().map(|m| m.2).find(|c| !c.is_nan()).unwrap_or(f64::NAN);
                    out.log.push(format!("realization {index} seed {seed}: {wall_time:.3} s, condition number {cond:e}"));
                    out.log.extend(r.notes.iter().map(|n| format!("realization {index}: {n}")));
                    out.records.extend(r.metrics.into_iter().map(|(metric, value, condition_number)| RunRecord {
                        realization: index,
                        seed,
                        metric,
                        value,
                        condition_number,
                        wall_time,
                    }));
                    out.predictions.extend(r.predictions);
                    out.blp.extend(r.blp);
                }
            }
            Err(e) if options.skip_failures => {
                for out in &mut outs {
                    out.log.push(format!("realization {index} skipped: {e}"));
                    out.failures.push(Failure { index, class: e.class(), message: e.to_string() });
                }
                first_error.get_or_insert(Error::Realization { index, source: Box::new(e) });
            }
            Err(e) => return Err(Error::Realization { index, source: Box::new(e) }),
        }
    }
    if outs.iter().any(|o| o.records.is_empty()) {
        return Err(first_error.expect("a realization failed"));
    }
    for out in &mut outs {
        out.summary = summarize(&out.records);
        for row in &out.summary {
            out.log.push(format!("{}: mean {} std {} (n = {})", row.metric, row.mean, row.std, row.n));
        }
    }
    Ok(outs)
}

fn steps_per_realization(config: &ExperimentConfig) -> usize {
    let p = &config.phases;
    match &config.task {
        TaskConfig::Stm { .. } | TaskConfig::Monomial { .. } | TaskConfig::SantaFe { .. } => p.total(),
        TaskConfig::MackeyGlass { .. } => p.total(),
        TaskConfig::Blp { n_steps, omegas, .. } => 2 * n_steps * omegas.len().max(1),
        TaskConfig::Decay { input_grid } => input_grid.len(),
    }
}

/// Wall-clock estimate from timing a few steps of the first realization.
pub fn estimate_runtime(config: &ExperimentConfig, execution: Execution) -> Result<Duration> {
    config.validate()?;
    let m = &config.model;
    let seed = realization_seed(config.master_seed, 0);
    let per_step = match &config.task {
        TaskConfig::Decay { input_grid } => {
            let spec = lindblad_spec(m, seed)?;
            let start = Instant::now();
            split_at(&spec, m.dt, input_grid[0])?;
            start.elapsed()
        }
        _ => {
            const PROBE: u32 = 8;
            let mut model = build_model(m, kernel(m, seed)?, random_initial(1 << m.n_qubits, seed), None)?;
            let set = config.observables.build(m.n_qubits);
            let start = Instant::now();
            for i in 0..PROBE {
                model.step(f64::from(i) / f64::from(PROBE))?;
                model.observe(&set, 0)?;
            }
            start.elapsed() / PROBE
        }
    };
    let total = per_step.as_secs_f64() * steps_per_realization(config) as f64 * config.realizations as f64;
    let parallel = effective_workers(execution).min(config.realizations).max(1);
    Ok(Duration::from_secs_f64(total / parallel as f64))
}
