use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qrc_core::experiments::{run_experiment, ExperimentConfig, ModelConfig, ModelKind, Phases, RunOptions, TaskConfig};
use qrc_core::parallel::Execution;

fn config(kind: ModelKind) -> ExperimentConfig {
    let dt = if kind == ModelKind::Embedded { 0.5 } else { 10.0 };
    let model = ModelConfig { kind, n_qubits: 3, dt, lambda: 0.1, tau_e: 4, omega: 0.5, ..Default::default() };
    let mut c = ExperimentConfig::new(model, TaskConfig::Stm { delays: vec![0, 1, 2, 4] });
    c.realizations = 4;
    c.phases = Phases { washout: 50, train: 100, test: 50 };
    c
}

fn realizations(c: &mut Criterion) {
    let mut group = c.benchmark_group("realizations");
    group.sample_size(10);
    for kind in [ModelKind::Residual, ModelKind::Embedded] {
        let config = config(kind);
        for (label, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let options = RunOptions { execution, skip_failures: false };
            group.bench_with_input(BenchmarkId::new(label, format!("{kind:?}")), &config, |b, config| {
                b.iter(|| run_experiment(config, &options).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, realizations);
criterion_main!(benches);
