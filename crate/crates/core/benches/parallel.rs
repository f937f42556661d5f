use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;
use pairgee::simulate::{run, run_simulation, CampDesign, DesignSpec, SimConfig};
use pairgee::{fit, Execution, FitConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn truth() -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_row_slice(&[-3.9, 1.3, 0.4, -0.7, 0.4, 0.9, 0.4, -0.4]),
        DVector::from_row_slice(&[0.03, 0.01]),
    )
}

fn bench_fit(c: &mut Criterion) {
    let (beta, alpha) = truth();
    let design = CampDesign::default().build(1).unwrap();
    let samplers = run::design_samplers(&design, &beta, &alpha, &FitConfig::default()).unwrap();
    let data = design.data.with_outcomes(run::replicate_outcomes(&samplers, 7, 0)).unwrap();

    let mut group = c.benchmark_group("fit_camp_111");
    group.sample_size(10);
    for (name, execution) in MODES {
        for detailed in [false, true] {
            let cfg = FitConfig { execution, detailed, ..FitConfig::default() };
            let label = if detailed { "detailed" } else { "extended" };
            group.bench_with_input(BenchmarkId::new(label, name), &cfg, |b, cfg| {
                b.iter(|| fit(&data, &design.pairs, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_simulation(c: &mut Criterion) {
    let (beta, alpha) = truth();
    let design = CampDesign { clusters: 37, ..CampDesign::default() };
    let mut group = c.benchmark_group("simulate_camp_37x8");
    group.sample_size(10);
    for (name, execution) in MODES {
        let mut cfg = SimConfig::new(DesignSpec::Camp(design.clone()), beta.clone(), alpha.clone());
        cfg.replicates = 8;
        cfg.execution = execution;
        group.bench_function(name, |b| b.iter(|| run_simulation(&cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_fit, bench_simulation);
criterion_main!(benches);
