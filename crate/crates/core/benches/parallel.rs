use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use nyts_core::metrics::{cross_validate, CvConfig};
use nyts_core::ml::forest::{fit_random_forest, ForestConfig};
use nyts_core::ml::gbm::{fit_gbm, GbmConfig};
use nyts_core::ml::logistic::fit_logistic;
use nyts_core::ml::{GdConfig, ModelKind, ModelSpec};
use nyts_core::{Dataset, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

/// Survey-shaped data: coded answers and a label driven by three columns.
fn data(n: usize, d: usize) -> (Array2<u32>, Vec<u8>) {
    let x = Array2::from_shape_fn((n, d), |(i, j)| {
        ((i * 2_654_435_761 + j * 40_503) >> 7) as u32 % 5
    });
    let y = (0..n)
        .map(|i| u8::from(x[[i, 0]] + 2 * x[[i, 1]] > 3 + x[[i, 2]]))
        .collect();
    (x, y)
}

fn forest(c: &mut Criterion) {
    let (x, y) = data(4000, 40);
    let mut g = c.benchmark_group("forest_50_trees");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ForestConfig {
            n_trees: 50,
            seed: 1,
            execution: exec,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_random_forest(x.view(), &y, &cfg).unwrap())
        });
    }
    g.finish();
}

fn logistic(c: &mut Criterion) {
    let (x, y) = data(20_000, 40);
    let xr = x.mapv(f64::from);
    let yr: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let mut g = c.benchmark_group("logistic_200_iters");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = GdConfig {
            max_iters: 200,
            tolerance: 1e-300,
            execution: exec,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_logistic(xr.view(), &yr, &cfg).unwrap())
        });
    }
    g.finish();
}

fn boosting(c: &mut Criterion) {
    let (x, y) = data(20_000, 40);
    let mut g = c.benchmark_group("gbm_20_stages");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = GbmConfig {
            n_stages: 20,
            execution: exec,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_gbm(x.view(), &y, &cfg).unwrap())
        });
    }
    g.finish();
}

fn cv(c: &mut Criterion) {
    let (x, y) = data(3000, 30);
    let names = (0..x.ncols()).map(|j| format!("F{j}")).collect();
    let ds = Dataset::new(names, x, y).unwrap();
    let mut g = c.benchmark_group("cv_5_fold_tree");
    g.sample_size(10);
    for (name, exec) in MODES {
        let spec = ModelSpec::new(ModelKind::DecisionTree);
        let cfg = CvConfig {
            execution: exec,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| cross_validate(&spec, &ds, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, forest, logistic, boosting, cv);
criterion_main!(benches);
