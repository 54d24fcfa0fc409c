//! Sequential vs. parallel execution of the data-parallel kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hsos::coherent::{husimi_sample_chains, HusimiTarget, SamplerConfig};
use hsos::definetti::{run_trials, TrialConfig, TrialState};
use hsos::exec::Exec;
use hsos::fock::SymVector;
use hsos::qmaxcut::{classical_opt, CloudHamiltonian, WeightedGraph};
use hsos::quantize::{q_quantize, HermitianPoly};
use hsos::spectral::LinearOperator;
use hsos::symspace::BoundVariant;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn definetti_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("definetti_trials");
    group.sample_size(10);
    let cfg = TrialConfig {
        d: 3,
        n: 6,
        k: 2,
        m: 1,
        trials: 64,
        variant: BoundVariant::Standard,
        state: TrialState::Mixed,
        seed: 1,
    };
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_trials(black_box(&cfg), exec).unwrap()));
    }
    group.finish();
}

fn words_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("words_matvec");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = HermitianPoly::random(4, 2, &mut rng).unwrap();
    let psi = SymVector::random(4, 10, &mut rng).unwrap();
    for (name, exec) in MODES {
        let op = q_quantize(&f, 10).unwrap().with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| op.apply(black_box(&psi)).unwrap()));
    }
    group.finish();
}

fn cloud_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("cloud_matvec");
    let g = WeightedGraph::complete(5);
    for (name, exec) in MODES {
        let h = CloudHamiltonian::new(&g, 2, 4).unwrap().with_exec(exec);
        let x: Vec<hsos::C64> = (0..h.dim()).map(|i| hsos::C64::new((i % 7) as f64, 1.0)).collect();
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| h.apply(black_box(&x))));
    }
    group.finish();
}

fn classical_multistart(c: &mut Criterion) {
    let mut group = c.benchmark_group("classical_multistart");
    group.sample_size(10);
    let g = WeightedGraph::cycle(12).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| classical_opt(black_box(&g), 3, 32, 3, exec).unwrap())
        });
    }
    group.finish();
}

fn husimi_chains(c: &mut Criterion) {
    let mut group = c.benchmark_group("husimi_chains");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let target = HusimiTarget::Pure(SymVector::random(3, 6, &mut rng).unwrap());
    let cfg = SamplerConfig { seed: 5, burn_in: 200, ..Default::default() };
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| husimi_sample_chains(black_box(&target), &cfg, 16, 2000, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, definetti_trials, words_matvec, cloud_matvec, classical_multistart, husimi_chains);
criterion_main!(benches);
