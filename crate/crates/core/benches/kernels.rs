use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tfpauli::eigen::EigenOptions;
use tfpauli::field::VectorPotential;
use tfpauli::grid::BoxGrid;
use tfpauli::operator::{build_magnetic_hamiltonian, neg_trace_with};
use tfpauli::par::{sum_chunks, Exec, CHUNK};
use tfpauli::potentials::smooth_bump;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn operator_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("pauli_apply");
    for n in [32, 64] {
        let g = Arc::new(BoxGrid::cube(n, 1.0).unwrap());
        let v = smooth_bump(&g, 20.0, 0.45).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = VectorPotential::random_band_limited(g.clone(), 2, 0.3, &mut rng).unwrap();
        let base = build_magnetic_hamiltonian(0.2, &a, &v, &g, true).unwrap();
        let x: Vec<Complex64> = (0..base.complex_dim()).map(|i| Complex64::new((i as f64).sin(), 0.5)).collect();
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        for (name, exec) in MODES {
            let op = base.clone().with_exec(exec);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| {
                    op.apply_complex(black_box(&x), &mut y);
                    black_box(y[0])
                })
            });
        }
    }
    group.finish();
}

fn reduction(c: &mut Criterion) {
    let mut group = c.benchmark_group("chunked_sum");
    let data: Vec<f64> = (0..1 << 22).map(|i| (i as f64).sqrt()).collect();
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sum_chunks(exec, data.len(), CHUNK, |r| data[r].iter().map(|x| x * x).sum::<f64>()))
        });
    }
    group.finish();
}

fn trace_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("neg_trace");
    group.sample_size(10);
    let g = Arc::new(BoxGrid::cube(24, 1.0).unwrap());
    let v = smooth_bump(&g, 10.0, 0.45).unwrap();
    let zero = VectorPotential::zeros(g.clone());
    let base = build_magnetic_hamiltonian(0.2, &zero, &v, &g, false).unwrap();
    for (name, exec) in MODES {
        let op = base.clone().with_exec(exec);
        let opts = EigenOptions {
            exec,
            ..EigenOptions::default()
        };
        group.bench_function(name, |b| b.iter(|| neg_trace_with(&op, 1, &opts).unwrap().neg_trace));
    }
    group.finish();
}

criterion_group!(benches, operator_apply, reduction, trace_solve);
criterion_main!(benches);
