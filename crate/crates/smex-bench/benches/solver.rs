//! Factorize-once / solve-many is the performance core of the optimization
//! loop: every cost evaluation is two triangular solves against matrices
//! factorized a single time in `prepare`. These benchmarks track the cost of
//! that preparation, of the repeated state/adjoint solves, and of one full
//! regularized minimization.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use smex::optimize::{minimize, Method, OptimizerOptions};
use smex::transmission::Control;
use smex_bench::{benchmark_problem, disk_mesh, prepared_operators, square_mesh};
use std::sync::Arc;

fn bench_prepare(c: &mut Criterion) {
    let mut group = c.benchmark_group("prepare");
    for n in [8usize, 16] {
        let mesh = square_mesh(n);
        group.bench_function(format!("square_n{n}"), |b| {
            b.iter_batched(
                || Arc::new(mesh.clone()),
                |m| {
                    smex::transmission::prepare(
                        &benchmark_problem(),
                        m,
                        smex::fem::QuadratureRule::Degree5,
                    )
                    .unwrap()
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.bench_function("disk_n8", |b| {
        let mesh = disk_mesh(8);
        b.iter_batched(
            || Arc::new(mesh.clone()),
            |m| {
                smex::transmission::prepare(
                    &benchmark_problem(),
                    m,
                    smex::fem::QuadratureRule::Degree5,
                )
                .unwrap()
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn bench_state_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("state_solve");
    for n in [8usize, 16, 32] {
        let ops = prepared_operators(square_mesh(n));
        let w = Control(vec![0.1; ops.control_dimension()]);
        group.bench_function(format!("square_n{n}"), |b| {
            b.iter(|| ops.solve_state(&w).unwrap())
        });
    }
    group.finish();
}

fn bench_adjoint_and_gradient(c: &mut Criterion) {
    let ops = prepared_operators(square_mesh(16));
    let w = Control(vec![0.1; ops.control_dimension()]);
    let state = ops.solve_state(&w).unwrap();
    c.bench_function("adjoint_square_n16", |b| {
        b.iter(|| ops.solve_adjoint(&state).unwrap())
    });
    let adjoint = ops.solve_adjoint(&state).unwrap();
    c.bench_function("gradient_square_n16", |b| {
        b.iter(|| ops.gradient(&w, &adjoint, 1e-4))
    });
}

fn bench_minimize(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimize");
    group.sample_size(10);
    let ops = prepared_operators(square_mesh(8));
    for (name, method) in [("lbfgs", Method::Lbfgs), ("cg", Method::Cg)] {
        let opts = OptimizerOptions::default()
            .with_method(method)
            .with_tolerance(1e-8);
        group.bench_function(format!("square_n8_{name}"), |b| {
            b.iter(|| minimize(&ops, 1e-4, Control::zeros(ops.control_dimension()), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_prepare,
    bench_state_solves,
    bench_adjoint_and_gradient,
    bench_minimize
);
criterion_main!(benches);
