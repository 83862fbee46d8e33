use cascade_bench::{forcing, warmed_stepper};
use cascade_core::SpectralField;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pc_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("pc_step");
    for (d, n) in [(1, 1024), (1, 4096), (2, 128), (3, 32)] {
        let (mut stepper, mut state) = warmed_stepper(d, n, 10);
        g.bench_function(BenchmarkId::new(format!("d{d}"), n), |b| b.iter(|| stepper.pc_step(&mut state).unwrap()));
    }
    g.finish();
}

fn operator_apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator_apply");
    for (d, n) in [(1, 1024), (2, 128), (3, 32)] {
        let (stepper, state) = warmed_stepper(d, n, 10);
        g.bench_function(BenchmarkId::new(format!("d{d}"), n), |b| b.iter(|| stepper.operators().apply(&state.u)));
    }
    g.finish();
}

fn forcing_draw(c: &mut Criterion) {
    let mut g = c.benchmark_group("forcing_draw");
    for (d, n) in [(1, 1024), (2, 128), (3, 32)] {
        let f = forcing(d, n);
        let mut out = SpectralField::zeros(f.grid().clone());
        let mut step = 0;
        g.bench_function(BenchmarkId::new(format!("d{d}"), n), |b| {
            b.iter(|| {
                step += 1;
                f.sample_into(step, &mut out)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, pc_step, operator_apply, forcing_draw);
criterion_main!(benches);
