use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cvqkd::sweeps::{run, SweepSpec};
use cvqkd::Execution;

fn strategies() -> Vec<(&'static str, Execution)> {
    #[allow(unused_mut)]
    let mut out = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    out.push(("parallel", Execution::Parallel));
    out
}

fn bench_sweeps(c: &mut Criterion) {
    let specs = [
        ("fig2", SweepSpec::fig2(20)),
        ("fig5", SweepSpec::fig5(21, 21)),
        ("fig6", SweepSpec::fig6(200.0, 41)),
    ];
    for (name, spec) in &specs {
        let mut group = c.benchmark_group(*name);
        group.sample_size(10);
        for (label, exec) in strategies() {
            group.bench_with_input(BenchmarkId::from_parameter(label), spec, |b, spec| {
                b.iter(|| run(black_box(spec), exec).unwrap())
            });
        }
        group.finish();
    }
}

criterion_group!(benches, bench_sweeps);
criterion_main!(benches);
