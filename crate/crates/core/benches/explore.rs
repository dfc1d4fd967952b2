use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use microlang::compile::{compile, CompileOptions};
use microlang::engine::run_seeds;
use microlang::explorer::{explore, ExploreOptions};
use microlang::par::Parallelism;
use microlang::prelude::FILESYSTEM_DEMO;
use microlang::syntax::Program;

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

// Wide interleavings: many independent senders and receivers on two objects.
const WIDE: &str = "
chan share : {a : nat, b : nat}
chan w : {a : nat, b : nat}
chan r : nat
system = share!([a = 0, b = 10]) . 0
  | share?(o) . ( w!(o.[a <= succ(o.a)]) . w!(o.[b <= succ(o.b)]) . 0
                | w!(o.[b <= succ(o.b), a <= succ(o.a)]) . 0
                | w?(p) . w?(p) . 0
                | w?(p) . 0
                | r!(add o.a o.b) . r!(o.b) . 0
                | r!(o.a) . 0
                | r?(v) . 0
                | r?(v) . r?(v) . 0 )
";

fn program(src: &str) -> Program {
    compile(src, &CompileOptions::default()).unwrap().linked
}

fn frontier_expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("explore");
    group.sample_size(10);
    for (name, src) in [("filesystem", FILESYSTEM_DEMO), ("wide", WIDE)] {
        let program = program(src);
        for (mode_name, mode) in MODES {
            let opts = ExploreOptions {
                parallelism: mode,
                ..ExploreOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(mode_name, name), &program, |b, p| {
                b.iter(|| explore(p, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn seed_batches(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_seeds");
    let program = program(WIDE);
    let seeds: Vec<u64> = (0..256).collect();
    for (mode_name, mode) in MODES {
        group.bench_function(mode_name, |b| {
            b.iter(|| run_seeds(&program, &seeds, 10_000, mode))
        });
    }
    group.finish();
}

criterion_group!(benches, frontier_expansion, seed_batches);
criterion_main!(benches);
