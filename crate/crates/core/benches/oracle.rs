use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdet_core::normalize::normalize;
use qdet_core::oracle::{oracle_check_with, OracleBounds, DEFAULT_WORK_BUDGET};
use qdet_core::par::Execution;
use qdet_core::parser::{parse_problem, SourceFile};

const DETERMINED: &str = "relation R1(A: uninterpreted, B: uninterpreted);\n\
    relation R2(C: uninterpreted, D: uninterpreted);\n\
    view V1 = project R1.A, R1.B where true from R1;\n\
    view V2 = project R2.C where true from R2;\n\
    query project R1.A where R1.B = R2.C from R1, R2;";

fn oracle(c: &mut Criterion) {
    let p = normalize(&parse_problem(&SourceFile::new(DETERMINED)).unwrap().problem);
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for (d, k) in [(2, 2), (3, 2), (3, 3)] {
        let bounds = OracleBounds::new(d, k).unwrap();
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, format!("d{d}k{k}")), &bounds, |b, &bounds| {
                b.iter(|| oracle_check_with(&p, bounds, DEFAULT_WORK_BUDGET, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, oracle);
criterion_main!(benches);
