use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gqmgrid::measurement::parse_csv;
use gqmgrid::{evaluate_grid, impact_of, parse_model, serialize_model, validate};
use gqmgrid_bench::{layered_data, layered_model, ABC, ABC_DATA};

fn abc(c: &mut Criterion) {
    let grid = parse_model(ABC).unwrap();
    let data = parse_csv(ABC_DATA, "scenario-a.csv").unwrap();
    c.bench_function("abc/parse", |b| b.iter(|| parse_model(black_box(ABC)).unwrap()));
    c.bench_function("abc/validate", |b| b.iter(|| validate(black_box(&grid))));
    c.bench_function("abc/evaluate", |b| b.iter(|| evaluate_grid(black_box(&grid), &data, None).unwrap()));
}

fn layered(c: &mut Criterion) {
    let mut group = c.benchmark_group("layered");
    for width in [4u32, 16, 64] {
        let text = layered_model(6, width);
        let grid = parse_model(&text).unwrap();
        let data = layered_data(12);
        group.bench_with_input(BenchmarkId::new("parse", width), &text, |b, t| b.iter(|| parse_model(t).unwrap()));
        group.bench_with_input(BenchmarkId::new("serialize", width), &grid, |b, g| b.iter(|| serialize_model(g)));
        group.bench_with_input(BenchmarkId::new("evaluate", width), &grid, |b, g| {
            b.iter(|| evaluate_grid(g, &data, None).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("impact", width), &grid, |b, g| {
            b.iter(|| impact_of(g, "A3_0").unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, abc, layered);
criterion_main!(benches);
