//! Sequential vs rayon execution of the sampling and scoring loops.
//! Build with `--no-default-features` to bench the sequential path alone.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use slnfit::dists::lskn_cdf;
use slnfit::lsknfit::fit_lskn;
use slnfit::mcengine::{sample_sln, Exec, RngSpec};
use slnfit::presets::sln_preset;
use slnfit::probscale::{max_cdf_error, EmpiricalCdf, DEFAULT_REGION};

const N: usize = 200_000;

fn execs() -> Vec<(&'static str, Exec)> {
    vec![
        ("sequential", Exec::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Exec::Parallel { workers: 0 }),
    ]
}

fn sampling(c: &mut Criterion) {
    let spec = sln_preset("fig1").unwrap();
    let mut g = c.benchmark_group("sample_sln_fig1");
    g.throughput(Throughput::Elements(N as u64));
    for (name, exec) in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sample_sln(&spec, RngSpec::new(1, 0), black_box(N), exec).unwrap())
        });
    }
    g.finish();
}

fn scoring(c: &mut Criterion) {
    let spec = sln_preset("fig2").unwrap();
    let fit = fit_lskn(&spec).unwrap().params;
    let ecdf = EmpiricalCdf::new(sample_sln(&spec, RngSpec::new(1, 0), N, Exec::Sequential).unwrap()).unwrap();
    let mut g = c.benchmark_group("max_cdf_error_fig2");
    g.throughput(Throughput::Elements(N as u64));
    for (name, exec) in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| max_cdf_error(&ecdf, |x| lskn_cdf(x, fit), DEFAULT_REGION, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sampling, scoring
}
criterion_main!(benches);
