//! Parallel kernels on a one-thread pool against the default pool.
//! Build with `--no-default-features` to time the sequential fallback.

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use steklov_core::bounds::{verify, BoundId, BoundParams, DEFAULT_REL_TOL};
use steklov_core::fem::dtn_spectrum;
use steklov_core::geometry::{Domain, PolygonalDomain};
use steklov_core::riesz::riesz_curve;
use steklov_core::spectra::{rectangle_sn, Problem};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let n = default.current_num_threads();
    let mut out = vec![("1-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if n > 1 {
        out.push((format!("{n}-threads"), default));
    }
    out
}

fn kernels(c: &mut Criterion) {
    let rect = PolygonalDomain::rectangle(PI, 1.0).unwrap();
    let dom = Domain::Polygon(rect.clone());
    let s = rectangle_sn(PI, 1.0, 5000).unwrap();
    let grid: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.5).collect();
    let params = BoundParams::from_meta(s.meta());
    let mode = if cfg!(feature = "parallel") { "rayon" } else { "sequential" };

    let mut g = c.benchmark_group(format!("kernels/{mode}"));
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(format!("fem_rectangle_h0.04/{name}"), |b| {
            b.iter(|| pool.install(|| dtn_spectrum(black_box(&rect), Problem::Sn, 50, 0.04).unwrap()))
        });
        g.bench_function(format!("riesz_curve_2000/{name}"), |b| {
            b.iter(|| pool.install(|| riesz_curve(black_box(&s), 1.0, &grid).unwrap()))
        });
        g.bench_function(format!("verify_main_2000/{name}"), |b| {
            b.iter(|| {
                pool.install(|| verify(black_box(&s), BoundId::Main, &params, Some(&dom), &grid, DEFAULT_REL_TOL).unwrap())
            })
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
