//! Benchmarks for the two stages that dominate real runs: the
//! nonlinear profile solve and the block ground-eigenvalue solves.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use vortex_bench::{solved_profile, standard_params};
use vortex_core::profile::solve_profile;
use vortex_core::spectral::{m1_spectrum, q0_spectrum, qn_ground};
use vortex_core::SolveOptions;

fn bench_profile_solve(c: &mut Criterion) {
    let p = standard_params();
    let mut group = c.benchmark_group("profile_solve");
    for (radius, n_cells) in [(10.0f64, 320usize), (20.0, 640), (40.0, 1280)] {
        group.bench_with_input(
            BenchmarkId::from_parameter(n_cells),
            &(radius, n_cells),
            |b, &(radius, n_cells)| {
                b.iter(|| {
                    solve_profile(black_box(&p), radius, n_cells, &SolveOptions::default())
                        .expect("solve succeeds")
                })
            },
        );
    }
    group.finish();
}

fn bench_block_grounds(c: &mut Criterion) {
    let prof = solved_profile(20.0, 640);
    let le = prof.lambda_eff;
    c.bench_function("phase_sector_ground_640", |b| {
        b.iter(|| q0_spectrum(black_box(&prof), le).expect("eigensolve succeeds"))
    });
    c.bench_function("decisive_block_ground_640", |b| {
        b.iter(|| m1_spectrum(black_box(&prof), le).expect("eigensolve succeeds"))
    });
    c.bench_function("high_block_ground_640", |b| {
        b.iter(|| qn_ground(black_box(&prof), le, 4).expect("eigensolve succeeds"))
    });
}

criterion_group!(benches, bench_profile_solve, bench_block_grounds);
criterion_main!(benches);
