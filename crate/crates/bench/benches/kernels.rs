use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use torcat_bench::{gps_config, square_axis, squeezed_pair};
use torcat_core::fock_oracle::{apply_beam_splitter_with_tolerance, build_state, wigner_reconstruct, OracleState};
use torcat_core::measurement::{povm_photon_number, ConditioningOptions};
use torcat_core::phase_space::{make_squeezed_thermal, FockWigner};
use torcat_core::protocols::{condition_mechanics, gps_optical_cat, PrepOptions};

fn povm_eval(c: &mut Criterion) {
    let p = povm_photon_number(3, 0.8).unwrap();
    let ax = square_axis(10.0, 201);
    c.bench_function("povm_eval_201x201", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for ix in 0..ax.points {
                for ip in 0..ax.points {
                    acc += p.eval(ax.value(ix), ax.value(ip));
                }
            }
            black_box(acc)
        })
    });
}

fn conditioning(c: &mut Criterion) {
    let mut g = c.benchmark_group("conditioning");
    g.sample_size(10);
    let cfg = gps_config(1);
    let (ax, ap) = cfg.optical_axes(81, 10.0).unwrap();
    g.bench_function("gps_m1_81", |b| {
        b.iter(|| gps_optical_cat(black_box(&cfg), ax, ap, &ConditioningOptions::default()).unwrap())
    });
    let mech = make_squeezed_thermal(2000.0, 0.2).unwrap();
    let grid = square_axis(10.0, 81);
    g.bench_function("mechanics_fock1_81", |b| {
        b.iter(|| condition_mechanics(&FockWigner { n: 1 }, &mech, 1.0, 0.0, grid, grid, &PrepOptions::default()).unwrap())
    });
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let pair = squeezed_pair(1.15, 20);
    g.bench_function("beam_splitter_n20", |b| {
        b.iter(|| apply_beam_splitter_with_tolerance(black_box(&pair), 0.909, 1.0).unwrap())
    });
    let fock = build_state(OracleState::Fock(4), 40).unwrap();
    let ax = square_axis(10.0, 201);
    g.bench_function("wigner_reconstruct_fock4_201", |b| b.iter(|| wigner_reconstruct(black_box(&fock), ax, ax).unwrap()));
    g.finish();
}

criterion_group!(benches, povm_eval, conditioning, oracle);
criterion_main!(benches);
