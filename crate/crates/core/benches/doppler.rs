//! Two-atom Doppler average over 4000 velocity pairs: rayon map against the
//! sequential map. With `--no-default-features` both run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rydsim_core::par::{map_range, map_range_seq, pairwise_sum};
use rydsim_core::physparams::{AtomSystem, LaserDrive, VaporParams};
use rydsim_core::thermal::{McConfig, VelocitySamples};
use rydsim_core::twoatom::{shell_pair_population, Pairing};

const SAMPLES: usize = 4000;

fn setup() -> (LaserDrive, AtomSystem, VelocitySamples) {
    let atom = AtomSystem::rubidium();
    let drive = LaserDrive::new(400.0, 5.0, 1250.0, -350.0).unwrap();
    let vapor = VaporParams::new(3e13, 400.0, atom.mass).unwrap();
    let samples = VelocitySamples::draw(vapor.v_p(), &McConfig::new(SAMPLES, 7)).unwrap();
    (drive, atom, samples)
}

fn doppler_average(c: &mut Criterion) {
    let (drive, atom, samples) = setup();
    let pop = |i: usize| {
        shell_pair_population(&drive, &atom, Pairing::Mixed, samples.v1[i], samples.v2[i], 1e5, true).unwrap_or(0.0)
    };
    let mut group = c.benchmark_group("two_atom_doppler_average");
    group.sample_size(20);
    group.bench_function("parallel", |b| b.iter(|| black_box(pairwise_sum(&map_range(SAMPLES, pop)))));
    group.bench_function("sequential", |b| b.iter(|| black_box(pairwise_sum(&map_range_seq(SAMPLES, pop)))));
    group.finish();
}

criterion_group!(benches, doppler_average);
criterion_main!(benches);
