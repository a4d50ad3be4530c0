use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

use framestamp::authstamp::{authenticate_frame, record_frames, verify_bundle, KeyPair};
use framestamp::demo;
use framestamp::game::{Game, Keymask};
use framestamp::raster::render;

fn bench_step(c: &mut Criterion) {
    let level = demo::level();
    let game = Game::new(&level);
    let state = game.initial_state();
    c.bench_function("step", |b| {
        b.iter(|| game.step(0, 0, &state, Keymask::RIGHT.bits()).unwrap())
    });
}

fn bench_render(c: &mut Criterion) {
    let level = demo::level();
    let state = Game::new(&level).initial_state();
    c.bench_function("render", |b| b.iter(|| render(&state, &level)));
}

fn bench_frame(c: &mut Criterion) {
    let level = demo::level();
    let game = Game::new(&level);
    let keys = KeyPair::from_seed(&[7; 32]);
    let state = game.initial_state();
    c.bench_function("authenticate_frame", |b| {
        b.iter(|| authenticate_frame(&game, &keys, 0, 0, &state, Keymask::RIGHT))
    });
}

fn bench_verify(c: &mut Criterion) {
    let level = demo::level();
    let keys = KeyPair::from_seed(&[7; 32]);
    let log = demo::optimal_log();
    let bundle = record_frames(&level, &log, &keys, 0, 96);
    let pk = keys.public_key();
    let mut group = c.benchmark_group("verify");
    group.throughput(Throughput::Elements(bundle.frames.len() as u64));
    group.sample_size(20);
    group.bench_function("96_frames", |b| b.iter(|| verify_bundle(&pk, &level, &bundle)));
    group.bench_function("encode_decode", |b| {
        b.iter_batched(
            || bundle.encode(),
            |bytes| framestamp::authstamp::SpeedrunBundle::decode(&bytes).unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_step, bench_render, bench_frame, bench_verify);
criterion_main!(benches);
