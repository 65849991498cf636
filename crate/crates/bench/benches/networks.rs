use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rola_core::numerics::{Adam, AdamConfig, Mlp, Parameterized, RecurrentNet};
use rola_core::trainer::{stream_rng, Stream};

fn mlp(c: &mut Criterion) {
    let mut rng = stream_rng(1, Stream::Init);
    let mut net = Mlp::new(&[7, 64, 64, 25], &mut rng);
    let x = [0.1, 0.5, 0.3, 0.2, 0.8, 0.0, 0.4];
    c.bench_function("mlp_forward_7x64x64x25", |b| b.iter(|| net.forward(black_box(&x)).unwrap()));
    let grad = vec![0.01; 25];
    c.bench_function("mlp_forward_backward_7x64x64x25", |b| {
        b.iter(|| {
            net.zero_grad();
            net.forward_train(black_box(&x)).unwrap();
            net.backward(black_box(&grad)).unwrap();
        })
    });
    let mut opt = Adam::new(AdamConfig::with_lr(1e-3));
    c.bench_function("adam_step_mlp", |b| b.iter(|| opt.step(&mut net).unwrap()));
}

fn recurrent(c: &mut Criterion) {
    let mut rng = stream_rng(2, Stream::Init);
    let mut net = RecurrentNet::new(5, 64, 5, &mut rng);
    let obs: Vec<Vec<f64>> = (0..60).map(|t| vec![t as f64 / 60.0, 0.2, 0.0, 0.5, 1.0]).collect();
    let refs: Vec<&[f64]> = obs.iter().map(Vec::as_slice).collect();
    c.bench_function("lstm_sequence_60_steps", |b| b.iter(|| net.sequence(black_box(&refs)).unwrap()));
    let grads = vec![vec![0.01; 5]; 60];
    c.bench_function("lstm_bptt_60_steps", |b| {
        b.iter(|| {
            net.zero_grad();
            net.sequence_train(black_box(&refs)).unwrap();
            net.backward_sequence(black_box(&grads)).unwrap();
        })
    });
}

criterion_group!(benches, mlp, recurrent);
criterion_main!(benches);
