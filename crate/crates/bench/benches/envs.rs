use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rola_bench::{boxpush_config, capture_episodes};
use rola_core::envs::{make_env, EnvKind};
use rola_core::trainer::{build_env, stream_rng, Algorithm, Learner, Stream};

fn stepping(c: &mut Criterion) {
    for (name, kind, size) in [
        ("capture_target_6x6_step", EnvKind::CaptureTarget, 6),
        ("box_pushing_6x6_step", EnvKind::BoxPushing, 6),
    ] {
        let mut env = make_env(kind, size, &[]).unwrap();
        let mut rng = stream_rng(3, Stream::Env);
        env.reset(&mut rng);
        c.bench_function(name, |b| {
            b.iter(|| {
                let r = env.step(black_box(&[0, 3]), &mut rng).unwrap();
                if r.terminal {
                    env.reset(&mut rng);
                }
            })
        });
    }
    c.bench_function("capture_target_6x6_episode_uniform", |b| b.iter(|| capture_episodes(1, 4)));
}

fn training_pass(c: &mut Criterion) {
    let episodes = capture_episodes(2, 5);
    for alg in [Algorithm::Rola, Algorithm::CentralV, Algorithm::Coma] {
        let mut cfg = boxpush_config(alg);
        cfg.env = EnvKind::CaptureTarget;
        let spec = build_env(&cfg).unwrap().spec().clone();
        let learner = Learner::new(&cfg, &spec, &mut stream_rng(6, Stream::Init)).unwrap();
        let mut rng = stream_rng(6, Stream::Sampling);
        c.bench_function(&format!("train_pass_{}_capture_2_episodes", alg.as_str()), |b| {
            b.iter_batched(
                || learner.clone(),
                |mut l| l.train(&episodes, &cfg, &mut rng).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = stepping, training_pass
}
criterion_main!(benches);
