//! Fixtures shared by the criterion benches.

use rola_core::envs::{make_env, EnvKind};
use rola_core::estimators::Actor;
use rola_core::presets::{algorithm_slug, preset};
use rola_core::trainer::{collect_episode, stream_rng, Algorithm, Episode, ExperimentConfig, Stream};

/// `count` Capture Target 6x6 episodes played by untrained actors with
/// uniform exploration.
pub fn capture_episodes(count: usize, seed: u64) -> Vec<Episode> {
    let mut env = make_env(EnvKind::CaptureTarget, 6, &[]).expect("capture target");
    let mut init = stream_rng(seed, Stream::Init);
    let actors: Vec<Actor> = (0..2).map(|_| Actor::new(5, 64, 5, &mut init)).collect();
    let mut env_rng = stream_rng(seed, Stream::Env);
    let mut explore = stream_rng(seed, Stream::Explore);
    (0..count)
        .map(|_| collect_episode(env.as_mut(), &actors, 1.0, &mut env_rng, &mut explore).expect("episode"))
        .collect()
}

/// The published Box Pushing 6x6 configuration for `alg`.
pub fn boxpush_config(alg: Algorithm) -> ExperimentConfig {
    preset(&format!("{}-boxpush-6x6", algorithm_slug(alg))).expect("shipped preset")
}
