use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CheckpointKeep, Episode, EpisodeBuffer, ExperimentConfig, Learner, PassLosses, Transition};
use crate::envs::{make_env, Environment};
use crate::error::{Error, Result};
use crate::estimators::{act, epsilon_schedule, Actor};
use crate::numerics::Checkpoint;

/// Named RNG streams split from one trial seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 0,
    Env = 1,
    Explore = 2,
    Eval = 3,
    Sampling = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// One evaluation checkpoint of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub trial: usize,
    pub episode: usize,
    pub eval_mean_discounted_return: f64,
    pub epsilon: f64,
    pub centralized_critic_loss: Option<f64>,
    pub mean_local_critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
    pub wall_time: Option<f64>,
}

pub fn build_env(cfg: &ExperimentConfig) -> Result<Box<dyn Environment>> {
    make_env(cfg.env, cfg.grid_size, &cfg.payoff)
}

/// Rolls out one episode with epsilon-soft actors from fresh hidden states.
pub fn collect_episode(
    env: &mut dyn Environment,
    actors: &[Actor],
    epsilon: f64,
    env_rng: &mut dyn RngCore,
    explore_rng: &mut dyn RngCore,
) -> Result<Episode> {
    let horizon = env.spec().max_steps;
    let mut current = env.reset(env_rng);
    let mut hidden: Vec<_> = actors.iter().map(Actor::initial_state).collect();
    let mut transitions = Vec::new();
    for _ in 0..horizon {
        let mut joint = Vec::with_capacity(actors.len());
        for (i, actor) in actors.iter().enumerate() {
            let (a, h, _) = act(actor, &current.observations[i], &hidden[i], epsilon, explore_rng)?;
            joint.push(a);
            hidden[i] = h;
        }
        let next = env.step(&joint, env_rng)?;
        let terminal = next.terminal;
        transitions.push(Transition {
            state: current.state,
            observations: current.observations,
            joint_action: joint,
            reward: next.reward,
            next_state: next.state.clone(),
            next_observations: next.observations.clone(),
            terminal,
        });
        current = next;
        if terminal {
            break;
        }
    }
    Ok(Episode { transitions })
}

/// Mean discounted return of `episodes` rollouts with epsilon = 0 (actions
/// sampled from each actor's softmax).
pub fn evaluate(
    actors: &[Actor],
    env: &mut dyn Environment,
    episodes: usize,
    gamma: f64,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if episodes == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut action_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
        let ep = collect_episode(env, actors, 0.0, rng, &mut action_rng)?;
        total += ep.discounted_return(gamma);
    }
    Ok(total / episodes as f64)
}

/// Everything a finished trial produced.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub rows: Vec<MetricsRow>,
    pub learner: Learner,
    pub episodes_trained_on: usize,
    pub training_passes: usize,
}

/// Where a trial streams its metrics and checkpoints.
#[derive(Debug, Clone)]
pub struct TrialSink {
    pub metrics_csv: PathBuf,
    pub checkpoint_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub trial: usize,
    pub episode: usize,
    pub eval_mean_discounted_return: f64,
    pub config: ExperimentConfig,
}

impl CheckpointMeta {
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        toml::from_str(&ckpt.metadata).map_err(|e| Error::Checkpoint(format!("bad metadata: {e}")))
    }
}

fn snapshot(learner: &Learner, meta: &CheckpointMeta) -> Result<Checkpoint> {
    let text = toml::to_string(meta).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut ckpt = Checkpoint::new(text);
    learner.add_to_checkpoint(&mut ckpt);
    Ok(ckpt)
}

/// Runs one trial without writing anything.
pub fn run_trial(cfg: &ExperimentConfig, trial_seed: u64) -> Result<TrialOutcome> {
    run_trial_with(cfg, 0, trial_seed, None, true)
}

/// State visible to a trial observer after each training episode.
pub struct Progress<'a> {
    /// Episodes completed so far.
    pub episodes_done: usize,
    pub episode: &'a Episode,
    /// Buffer generation the episode was stored under.
    pub generation: u64,
    pub trained: bool,
    pub synced: bool,
    pub buffer: &'a EpisodeBuffer,
    pub learner: &'a Learner,
}

/// One trial of the training loop.
///
/// Per episode: roll out, store. Every `episodes_per_train` episodes: one
/// training pass, then the buffer is cleared. Every `target_update_freq`
/// episodes: sync targets. Every `eval_interval` episodes: evaluate on the
/// dedicated stream and record a row. With `evaluation` off, rows are still
/// recorded but carry a NaN return.
pub fn run_trial_with(
    cfg: &ExperimentConfig,
    trial: usize,
    trial_seed: u64,
    sink: Option<&TrialSink>,
    evaluation: bool,
) -> Result<TrialOutcome> {
    run_trial_observed(cfg, trial, trial_seed, sink, evaluation, None)
}

/// `run_trial_with` plus a callback invoked after every training episode.
pub fn run_trial_observed(
    cfg: &ExperimentConfig,
    trial: usize,
    trial_seed: u64,
    sink: Option<&TrialSink>,
    evaluation: bool,
    mut observer: Option<&mut dyn FnMut(&Progress)>,
) -> Result<TrialOutcome> {
    cfg.validate()?;
    let mut env = build_env(cfg)?;
    let mut eval_env = build_env(cfg)?;
    let spec = env.spec().clone();
    let mut init_rng = stream_rng(trial_seed, Stream::Init);
    let mut env_rng = stream_rng(trial_seed, Stream::Env);
    let mut explore_rng = stream_rng(trial_seed, Stream::Explore);
    let mut eval_rng = stream_rng(trial_seed, Stream::Eval);
    let mut sampling_rng = stream_rng(trial_seed, Stream::Sampling);
    let mut learner = Learner::new(cfg, &spec, &mut init_rng)?;

    let mut writer = match sink {
        Some(s) => {
            if let Some(dir) = s.metrics_csv.parent() {
                std::fs::create_dir_all(dir)?;
            }
            Some(csv::Writer::from_writer(File::create(&s.metrics_csv)?))
        }
        None => None,
    };
    let started = Instant::now();
    let mut buffer = EpisodeBuffer::new();
    let mut losses = PassLosses::default();
    let mut rows = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut trained_on = 0;
    let mut passes = 0;

    for episode in 0..cfg.training_episodes {
        let epsilon = epsilon_schedule(episode, cfg.eps_start, cfg.eps_end, cfg.eps_decay_episodes);
        let ep = collect_episode(env.as_mut(), &learner.actors, epsilon, &mut env_rng, &mut explore_rng)?;
        let observed = observer.is_some().then(|| ep.clone());
        let generation = buffer.generation();
        buffer.push(ep);
        let done = episode + 1;
        let trained = done % cfg.episodes_per_train == 0;
        let synced = done % cfg.target_update_freq == 0;
        if trained {
            match learner.train(buffer.episodes(), cfg, &mut sampling_rng) {
                Ok(l) => losses = l,
                Err(e) => {
                    if let Some(s) = sink {
                        let meta = CheckpointMeta {
                            trial,
                            episode: done,
                            eval_mean_discounted_return: f64::NAN,
                            config: cfg.clone(),
                        };
                        std::fs::create_dir_all(&s.checkpoint_dir)?;
                        snapshot(&learner, &meta)?.save(&s.checkpoint_dir.join("diagnostic.ckpt"))?;
                    }
                    return Err(e);
                }
            }
            trained_on += buffer.len();
            passes += 1;
            buffer.clear();
        }
        if synced {
            learner.sync_targets()?;
        }
        if let (Some(f), Some(ep)) = (observer.as_mut(), observed.as_ref()) {
            f(&Progress {
                episodes_done: done,
                episode: ep,
                generation,
                trained,
                synced,
                buffer: &buffer,
                learner: &learner,
            });
        }
        if done % cfg.eval_interval == 0 {
            let ret = if evaluation {
                evaluate(&learner.actors, eval_env.as_mut(), cfg.eval_episodes, cfg.gamma, &mut eval_rng)?
            } else {
                f64::NAN
            };
            let row = MetricsRow {
                trial,
                episode: done,
                eval_mean_discounted_return: ret,
                epsilon: epsilon_schedule(done, cfg.eps_start, cfg.eps_end, cfg.eps_decay_episodes),
                centralized_critic_loss: losses.centralized_critic,
                mean_local_critic_loss: losses.mean_local_critic,
                actor_loss: losses.actor,
                wall_time: cfg.record_wall_time.then(|| started.elapsed().as_secs_f64()),
            };
            if let Some(w) = writer.as_mut() {
                w.serialize(&row)?;
                w.flush()?;
            }
            if let Some(s) = sink {
                write_checkpoints(cfg, &learner, &row, &mut best, &s.checkpoint_dir)?;
            }
            rows.push(row);
        }
    }
    if let Some(w) = writer.as_mut() {
        w.flush()?;
    }
    Ok(TrialOutcome {
        rows,
        learner,
        episodes_trained_on: trained_on,
        training_passes: passes,
    })
}

fn write_checkpoints(cfg: &ExperimentConfig, learner: &Learner, row: &MetricsRow, best: &mut f64, dir: &Path) -> Result<()> {
    let keep = cfg.checkpoints;
    if keep == CheckpointKeep::None {
        return Ok(());
    }
    std::fs::create_dir_all(dir)?;
    let meta = CheckpointMeta {
        trial: row.trial,
        episode: row.episode,
        eval_mean_discounted_return: row.eval_mean_discounted_return,
        config: cfg.clone(),
    };
    let ckpt = snapshot(learner, &meta)?;
    if matches!(keep, CheckpointKeep::Last | CheckpointKeep::LastAndBest) {
        ckpt.save(&dir.join("last.ckpt"))?;
    }
    if matches!(keep, CheckpointKeep::Best | CheckpointKeep::LastAndBest) && row.eval_mean_discounted_return > *best {
        *best = row.eval_mean_discounted_return;
        ckpt.save(&dir.join("best.ckpt"))?;
    }
    if keep == CheckpointKeep::All {
        ckpt.save(&dir.join(format!("episode_{:08}.ckpt", row.episode)))?;
    }
    Ok(())
}

/// Loads a checkpoint and evaluates its actors for `episodes` episodes on the
/// eval stream of the checkpoint's base seed.
pub fn evaluate_checkpoint(path: &Path, episodes: usize) -> Result<f64> {
    let ckpt = Checkpoint::load(path)?;
    let meta = CheckpointMeta::from_checkpoint(&ckpt)?;
    let cfg = meta.config;
    let mut env = build_env(&cfg)?;
    let spec = env.spec().clone();
    let mut learner = Learner::new(&cfg, &spec, &mut stream_rng(cfg.seed, Stream::Init))?;
    learner.restore_actors(&ckpt)?;
    evaluate(&learner.actors, env.as_mut(), episodes, cfg.gamma, &mut stream_rng(cfg.seed, Stream::Eval))
}
