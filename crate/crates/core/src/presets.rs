//! Named experiment configurations for the benchmark domains.

use crate::envs::EnvKind;
use crate::error::{Error, Result};
use crate::trainer::{Algorithm, CheckpointKeep, ExperimentConfig};

/// Domains with published hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Capture6,
    Capture8,
    BoxPush6,
    BoxPush10,
}

impl Domain {
    pub const ALL: [Domain; 4] = [Domain::Capture6, Domain::Capture8, Domain::BoxPush6, Domain::BoxPush10];

    pub fn slug(self) -> &'static str {
        match self {
            Domain::Capture6 => "capture-6x6",
            Domain::Capture8 => "capture-8x8",
            Domain::BoxPush6 => "boxpush-6x6",
            Domain::BoxPush10 => "boxpush-10x10",
        }
    }

    fn env(self) -> (EnvKind, usize) {
        match self {
            Domain::Capture6 => (EnvKind::CaptureTarget, 6),
            Domain::Capture8 => (EnvKind::CaptureTarget, 8),
            Domain::BoxPush6 => (EnvKind::BoxPushing, 6),
            Domain::BoxPush10 => (EnvKind::BoxPushing, 10),
        }
    }

    /// (training episodes, eps_end, eps_decay episodes)
    fn schedule(self) -> (usize, f64, usize) {
        match self {
            Domain::Capture6 => (100_000, 0.05, 15_000),
            Domain::Capture8 => (200_000, 0.05, 15_000),
            Domain::BoxPush6 => (4_000, 0.01, 2_000),
            Domain::BoxPush10 => (4_000, 0.01, 4_000),
        }
    }
}

/// One published column: learning rates, episodes per train, target period,
/// n-step, centralized and local update counts, lambda. `None` is N/A.
#[derive(Debug, Clone, Copy)]
struct Column {
    actor_lr: f64,
    critic_lr: f64,
    episodes_per_train: usize,
    target_update_freq: usize,
    n_step: Option<usize>,
    central: Option<usize>,
    local: Option<usize>,
    lambda: Option<f64>,
}

const fn col(
    actor_lr: f64,
    critic_lr: f64,
    episodes_per_train: usize,
    target_update_freq: usize,
    n_step: Option<usize>,
    central: Option<usize>,
    local: Option<usize>,
    lambda: Option<f64>,
) -> Column {
    Column {
        actor_lr,
        critic_lr,
        episodes_per_train,
        target_update_freq,
        n_step,
        central,
        local,
        lambda,
    }
}

fn column(alg: Algorithm, domain: Domain) -> Column {
    use Algorithm::*;
    use Domain::*;
    match (alg, domain) {
        (Rola | Eca, Capture6) => col(5e-4, 5e-4, 2, 16, Some(3), Some(1), Some(1), None),
        (Coma, Capture6) => col(5e-4, 1e-3, 8, 32, None, Some(1), None, Some(0.3)),
        (CentralV, Capture6) => col(3e-4, 3e-3, 8, 16, Some(1), Some(1), None, None),
        (Ia2c, Capture6) => col(5e-4, 5e-4, 2, 32, Some(1), None, Some(1), None),

        (Rola | Eca, Capture8) => col(5e-4, 5e-4, 2, 64, Some(3), Some(1), Some(1), None),
        (Coma, Capture8) => col(5e-4, 1e-3, 8, 64, None, Some(1), None, Some(0.3)),
        (CentralV, Capture8) => col(3e-4, 3e-3, 8, 16, Some(1), Some(1), None, None),
        (Ia2c, Capture8) => col(5e-4, 5e-4, 8, 64, Some(1), None, Some(1), None),

        (Rola | Eca, BoxPush6) => col(1e-3, 3e-3, 2, 32, Some(3), Some(1), Some(4), None),
        (Coma, BoxPush6) => col(1e-3, 3e-3, 8, 16, None, Some(1), None, Some(0.4)),
        (CentralV, BoxPush6) => col(1e-3, 5e-3, 2, 64, Some(3), Some(1), None, None),
        (Ia2c, BoxPush6) => col(1e-3, 5e-3, 2, 32, Some(5), None, Some(1), None),

        (Rola | Eca, BoxPush10) => col(5e-4, 1e-3, 2, 16, Some(1), Some(1), Some(4), None),
        (Coma, BoxPush10) => col(3e-4, 3e-3, 8, 16, None, Some(1), None, Some(0.4)),
        (CentralV, BoxPush10) => col(5e-4, 5e-4, 4, 16, Some(1), Some(1), None, None),
        (Ia2c, BoxPush10) => col(1e-3, 3e-3, 2, 64, Some(5), None, Some(1), None),
    }
}

/// Preset name prefix for an algorithm (`central-v`, not `central_v`).
pub fn algorithm_slug(alg: Algorithm) -> &'static str {
    match alg {
        Algorithm::Rola => "rola",
        Algorithm::Ia2c => "ia2c",
        Algorithm::CentralV => "central-v",
        Algorithm::Coma => "coma",
        Algorithm::Eca => "eca",
    }
}

const PUBLISHED_TRIALS: usize = 20;
const MATRIX_SLUG: &str = "matrix-2x2";

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub config: ExperimentConfig,
}

fn base(alg: Algorithm, env: EnvKind, grid_size: usize) -> ExperimentConfig {
    ExperimentConfig {
        env,
        grid_size,
        payoff: Vec::new(),
        algorithm: alg,
        gamma: 0.99,
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        episodes_per_train: 1,
        target_update_freq: 1,
        n_step: None,
        lambda: None,
        num_local_critic_updates: None,
        num_centralized_critic_updates: None,
        eps_start: 1.0,
        eps_end: 0.05,
        eps_decay_episodes: 1,
        training_episodes: 0,
        eval_interval: 100,
        eval_episodes: 10,
        trials: PUBLISHED_TRIALS,
        seed: 0,
        output: None,
        hidden_units: 64,
        max_grad_norm: 10.0,
        entropy_weight: 0.0,
        softmax_temperature: 1.0,
        checkpoints: CheckpointKeep::LastAndBest,
        record_wall_time: false,
        note: None,
    }
}

fn domain_preset(alg: Algorithm, domain: Domain) -> Preset {
    let (env, grid) = domain.env();
    let (episodes, eps_end, decay) = domain.schedule();
    let c = column(alg, domain);
    let mut cfg = base(alg, env, grid);
    cfg.actor_lr = c.actor_lr;
    cfg.critic_lr = c.critic_lr;
    cfg.episodes_per_train = c.episodes_per_train;
    cfg.target_update_freq = c.target_update_freq;
    cfg.n_step = c.n_step;
    cfg.lambda = c.lambda;
    cfg.num_centralized_critic_updates = c.central;
    cfg.num_local_critic_updates = c.local;
    cfg.eps_end = eps_end;
    cfg.eps_decay_episodes = decay;
    cfg.training_episodes = episodes;
    cfg.note = Some(if alg == Algorithm::Eca {
        format!("published {} table has no ECA column; copied from the ROLA column", domain.slug())
    } else {
        format!("published {} table, {} column", domain.slug(), algorithm_slug(alg))
    });
    Preset {
        name: format!("{}-{}", algorithm_slug(alg), domain.slug()),
        config: cfg,
    }
}

/// Identity-payoff 2x2 matrix game. Not a published configuration; tuned
/// for quick smoke runs and the matrix learning check.
fn matrix_preset(alg: Algorithm) -> Preset {
    let mut cfg = base(alg, EnvKind::MatrixGame, 0);
    cfg.payoff = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    cfg.actor_lr = 1e-2;
    cfg.critic_lr = 1e-2;
    cfg.episodes_per_train = 2;
    cfg.target_update_freq = 8;
    cfg.eps_end = 0.05;
    cfg.eps_decay_episodes = 500;
    cfg.training_episodes = 2_000;
    cfg.trials = 5;
    cfg.hidden_units = 16;
    match alg {
        Algorithm::Rola | Algorithm::Eca => {
            cfg.n_step = Some(1);
            cfg.num_centralized_critic_updates = Some(1);
            cfg.num_local_critic_updates = Some(1);
        }
        Algorithm::Coma => {
            cfg.lambda = Some(0.0);
            cfg.num_centralized_critic_updates = Some(1);
        }
        Algorithm::CentralV => {
            cfg.n_step = Some(1);
            cfg.num_centralized_critic_updates = Some(1);
        }
        Algorithm::Ia2c => {
            cfg.n_step = Some(1);
            cfg.num_local_critic_updates = Some(1);
        }
    }
    cfg.note = Some("not a published configuration; chosen for the 2x2 identity matrix game".into());
    Preset {
        name: format!("{}-{MATRIX_SLUG}", algorithm_slug(alg)),
        config: cfg,
    }
}

/// Every shipped preset: the published domain columns for each algorithm,
/// then the matrix-game presets.
pub fn presets() -> Vec<Preset> {
    let mut out = Vec::new();
    for domain in Domain::ALL {
        for alg in Algorithm::ALL {
            out.push(domain_preset(alg, domain));
        }
    }
    out.extend(Algorithm::ALL.into_iter().map(matrix_preset));
    out
}

pub fn preset_names() -> Vec<String> {
    presets().into_iter().map(|p| p.name).collect()
}

/// Looks a preset up by name; unknown names list the valid ones.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`; valid presets: {}", preset_names().join(", "))))
}
