use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::EnvKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rola,
    Ia2c,
    CentralV,
    Coma,
    Eca,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Rola,
        Algorithm::Ia2c,
        Algorithm::CentralV,
        Algorithm::Coma,
        Algorithm::Eca,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Rola => "rola",
            Algorithm::Ia2c => "ia2c",
            Algorithm::CentralV => "central_v",
            Algorithm::Coma => "coma",
            Algorithm::Eca => "eca",
        }
    }

    /// Whether the algorithm trains a critic over enumerated joint actions.
    pub fn uses_joint_critic(self) -> bool {
        matches!(self, Algorithm::Rola | Algorithm::Coma | Algorithm::Eca)
    }
}

/// Which evaluation-boundary parameter snapshots are written to disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointKeep {
    None,
    Last,
    Best,
    LastAndBest,
    All,
}

fn default_gamma() -> f64 {
    0.99
}
fn default_eval_interval() -> usize {
    100
}
fn default_eval_episodes() -> usize {
    10
}
fn default_one() -> usize {
    1
}
fn default_hidden() -> usize {
    64
}
fn default_clip() -> f64 {
    10.0
}
fn default_temperature() -> f64 {
    1.0
}
fn default_keep() -> CheckpointKeep {
    CheckpointKeep::LastAndBest
}

/// Everything one experiment needs. Optional fields left unset mean "not
/// applicable" for the chosen algorithm and fall back to documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    #[serde(default)]
    pub grid_size: usize,
    /// Matrix-game payoff, row player = agent 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub payoff: Vec<Vec<f64>>,
    pub algorithm: Algorithm,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Episodes collected between training passes.
    pub episodes_per_train: usize,
    /// Episodes between target-network synchronisations.
    pub target_update_freq: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_local_critic_updates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_centralized_critic_updates: Option<usize>,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_episodes: usize,
    /// Total training episodes.
    pub training_episodes: usize,
    #[serde(default = "default_eval_interval")]
    pub eval_interval: usize,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default = "default_one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_hidden")]
    pub hidden_units: usize,
    #[serde(default = "default_clip")]
    pub max_grad_norm: f64,
    #[serde(default)]
    pub entropy_weight: f64,
    #[serde(default = "default_temperature")]
    pub softmax_temperature: f64,
    #[serde(default = "default_keep")]
    pub checkpoints: CheckpointKeep,
    /// Fill the `wall_time` metrics column. Off by default so trial CSVs are
    /// byte-reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
    /// Free-form provenance note carried by presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Every key accepted in a config file or `--set` override.
pub const CONFIG_KEYS: &[&str] = &[
    "env",
    "grid_size",
    "payoff",
    "algorithm",
    "gamma",
    "actor_lr",
    "critic_lr",
    "episodes_per_train",
    "target_update_freq",
    "n_step",
    "lambda",
    "num_local_critic_updates",
    "num_centralized_critic_updates",
    "eps_start",
    "eps_end",
    "eps_decay_episodes",
    "training_episodes",
    "eval_interval",
    "eval_episodes",
    "trials",
    "seed",
    "output",
    "hidden_units",
    "max_grad_norm",
    "entropy_weight",
    "softmax_temperature",
    "checkpoints",
    "record_wall_time",
    "note",
];

const FLOAT_KEYS: &[&str] = &[
    "gamma",
    "actor_lr",
    "critic_lr",
    "lambda",
    "eps_start",
    "eps_end",
    "max_grad_norm",
    "entropy_weight",
    "softmax_temperature",
];

impl ExperimentConfig {
    pub fn n_step_or_default(&self) -> usize {
        self.n_step.unwrap_or(1)
    }

    pub fn local_updates(&self) -> usize {
        self.num_local_critic_updates.unwrap_or(1)
    }

    pub fn centralized_updates(&self) -> usize {
        self.num_centralized_critic_updates.unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("max_grad_norm", self.max_grad_norm),
            ("softmax_temperature", self.softmax_temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        for (name, v) in [
            ("episodes_per_train", self.episodes_per_train),
            ("target_update_freq", self.target_update_freq),
            ("eval_interval", self.eval_interval),
            ("eps_decay_episodes", self.eps_decay_episodes),
            ("trials", self.trials),
            ("hidden_units", self.hidden_units),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for (name, v) in [("eps_start", self.eps_start), ("eps_end", self.eps_end)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.entropy_weight < 0.0 {
            return bad(format!("entropy_weight must be non-negative, got {}", self.entropy_weight));
        }
        if self.n_step == Some(0) {
            return bad("n_step must be at least 1".into());
        }
        if let Some(l) = self.lambda {
            if !(0.0..=1.0).contains(&l) {
                return bad(format!("lambda must lie in [0, 1], got {l}"));
            }
        }
        if self.num_local_critic_updates == Some(0) || self.num_centralized_critic_updates == Some(0) {
            return bad("critic update counts must be at least 1".into());
        }
        if self.algorithm == Algorithm::Coma && self.lambda.is_none() {
            return bad("coma needs lambda for its TD(lambda) critic".into());
        }
        if self.env == EnvKind::MatrixGame && self.payoff.is_empty() {
            return bad("matrix_game needs a payoff".into());
        }
        if self.env != EnvKind::MatrixGame && self.grid_size == 0 {
            return bad(format!("{} needs grid_size", self.env.as_str()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a complete config; errors carry the offending line.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies `key=value` overrides in order. Values are read as TOML
    /// literals, falling back to a bare string (`algorithm=coma`).
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(&self.to_toml()?).map_err(|e| Error::Config(e.to_string()))?;
        for raw in overrides {
            let raw = raw.as_ref();
            let (key, value) = raw
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{raw}` is not of the form key=value")))?;
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "unknown key `{key}`; valid keys: {}",
                    CONFIG_KEYS.join(", ")
                )));
            }
            table.insert(key.to_string(), parse_value(key, value.trim()));
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("invalid override: {e}")))?;
        Ok(cfg)
    }
}

fn parse_value(key: &str, raw: &str) -> toml::Value {
    let parsed = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"));
    match parsed {
        Some(toml::Value::Integer(i)) if FLOAT_KEYS.contains(&key) => toml::Value::Float(i as f64),
        Some(v) => v,
        None => toml::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> ExperimentConfig {
        ExperimentConfig {
            env: EnvKind::CaptureTarget,
            grid_size: 6,
            payoff: Vec::new(),
            algorithm: Algorithm::Rola,
            gamma: 0.99,
            actor_lr: 5e-4,
            critic_lr: 5e-4,
            episodes_per_train: 2,
            target_update_freq: 16,
            n_step: Some(3),
            lambda: Some(0.3),
            num_local_critic_updates: Some(1),
            num_centralized_critic_updates: Some(1),
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_episodes: 15_000,
            training_episodes: 100_000,
            eval_interval: 100,
            eval_episodes: 10,
            trials: 1,
            seed: 0,
            output: Some("runs/x".into()),
            hidden_units: 64,
            max_grad_norm: 10.0,
            entropy_weight: 0.0,
            softmax_temperature: 1.0,
            checkpoints: CheckpointKeep::LastAndBest,
            record_wall_time: false,
            note: Some("n".into()),
        }
    }

    #[test]
    fn key_list_matches_struct() {
        let mut cfg = sample();
        cfg.payoff = vec![vec![1.0]];
        let table: toml::Table = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        let mut keys: Vec<&str> = table.keys().map(String::as_str).collect();
        let mut expected = CONFIG_KEYS.to_vec();
        keys.sort_unstable();
        expected.sort_unstable();
        assert_eq!(keys, expected);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = sample();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn overrides_apply_last() {
        let cfg = sample();
        let out = cfg.with_overrides(&["gamma=0.95", "algorithm=coma", "trials=3"]).unwrap();
        assert_eq!(out.gamma, 0.95);
        assert_eq!(out.algorithm, Algorithm::Coma);
        assert_eq!(out.trials, 3);
        let mut back = out.clone();
        back.gamma = cfg.gamma;
        back.algorithm = cfg.algorithm;
        back.trials = cfg.trials;
        assert_eq!(back, cfg);
        assert_eq!(cfg.with_overrides(&["gamma=1"]).unwrap().gamma, 1.0);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = sample().with_overrides(&["gama=0.9"]).unwrap_err().to_string();
        assert!(err.contains("gama") && err.contains("actor_lr"), "{err}");
        let text = sample().to_toml().unwrap() + "bogus = 1\n";
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn type_mismatch_names_the_line() {
        let text = sample().to_toml().unwrap().replace("trials = 1", "trials = \"many\"");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("trials") && err.contains("line"), "{err}");
        assert!(sample().with_overrides(&["trials=many"]).is_err());
    }

    #[test]
    fn validation() {
        assert!(sample().validate().is_ok());
        let mut c = sample();
        c.gamma = 0.0;
        assert!(c.validate().is_err());
        let mut c = sample();
        c.eval_interval = 0;
        assert!(c.validate().is_err());
        let mut c = sample();
        c.algorithm = Algorithm::Coma;
        c.lambda = None;
        assert!(c.validate().is_err());
    }
}
