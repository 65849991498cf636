//! Dec-POMDP environments: Capture Target, Box Pushing and a one-step
//! cooperative matrix game.
//!
//! Every environment returns a team-shared scalar reward, a global state
//! vector (the centralized critics' input) and one observation vector per
//! agent. Reaching the horizon sets `terminal`.

mod box_pushing;
mod capture_target;
mod matrix_game;
mod trace;

use std::hash::Hash;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use box_pushing::{box_pushing_optimal_return, BoxPushing, BoxPushingState, Heading, Pose};
pub use capture_target::{CaptureTarget, CaptureTargetState, Cell};
pub use matrix_game::MatrixGame;
pub use trace::{record_episode, write_trace, TraceRecord};

/// Capture Target action indices.
pub mod capture_actions {
    pub use super::capture_target::{DOWN, LEFT, RIGHT, STAY, UP};
}

/// Box Pushing action indices.
pub mod box_actions {
    pub use super::box_pushing::{FORWARD, STAY, TURN_LEFT, TURN_RIGHT};
}

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub name: String,
    pub n_agents: usize,
    pub action_counts: Vec<usize>,
    pub obs_dims: Vec<usize>,
    pub state_dim: usize,
    /// Horizon `h`.
    pub max_steps: usize,
}

impl EnvSpec {
    pub fn joint_action_count(&self) -> usize {
        self.action_counts.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: Vec<f64>,
    pub observations: Vec<Vec<f64>>,
    pub reward: f64,
    pub terminal: bool,
    pub info: Option<String>,
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    fn reset(&mut self, rng: &mut dyn RngCore) -> StepResult;

    /// Advances one step. Invalid action indices are a contract violation.
    fn step(&mut self, joint_action: &[usize], rng: &mut dyn RngCore) -> Result<StepResult>;
}

/// One possible outcome of a transition, with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<S> {
    pub prob: f64,
    pub next: S,
    pub reward: f64,
    pub terminal: bool,
}

/// Test-mode view exposing exact transition distributions over a finite
/// state space. Used only by the exact oracles.
pub trait EnumerableEnv {
    type State: Clone + Eq + Hash + Ord + std::fmt::Debug;

    fn action_counts(&self) -> Vec<usize>;
    fn states(&self) -> Vec<Self::State>;
    fn outcomes(&self, state: &Self::State, joint_action: &[usize]) -> Vec<Outcome<Self::State>>;
}

pub(crate) fn check_actions(spec: &EnvSpec, joint_action: &[usize]) -> Result<()> {
    if joint_action.len() != spec.n_agents {
        return crate::error::contract(format!(
            "{}: expected {} actions, got {}",
            spec.name,
            spec.n_agents,
            joint_action.len()
        ));
    }
    for (i, (&a, &n)) in joint_action.iter().zip(&spec.action_counts).enumerate() {
        if a >= n {
            return crate::error::contract(format!(
                "{}: agent {i} action {a} out of range 0..{n}",
                spec.name
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    CaptureTarget,
    BoxPushing,
    MatrixGame,
}

impl EnvKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::CaptureTarget => "capture_target",
            EnvKind::BoxPushing => "box_pushing",
            EnvKind::MatrixGame => "matrix_game",
        }
    }
}

/// Builds an environment from its kind, grid size and (for the matrix game) payoff.
pub fn make_env(
    kind: EnvKind,
    grid_size: usize,
    payoff: &[Vec<f64>],
) -> Result<Box<dyn Environment>> {
    Ok(match kind {
        EnvKind::CaptureTarget => Box::new(CaptureTarget::new(grid_size)?),
        EnvKind::BoxPushing => Box::new(BoxPushing::new(grid_size)?),
        EnvKind::MatrixGame => Box::new(MatrixGame::new(payoff.to_vec())?),
    })
}
