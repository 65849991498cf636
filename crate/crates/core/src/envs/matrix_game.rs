use rand::RngCore;

use super::{check_actions, EnumerableEnv, EnvSpec, Environment, Outcome, StepResult};
use crate::error::{contract, Result};

/// Two-agent, one-step cooperative game paying `payoff[a0][a1]` to the team.
/// State and observations are the constant vector `[1.0]`.
#[derive(Debug, Clone)]
pub struct MatrixGame {
    spec: EnvSpec,
    payoff: Vec<Vec<f64>>,
}

impl MatrixGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let rows = payoff.len();
        let cols = payoff.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return contract("matrix game payoff must be non-empty");
        }
        if payoff.iter().any(|r| r.len() != cols) {
            return contract("matrix game payoff rows must have equal length");
        }
        Ok(Self {
            spec: EnvSpec {
                name: format!("matrix_game_{rows}x{cols}"),
                n_agents: 2,
                action_counts: vec![rows, cols],
                obs_dims: vec![1, 1],
                state_dim: 1,
                max_steps: 1,
            },
            payoff,
        })
    }

    pub fn payoff(&self) -> &[Vec<f64>] {
        &self.payoff
    }

    fn result(reward: f64, terminal: bool) -> StepResult {
        StepResult {
            state: vec![1.0],
            observations: vec![vec![1.0], vec![1.0]],
            reward,
            terminal,
            info: None,
        }
    }
}

impl Environment for MatrixGame {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> StepResult {
        Self::result(0.0, false)
    }

    fn step(&mut self, joint_action: &[usize], _rng: &mut dyn RngCore) -> Result<StepResult> {
        check_actions(&self.spec, joint_action)?;
        Ok(Self::result(
            self.payoff[joint_action[0]][joint_action[1]],
            true,
        ))
    }
}

impl EnumerableEnv for MatrixGame {
    type State = ();

    fn action_counts(&self) -> Vec<usize> {
        self.spec.action_counts.clone()
    }

    fn states(&self) -> Vec<()> {
        vec![()]
    }

    fn outcomes(&self, _state: &(), joint_action: &[usize]) -> Vec<Outcome<()>> {
        vec![Outcome {
            prob: 1.0,
            next: (),
            reward: self.payoff[joint_action[0]][joint_action[1]],
            terminal: true,
        }]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn payoff_lookup() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut g = MatrixGame::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        g.reset(&mut rng);
        let r = g.step(&[0, 0], &mut rng).unwrap();
        assert_eq!((r.reward, r.terminal), (1.0, true));

        let mut h = MatrixGame::new(vec![vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(h.step(&[1, 0], &mut rng).unwrap().reward, 0.0);
        assert_eq!(h.spec().max_steps, 1);
    }

    #[test]
    fn empty_payoff_is_rejected() {
        assert!(MatrixGame::new(vec![]).is_err());
        assert!(MatrixGame::new(vec![vec![]]).is_err());
        assert!(MatrixGame::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
