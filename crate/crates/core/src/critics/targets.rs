use rand::RngCore;

use super::{lambda_return, nstep_returns, CentralizedCritic, HistoryValueCritic, LocalCritic, StateValueCritic};
use crate::error::{contract, Error, Result};
use crate::estimators::Actor;
use crate::joint::DEFAULT_JOINT_CAP;
use crate::numerics::{sample_categorical, softmax};
use crate::trainer::Episode;

/// Regression targets, one per transition, grouped by episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TdTargetBatch {
    pub per_episode: Vec<Vec<f64>>,
}

impl TdTargetBatch {
    pub fn len(&self) -> usize {
        self.per_episode.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_episode.iter().flatten().copied()
    }
}

fn require_episodes(episodes: &[Episode]) -> Result<()> {
    if episodes.is_empty() || episodes.iter().any(Episode::is_empty) {
        return contract("TD targets need a non-empty buffer of non-empty episodes");
    }
    Ok(())
}

/// Softmax over all joint actions of one centralized critic row.
pub fn joint_action_distribution(q_joint: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if q_joint.len() > DEFAULT_JOINT_CAP {
        return Err(Error::Unsupported(format!(
            "{} joint actions exceed the enumeration cap of {DEFAULT_JOINT_CAP}",
            q_joint.len()
        )));
    }
    if !(temperature > 0.0) {
        return contract(format!("softmax temperature must be positive, got {temperature}"));
    }
    Ok(softmax(q_joint, temperature))
}

/// Draws a joint next action from `softmax(Q_phi(x, .) / temperature)`.
pub fn sample_joint_action(
    central: &CentralizedCritic,
    state: &[f64],
    temperature: f64,
    rng: &mut dyn RngCore,
) -> Result<Vec<usize>> {
    let probs = joint_action_distribution(&central.q_values(state)?, temperature)?;
    Ok(central.space().decode(sample_categorical(&probs, rng)))
}

/// Joint actions sampled from the target policies along the episode, one per
/// state `x_1 ..= x_T` (index 0 is left empty).
fn target_policy_samples(target_actors: &[Actor], ep: &Episode, rng: &mut dyn RngCore) -> Result<Vec<Vec<usize>>> {
    let policies = target_actors
        .iter()
        .enumerate()
        .map(|(i, actor)| actor.policies(&ep.observations(i)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new()];
    for u in 1..=ep.len() {
        out.push(
            policies
                .iter()
                .map(|p| sample_categorical(p[u].probs(), rng))
                .collect(),
        );
    }
    Ok(out)
}

/// Fills `values[1..=T]` with `f(u)`, leaving `values[T] = 0` after a terminal step.
fn bootstrap<F>(ep: &Episode, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(usize) -> Result<f64>,
{
    let len = ep.len();
    let mut values = vec![0.0; len + 1];
    for (u, v) in values.iter_mut().enumerate().skip(1) {
        if u == len && ep.ends_terminal() {
            break;
        }
        *v = f(u)?;
    }
    Ok(values)
}

/// n-step targets for the centralized critic, bootstrapped with the target
/// critic at a joint action sampled from the target policies.
pub fn centralized_td_target(
    episodes: &[Episode],
    critic: &CentralizedCritic,
    target_actors: &[Actor],
    gamma: f64,
    n_step: usize,
    rng: &mut dyn RngCore,
) -> Result<TdTargetBatch> {
    require_episodes(episodes)?;
    let space = critic.space();
    let per_episode = episodes
        .iter()
        .map(|ep| {
            let samples = target_policy_samples(target_actors, ep, rng)?;
            let states = ep.states();
            let values = bootstrap(ep, |u| Ok(critic.target_q_values(states[u])?[space.encode(&samples[u])?]))?;
            nstep_returns(&ep.rewards(), &values, gamma, n_step)
        })
        .collect::<Result<_>>()?;
    Ok(TdTargetBatch { per_episode })
}

/// n-step targets for agent `critic.agent()`'s local critic. At each bootstrap
/// state a joint action is drawn from the softmax of the live centralized
/// critic and the agent's own component indexes the target local critic.
pub fn local_td_target(
    episodes: &[Episode],
    critic: &LocalCritic,
    central: &CentralizedCritic,
    gamma: f64,
    n_step: usize,
    temperature: f64,
    rng: &mut dyn RngCore,
) -> Result<TdTargetBatch> {
    require_episodes(episodes)?;
    let agent = critic.agent();
    let per_episode = episodes
        .iter()
        .map(|ep| {
            let states = ep.states();
            let values = bootstrap(ep, |u| {
                let joint = sample_joint_action(central, states[u], temperature, rng)?;
                Ok(critic.target_q_values(states[u])?[joint[agent]])
            })?;
            nstep_returns(&ep.rewards(), &values, gamma, n_step)
        })
        .collect::<Result<_>>()?;
    Ok(TdTargetBatch { per_episode })
}

/// TD(lambda) targets for the centralized critic. Intermediate values use the
/// target critic at the joint action actually taken; a truncated final state
/// is bootstrapped at a target-policy sample.
pub fn centralized_lambda_target(
    episodes: &[Episode],
    critic: &CentralizedCritic,
    target_actors: &[Actor],
    gamma: f64,
    lambda: f64,
    rng: &mut dyn RngCore,
) -> Result<TdTargetBatch> {
    require_episodes(episodes)?;
    let space = critic.space();
    let per_episode = episodes
        .iter()
        .map(|ep| {
            let states = ep.states();
            let len = ep.len();
            let final_sample = if ep.ends_terminal() {
                None
            } else {
                target_policy_samples(target_actors, ep, rng)?.pop()
            };
            let values = bootstrap(ep, |u| {
                let joint = if u < len {
                    &ep.transitions[u].joint_action
                } else {
                    final_sample.as_ref().expect("sampled for truncated episodes")
                };
                Ok(critic.target_q_values(states[u])?[space.encode(joint)?])
            })?;
            lambda_return(&ep.rewards(), &values, gamma, lambda)
        })
        .collect::<Result<_>>()?;
    Ok(TdTargetBatch { per_episode })
}

/// n-step targets for a state-value critic, bootstrapped by its target network.
pub fn state_value_target(
    episodes: &[Episode],
    critic: &StateValueCritic,
    gamma: f64,
    n_step: usize,
) -> Result<TdTargetBatch> {
    require_episodes(episodes)?;
    let per_episode = episodes
        .iter()
        .map(|ep| {
            let states = ep.states();
            let values = bootstrap(ep, |u| critic.target_value(states[u]))?;
            nstep_returns(&ep.rewards(), &values, gamma, n_step)
        })
        .collect::<Result<_>>()?;
    Ok(TdTargetBatch { per_episode })
}

/// n-step targets for a history-value critic, bootstrapped by its target network.
pub fn history_value_target(
    episodes: &[Episode],
    critic: &HistoryValueCritic,
    gamma: f64,
    n_step: usize,
) -> Result<TdTargetBatch> {
    require_episodes(episodes)?;
    let per_episode = episodes
        .iter()
        .map(|ep| {
            let target = critic.target_values(ep)?;
            let values = bootstrap(ep, |u| Ok(target[u]))?;
            nstep_returns(&ep.rewards(), &values, gamma, n_step)
        })
        .collect::<Result<_>>()?;
    Ok(TdTargetBatch { per_episode })
}
