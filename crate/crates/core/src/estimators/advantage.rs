use crate::critics::{nstep_returns, HistoryValueCritic, StateValueCritic};
use crate::error::{contract, Error, Result};
use crate::joint::{JointActionSpace, DEFAULT_JOINT_CAP};
use crate::trainer::Episode;

use super::PolicyDistribution;

/// Per-action advantages of one agent at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageVector {
    pub agent: usize,
    pub values: Vec<f64>,
}

impl AdvantageVector {
    pub fn taken(&self, action: usize) -> f64 {
        self.values[action]
    }

    /// `sum_a pi(a) A(a)`, zero for a proper baseline.
    pub fn expectation(&self, policy: &PolicyDistribution) -> f64 {
        self.values.iter().zip(policy.probs()).map(|(a, p)| a * p).sum()
    }
}

fn expected(values: &[f64], policy: &PolicyDistribution) -> f64 {
    values.iter().zip(policy.probs()).map(|(v, p)| v * p).sum()
}

/// Local advantage `Q_loc(x, a) - sum_b pi(b) Q_loc(x, b)` from one local
/// critic row.
pub fn rola_advantage(q_local: &[f64], policy: &PolicyDistribution, agent: usize) -> Result<AdvantageVector> {
    if q_local.len() != policy.len() {
        return contract(format!(
            "local critic has {} actions, policy has {}",
            q_local.len(),
            policy.len()
        ));
    }
    let baseline = expected(q_local, policy);
    Ok(AdvantageVector {
        agent,
        values: q_local.iter().map(|q| q - baseline).collect(),
    })
}

/// Counterfactual advantage of the taken joint action for `agent`, with
/// teammates' actions held fixed. `q_joint` is one centralized critic row.
pub fn coma_advantage(
    q_joint: &[f64],
    space: &JointActionSpace,
    joint_action: &[usize],
    agent: usize,
    policy: &PolicyDistribution,
) -> Result<f64> {
    if q_joint.len() != space.size() {
        return contract(format!(
            "critic row has {} entries for {} joint actions",
            q_joint.len(),
            space.size()
        ));
    }
    if agent >= space.n_agents() || policy.len() != space.counts()[agent] {
        return contract(format!("policy does not match agent {agent}'s action count"));
    }
    let taken = q_joint[space.encode(joint_action)?];
    let mut baseline = 0.0;
    for (b, p) in policy.probs().iter().enumerate() {
        baseline += p * q_joint[space.substitute(joint_action, agent, b)?];
    }
    Ok(taken - baseline)
}

/// Counterfactual advantage for every action of `agent`, marginalized exactly
/// over teammates' policies.
pub fn eca_advantage(
    q_joint: &[f64],
    space: &JointActionSpace,
    agent: usize,
    policies: &[PolicyDistribution],
) -> Result<AdvantageVector> {
    if space.size() > DEFAULT_JOINT_CAP {
        return Err(Error::Unsupported(format!(
            "{} joint actions exceed the enumeration cap of {DEFAULT_JOINT_CAP}",
            space.size()
        )));
    }
    if policies.len() != space.n_agents() {
        return contract(format!(
            "{} policies for {} agents",
            policies.len(),
            space.n_agents()
        ));
    }
    let mut values = vec![0.0; space.counts()[agent]];
    for idx in 0..space.size() {
        let joint = space.decode(idx);
        let weight: f64 = joint
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != agent)
            .map(|(j, &a)| policies[j].probs()[a])
            .product();
        if weight == 0.0 {
            continue;
        }
        values[joint[agent]] += weight * coma_advantage(q_joint, space, &joint, agent, &policies[agent])?;
    }
    Ok(AdvantageVector { agent, values })
}

fn bootstrap_values(mut values: Vec<f64>, episode: &Episode) -> Vec<f64> {
    if episode.ends_terminal() {
        if let Some(last) = values.last_mut() {
            *last = 0.0;
        }
    }
    values
}

/// `G^(n)_t - V(x_t)` per step, with the return bootstrapped by the target
/// value network.
pub fn central_v_advantage(
    critic: &StateValueCritic,
    episodes: &[Episode],
    gamma: f64,
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    episodes
        .iter()
        .map(|ep| {
            let states = ep.states();
            let target: Vec<f64> = states
                .iter()
                .map(|x| critic.target_value(x))
                .collect::<Result<_>>()?;
            let returns = nstep_returns(&ep.rewards(), &bootstrap_values(target, ep), gamma, n)?;
            returns
                .iter()
                .zip(&states)
                .map(|(g, x)| Ok(g - critic.value(x)?))
                .collect()
        })
        .collect()
}

/// As [`central_v_advantage`] with `V` conditioned on the agent's own
/// observation history.
pub fn ia2c_advantage(
    critic: &HistoryValueCritic,
    episodes: &[Episode],
    gamma: f64,
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    episodes
        .iter()
        .map(|ep| {
            let target = bootstrap_values(critic.target_values(ep)?, ep);
            let live = critic.values(ep)?;
            let returns = nstep_returns(&ep.rewards(), &target, gamma, n)?;
            Ok(returns.iter().zip(&live).map(|(g, v)| g - v).collect())
        })
        .collect()
}
