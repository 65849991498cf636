use rand::{Rng, RngCore};

use crate::error::{contract, Error, Result};
use crate::numerics::{
    sample_categorical, softmax, visit_prefixed, visit_prefixed_mut, Adam, HiddenState,
    Parameterized, RecurrentNet, Tensor,
};
use crate::trainer::Episode;

/// Action probabilities of one agent at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDistribution {
    probs: Vec<f64>,
}

impl PolicyDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return contract("empty policy distribution");
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return contract(format!("invalid probabilities {probs:?}"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return contract(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self { probs })
    }

    pub fn from_logits(logits: &[f64]) -> Self {
        Self {
            probs: softmax(logits, 1.0),
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn one_hot(n: usize, action: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[action] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Mixture with the uniform distribution: `eps / |A| + (1 - eps) pi(a)`.
    pub fn epsilon_soft(&self, epsilon: f64) -> Self {
        let n = self.probs.len() as f64;
        Self {
            probs: self
                .probs
                .iter()
                .map(|p| epsilon / n + (1.0 - epsilon) * p)
                .collect(),
        }
    }
}

/// Decentralized recurrent policy `pi_theta_i(a | tau_i)`.
#[derive(Debug, Clone)]
pub struct Actor {
    net: RecurrentNet,
}

impl Actor {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, hidden: usize, n_actions: usize, rng: &mut R) -> Self {
        Self {
            net: RecurrentNet::new(obs_dim, hidden, n_actions, rng),
        }
    }

    pub fn from_net(net: RecurrentNet) -> Self {
        Self { net }
    }

    pub fn net(&self) -> &RecurrentNet {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut RecurrentNet {
        &mut self.net
    }

    pub fn n_actions(&self) -> usize {
        self.net.out_dim()
    }

    pub fn initial_state(&self) -> HiddenState {
        self.net.initial_state()
    }

    pub fn policy(&self, obs: &[f64], state: &HiddenState) -> Result<(PolicyDistribution, HiddenState)> {
        let (logits, next) = self.net.step(obs, state)?;
        Ok((PolicyDistribution::from_logits(&logits), next))
    }

    /// Policies along an observation sequence starting from a fresh hidden state.
    pub fn policies(&self, observations: &[&[f64]]) -> Result<Vec<PolicyDistribution>> {
        Ok(self
            .net
            .sequence(observations)?
            .iter()
            .map(|l| PolicyDistribution::from_logits(l))
            .collect())
    }
}

impl Parameterized for Actor {
    fn visit(&self, f: &mut dyn FnMut(&str, &Tensor)) {
        visit_prefixed(&self.net, "actor", f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
        visit_prefixed_mut(&mut self.net, "actor", f);
    }

    fn clear_tape(&mut self) {
        self.net.clear_tape();
    }
}

/// Linear decay from `eps_start` at episode 0 to `eps_end` at `decay_episodes`.
pub fn epsilon_schedule(episode: usize, eps_start: f64, eps_end: f64, decay_episodes: usize) -> f64 {
    if episode >= decay_episodes {
        return eps_end;
    }
    let frac = episode as f64 / decay_episodes.max(1) as f64;
    eps_start + (eps_end - eps_start) * frac
}

/// Epsilon-soft action selection. Advances the hidden state once and returns
/// the action with its log-probability under the actor's own softmax.
///
/// Always consumes exactly two uniform draws so the RNG stream does not
/// depend on which branch was taken.
pub fn act(
    actor: &Actor,
    obs: &[f64],
    hidden: &HiddenState,
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> Result<(usize, HiddenState, f64)> {
    let (policy, next) = actor.policy(obs, hidden)?;
    let explore = rng.gen::<f64>() < epsilon;
    let action = if explore {
        let n = policy.len();
        ((rng.gen::<f64>() * n as f64) as usize).min(n - 1)
    } else {
        sample_categorical(policy.probs(), rng)
    };
    Ok((action, next, policy.probs()[action].ln()))
}

/// One policy-gradient step on `-mean_t[log pi(a_t | tau_t) A_t] - beta * mean_t H(pi_t)`
/// over every step of every episode for agent `agent`. The actor is unrolled
/// from a fresh hidden state per episode. Returns the surrogate loss before
/// the step.
pub fn policy_gradient_step(
    actor: &mut Actor,
    agent: usize,
    episodes: &[Episode],
    advantages: &[Vec<f64>],
    optimizer: &mut Adam,
    entropy_weight: f64,
    max_grad_norm: f64,
) -> Result<f64> {
    actor.zero_grad();
    let loss = surrogate_loss_and_grad(actor, agent, episodes, advantages, entropy_weight)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            block: format!("actor {agent}"),
            context: format!("loss = {loss}"),
        });
    }
    actor.clip_grad_norm(max_grad_norm);
    optimizer.step(actor)?;
    Ok(loss)
}

/// Evaluates the surrogate loss of [`policy_gradient_step`] and accumulates
/// its gradient into the actor without stepping.
pub fn surrogate_loss_and_grad(
    actor: &mut Actor,
    agent: usize,
    episodes: &[Episode],
    advantages: &[Vec<f64>],
    entropy_weight: f64,
) -> Result<f64> {
    if episodes.len() != advantages.len() {
        return contract(format!(
            "{} episodes but {} advantage sequences",
            episodes.len(),
            advantages.len()
        ));
    }
    let n: usize = episodes.iter().map(Episode::len).sum();
    if n == 0 {
        return contract("policy gradient on an empty batch");
    }
    let scale = 1.0 / n as f64;
    actor.clear_tape();
    let mut loss = 0.0;
    for (ep, adv) in episodes.iter().zip(advantages) {
        if adv.len() != ep.len() {
            return contract(format!("{} advantages for {} steps", adv.len(), ep.len()));
        }
        let obs = ep.observations(agent);
        let logits = actor.net.sequence_train(&obs[..ep.len()])?;
        let mut grads = Vec::with_capacity(ep.len());
        for ((z, tr), &a_t) in logits.iter().zip(&ep.transitions).zip(adv) {
            let p = softmax(z, 1.0);
            let taken = tr.joint_action[agent];
            let entropy: f64 = -p.iter().filter(|&&q| q > 0.0).map(|q| q * q.ln()).sum::<f64>();
            loss += -(p[taken].ln() * a_t) * scale - entropy_weight * entropy * scale;
            let g: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(k, &pk)| {
                    let onehot = if k == taken { 1.0 } else { 0.0 };
                    let pg = -a_t * (onehot - pk);
                    let ent = if pk > 0.0 {
                        entropy_weight * pk * (pk.ln() + entropy)
                    } else {
                        0.0
                    };
                    (pg + ent) * scale
                })
                .collect();
            grads.push(g);
        }
        actor.net.backward_sequence(&grads)?;
    }
    Ok(loss)
}
