use rand::Rng;

use crate::error::{contract, Error, Result};
use crate::joint::JointActionSpace;
use crate::numerics::{copy_parameters, Adam, Mlp, Parameterized, RecurrentNet};
use crate::trainer::Episode;

/// A live network together with its delayed target copy.
#[derive(Debug, Clone)]
pub struct TargetPair<N> {
    pub live: N,
    pub target: N,
}

impl<N: Parameterized + Clone> TargetPair<N> {
    pub fn new(live: N) -> Self {
        let target = live.clone();
        Self { live, target }
    }

    pub fn sync(&mut self) -> Result<()> {
        sync_targets(&self.live, &mut self.target)
    }
}

/// Copies live parameters into the target so both are bit-identical.
pub fn sync_targets<N: Parameterized + ?Sized>(live: &N, target: &mut N) -> Result<()> {
    copy_parameters(live, target)
}

fn critic_mlp<R: Rng + ?Sized>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Mlp {
    Mlp::new(&[input, hidden, hidden, output], rng)
}

/// Mean squared error between `net`'s chosen outputs and fixed targets,
/// followed by one clipped Adam step. Returns the loss before the step.
///
/// Each sample is `(input, output_index, target)`; targets carry no gradient.
pub fn critic_update(
    net: &mut Mlp,
    samples: &[(&[f64], usize, f64)],
    optimizer: &mut Adam,
    max_grad_norm: f64,
) -> Result<f64> {
    net.zero_grad();
    let loss = regression_loss_and_grad(net, samples)?;
    finish_update(net, loss, "critic", optimizer, max_grad_norm)
}

/// Accumulates the gradient of the regression loss used by [`critic_update`]
/// without stepping.
pub fn regression_loss_and_grad(net: &mut Mlp, samples: &[(&[f64], usize, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return contract("critic update on an empty batch");
    }
    net.clear_tape();
    let scale = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    for &(input, output, target) in samples {
        let q = net.forward_train(input)?;
        if output >= q.len() {
            return contract(format!("output index {output} outside critic width {}", q.len()));
        }
        let err = q[output] - target;
        loss += err * err * scale;
        let mut grad = vec![0.0; q.len()];
        grad[output] = 2.0 * err * scale;
        net.backward(&grad)?;
    }
    Ok(loss)
}

fn finish_update<N: Parameterized>(
    net: &mut N,
    loss: f64,
    block: &str,
    optimizer: &mut Adam,
    max_grad_norm: f64,
) -> Result<f64> {
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            block: block.into(),
            context: format!("loss = {loss}"),
        });
    }
    net.clip_grad_norm(max_grad_norm);
    optimizer.step(net)?;
    Ok(loss)
}

/// `Q_phi(x, .)` over every enumerated joint action.
#[derive(Debug, Clone)]
pub struct CentralizedCritic {
    pub nets: TargetPair<Mlp>,
    space: JointActionSpace,
}

impl CentralizedCritic {
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        hidden: usize,
        space: JointActionSpace,
        rng: &mut R,
    ) -> Self {
        let net = critic_mlp(state_dim, hidden, space.size(), rng);
        Self {
            nets: TargetPair::new(net),
            space,
        }
    }

    pub fn from_networks(live: Mlp, target: Mlp, space: JointActionSpace) -> Result<Self> {
        if live.out_dim() != space.size() || target.out_dim() != space.size() {
            return contract(format!(
                "centralized critic width {} does not match {} joint actions",
                live.out_dim(),
                space.size()
            ));
        }
        Ok(Self {
            nets: TargetPair { live, target },
            space,
        })
    }

    pub fn space(&self) -> &JointActionSpace {
        &self.space
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.nets.live.forward(state)
    }

    pub fn target_q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.nets.target.forward(state)
    }

    /// Regresses `Q_phi(x_t, a_t)` onto the given per-step targets.
    pub fn update(
        &mut self,
        episodes: &[Episode],
        targets: &super::TdTargetBatch,
        optimizer: &mut Adam,
        max_grad_norm: f64,
    ) -> Result<f64> {
        let mut samples = Vec::new();
        for (ep, ys) in episodes.iter().zip(&targets.per_episode) {
            for (tr, &y) in ep.transitions.iter().zip(ys) {
                samples.push((tr.state.as_slice(), self.space.encode(&tr.joint_action)?, y));
            }
        }
        critic_update(&mut self.nets.live, &samples, optimizer, max_grad_norm)
    }
}

/// Per-agent `Q_psi_i(x, a_i)` over that agent's own actions.
#[derive(Debug, Clone)]
pub struct LocalCritic {
    pub nets: TargetPair<Mlp>,
    agent: usize,
}

impl LocalCritic {
    pub fn new<R: Rng + ?Sized>(
        agent: usize,
        state_dim: usize,
        hidden: usize,
        n_actions: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            nets: TargetPair::new(critic_mlp(state_dim, hidden, n_actions, rng)),
            agent,
        }
    }

    pub fn from_networks(agent: usize, live: Mlp, target: Mlp) -> Self {
        Self {
            nets: TargetPair { live, target },
            agent,
        }
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn n_actions(&self) -> usize {
        self.nets.live.out_dim()
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.nets.live.forward(state)
    }

    pub fn target_q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.nets.target.forward(state)
    }

    pub fn update(
        &mut self,
        episodes: &[Episode],
        targets: &super::TdTargetBatch,
        optimizer: &mut Adam,
        max_grad_norm: f64,
    ) -> Result<f64> {
        let mut samples = Vec::new();
        for (ep, ys) in episodes.iter().zip(&targets.per_episode) {
            for (tr, &y) in ep.transitions.iter().zip(ys) {
                samples.push((tr.state.as_slice(), tr.joint_action[self.agent], y));
            }
        }
        critic_update(&mut self.nets.live, &samples, optimizer, max_grad_norm)
    }
}

/// `V_w(x)` on the global state (Central-V).
#[derive(Debug, Clone)]
pub struct StateValueCritic {
    pub nets: TargetPair<Mlp>,
}

impl StateValueCritic {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            nets: TargetPair::new(critic_mlp(state_dim, hidden, 1, rng)),
        }
    }

    pub fn value(&self, state: &[f64]) -> Result<f64> {
        Ok(self.nets.live.forward(state)?[0])
    }

    pub fn target_value(&self, state: &[f64]) -> Result<f64> {
        Ok(self.nets.target.forward(state)?[0])
    }

    pub fn update(
        &mut self,
        episodes: &[Episode],
        targets: &super::TdTargetBatch,
        optimizer: &mut Adam,
        max_grad_norm: f64,
    ) -> Result<f64> {
        let mut samples = Vec::new();
        for (ep, ys) in episodes.iter().zip(&targets.per_episode) {
            for (tr, &y) in ep.transitions.iter().zip(ys) {
                samples.push((tr.state.as_slice(), 0, y));
            }
        }
        critic_update(&mut self.nets.live, &samples, optimizer, max_grad_norm)
    }
}

/// `V_w_i(tau_i)` over one agent's observation history (IA2C). Shares the
/// actor's FC-LSTM-FC shape.
#[derive(Debug, Clone)]
pub struct HistoryValueCritic {
    pub nets: TargetPair<RecurrentNet>,
    agent: usize,
}

impl HistoryValueCritic {
    pub fn new<R: Rng + ?Sized>(agent: usize, obs_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            nets: TargetPair::new(RecurrentNet::new(obs_dim, hidden, 1, rng)),
            agent,
        }
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    /// Values of `tau_{i,0} ..= tau_{i,T}` under the live network.
    pub fn values(&self, episode: &Episode) -> Result<Vec<f64>> {
        let outs = self.nets.live.sequence(&episode.observations(self.agent))?;
        Ok(outs.into_iter().map(|o| o[0]).collect())
    }

    pub fn target_values(&self, episode: &Episode) -> Result<Vec<f64>> {
        let outs = self.nets.target.sequence(&episode.observations(self.agent))?;
        Ok(outs.into_iter().map(|o| o[0]).collect())
    }

    /// Mean squared error over all steps, backpropagated through time per episode.
    pub fn update(
        &mut self,
        episodes: &[Episode],
        targets: &super::TdTargetBatch,
        optimizer: &mut Adam,
        max_grad_norm: f64,
    ) -> Result<f64> {
        self.nets.live.zero_grad();
        let loss = self.loss_and_grad(episodes, targets)?;
        let block = format!("history value critic {}", self.agent);
        finish_update(&mut self.nets.live, loss, &block, optimizer, max_grad_norm)
    }

    /// Accumulates the gradient of the loss used by [`update`](Self::update).
    pub fn loss_and_grad(&mut self, episodes: &[Episode], targets: &super::TdTargetBatch) -> Result<f64> {
        let n: usize = episodes.iter().map(Episode::len).sum();
        if n == 0 {
            return contract("critic update on an empty batch");
        }
        let net = &mut self.nets.live;
        net.clear_tape();
        let scale = 1.0 / n as f64;
        let mut loss = 0.0;
        for (ep, ys) in episodes.iter().zip(&targets.per_episode) {
            let obs = ep.observations(self.agent);
            let outs = net.sequence_train(&obs[..ep.len()])?;
            let grads: Vec<Vec<f64>> = outs
                .iter()
                .zip(ys)
                .map(|(o, &y)| {
                    let err = o[0] - y;
                    loss += err * err * scale;
                    vec![2.0 * err * scale]
                })
                .collect();
            net.backward_sequence(&grads)?;
        }
        Ok(loss)
    }
}
