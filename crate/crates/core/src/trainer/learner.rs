use rand::{Rng, RngCore};

use super::{Algorithm, Episode, ExperimentConfig};
use crate::critics::{
    centralized_lambda_target, centralized_td_target, history_value_target, local_td_target,
    state_value_target, sync_targets, CentralizedCritic, HistoryValueCritic, LocalCritic,
    StateValueCritic,
};
use crate::envs::EnvSpec;
use crate::error::Result;
use crate::estimators::{
    central_v_advantage, coma_advantage, eca_advantage, ia2c_advantage, policy_gradient_step,
    rola_advantage, Actor, PolicyDistribution,
};
use crate::joint::{JointActionSpace, DEFAULT_JOINT_CAP};
use crate::numerics::{Adam, AdamConfig, Checkpoint};

/// Losses from one training pass. `None` where the algorithm has no such critic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PassLosses {
    pub centralized_critic: Option<f64>,
    pub mean_local_critic: Option<f64>,
    pub actor: Option<f64>,
}

#[derive(Debug, Clone)]
enum Critics {
    Rola {
        central: CentralizedCritic,
        central_opt: Adam,
        locals: Vec<LocalCritic>,
        local_opts: Vec<Adam>,
    },
    /// COMA and ECA share the centralized critic and differ in the advantage.
    Joint { central: CentralizedCritic, opt: Adam },
    CentralV { value: StateValueCritic, opt: Adam },
    Ia2c {
        values: Vec<HistoryValueCritic>,
        opts: Vec<Adam>,
    },
}

/// Actors, their targets and the algorithm's critics, with optimizer state.
#[derive(Debug, Clone)]
pub struct Learner {
    algorithm: Algorithm,
    pub actors: Vec<Actor>,
    target_actors: Vec<Actor>,
    actor_opts: Vec<Adam>,
    critics: Critics,
}

impl Learner {
    pub fn new<R: Rng + ?Sized>(cfg: &ExperimentConfig, spec: &EnvSpec, rng: &mut R) -> Result<Self> {
        let h = cfg.hidden_units;
        let n = spec.n_agents;
        let actor_cfg = AdamConfig::with_lr(cfg.actor_lr);
        let critic_cfg = AdamConfig::with_lr(cfg.critic_lr);
        let actors: Vec<Actor> = (0..n)
            .map(|i| Actor::new(spec.obs_dims[i], h, spec.action_counts[i], rng))
            .collect();
        let critics = match cfg.algorithm {
            Algorithm::Rola => {
                let space = JointActionSpace::with_cap(&spec.action_counts, DEFAULT_JOINT_CAP)?;
                Critics::Rola {
                    central: CentralizedCritic::new(spec.state_dim, h, space, rng),
                    central_opt: Adam::new(critic_cfg),
                    locals: (0..n)
                        .map(|i| LocalCritic::new(i, spec.state_dim, h, spec.action_counts[i], rng))
                        .collect(),
                    local_opts: vec![Adam::new(critic_cfg); n],
                }
            }
            Algorithm::Coma | Algorithm::Eca => {
                let space = JointActionSpace::with_cap(&spec.action_counts, DEFAULT_JOINT_CAP)?;
                Critics::Joint {
                    central: CentralizedCritic::new(spec.state_dim, h, space, rng),
                    opt: Adam::new(critic_cfg),
                }
            }
            Algorithm::CentralV => Critics::CentralV {
                value: StateValueCritic::new(spec.state_dim, h, rng),
                opt: Adam::new(critic_cfg),
            },
            Algorithm::Ia2c => Critics::Ia2c {
                values: (0..n)
                    .map(|i| HistoryValueCritic::new(i, spec.obs_dims[i], h, rng))
                    .collect(),
                opts: vec![Adam::new(critic_cfg); n],
            },
        };
        Ok(Self {
            algorithm: cfg.algorithm,
            target_actors: actors.clone(),
            actors,
            actor_opts: vec![Adam::new(actor_cfg); n],
            critics,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// One full pass over the buffer: critics first, then every actor.
    pub fn train(&mut self, episodes: &[Episode], cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> Result<PassLosses> {
        let gamma = cfg.gamma;
        let n_step = cfg.n_step_or_default();
        let clip = cfg.max_grad_norm;
        let mut losses = PassLosses::default();
        let policies = current_policies(&self.actors, episodes)?;
        let advantages: Vec<Vec<Vec<f64>>> = match &mut self.critics {
            Critics::Rola {
                central,
                central_opt,
                locals,
                local_opts,
            } => {
                let mut last = 0.0;
                for _ in 0..cfg.centralized_updates() {
                    let y = centralized_td_target(episodes, central, &self.target_actors, gamma, n_step, rng)?;
                    last = central.update(episodes, &y, central_opt, clip)?;
                }
                losses.centralized_critic = Some(last);
                let mut total = 0.0;
                for (local, opt) in locals.iter_mut().zip(local_opts.iter_mut()) {
                    let mut l = 0.0;
                    for _ in 0..cfg.local_updates() {
                        let y = local_td_target(episodes, local, central, gamma, n_step, cfg.softmax_temperature, rng)?;
                        l = local.update(episodes, &y, opt, clip)?;
                    }
                    total += l;
                }
                losses.mean_local_critic = Some(total / locals.len() as f64);
                (0..self.actors.len())
                    .map(|i| {
                        per_step(episodes, &policies, |ep, t, pols| {
                            let q = locals[i].q_values(&ep.transitions[t].state)?;
                            let a = rola_advantage(&q, &pols[i][t], i)?;
                            Ok(a.taken(ep.transitions[t].joint_action[i]))
                        })
                    })
                    .collect::<Result<_>>()?
            }
            Critics::Joint { central, opt } => {
                let mut last = 0.0;
                for _ in 0..cfg.centralized_updates() {
                    let y = match cfg.lambda {
                        Some(lambda) => centralized_lambda_target(episodes, central, &self.target_actors, gamma, lambda, rng)?,
                        None => centralized_td_target(episodes, central, &self.target_actors, gamma, n_step, rng)?,
                    };
                    last = central.update(episodes, &y, opt, clip)?;
                }
                losses.centralized_critic = Some(last);
                let eca = self.algorithm == Algorithm::Eca;
                (0..self.actors.len())
                    .map(|i| {
                        per_step(episodes, &policies, |ep, t, pols| {
                            let tr = &ep.transitions[t];
                            let q = central.q_values(&tr.state)?;
                            if eca {
                                let at_t: Vec<PolicyDistribution> = pols.iter().map(|p| p[t].clone()).collect();
                                Ok(eca_advantage(&q, central.space(), i, &at_t)?.taken(tr.joint_action[i]))
                            } else {
                                coma_advantage(&q, central.space(), &tr.joint_action, i, &pols[i][t])
                            }
                        })
                    })
                    .collect::<Result<_>>()?
            }
            Critics::CentralV { value, opt } => {
                let mut last = 0.0;
                for _ in 0..cfg.centralized_updates() {
                    let y = state_value_target(episodes, value, gamma, n_step)?;
                    last = value.update(episodes, &y, opt, clip)?;
                }
                losses.centralized_critic = Some(last);
                let adv = central_v_advantage(value, episodes, gamma, n_step)?;
                vec![adv; self.actors.len()]
            }
            Critics::Ia2c { values, opts } => {
                let mut total = 0.0;
                for (v, opt) in values.iter_mut().zip(opts.iter_mut()) {
                    let mut l = 0.0;
                    for _ in 0..cfg.local_updates() {
                        let y = history_value_target(episodes, v, gamma, n_step)?;
                        l = v.update(episodes, &y, opt, clip)?;
                    }
                    total += l;
                }
                losses.mean_local_critic = Some(total / values.len() as f64);
                values
                    .iter()
                    .map(|v| ia2c_advantage(v, episodes, gamma, n_step))
                    .collect::<Result<_>>()?
            }
        };
        let mut actor_total = 0.0;
        for (i, ((actor, opt), adv)) in self
            .actors
            .iter_mut()
            .zip(self.actor_opts.iter_mut())
            .zip(&advantages)
            .enumerate()
        {
            actor_total += policy_gradient_step(actor, i, episodes, adv, opt, cfg.entropy_weight, clip)?;
        }
        losses.actor = Some(actor_total / self.actors.len() as f64);
        Ok(losses)
    }

    /// Copies every live network into its target.
    pub fn sync_targets(&mut self) -> Result<()> {
        for (live, target) in self.actors.iter().zip(self.target_actors.iter_mut()) {
            sync_targets(live, target)?;
        }
        match &mut self.critics {
            Critics::Rola { central, locals, .. } => {
                central.nets.sync()?;
                for l in locals {
                    l.nets.sync()?;
                }
            }
            Critics::Joint { central, .. } => central.nets.sync()?,
            Critics::CentralV { value, .. } => value.nets.sync()?,
            Critics::Ia2c { values, .. } => {
                for v in values {
                    v.nets.sync()?;
                }
            }
        }
        Ok(())
    }

    /// Whether every target network equals its live network bit for bit.
    pub fn targets_in_sync(&self) -> bool {
        use crate::numerics::Parameterized;
        fn same<P: Parameterized>(a: &P, b: &P) -> bool {
            a.flat_values()
                .iter()
                .zip(b.flat_values().iter())
                .all(|(x, y)| x.to_bits() == y.to_bits())
        }
        let actors = self
            .actors
            .iter()
            .zip(&self.target_actors)
            .all(|(a, b)| same(a, b));
        actors
            && match &self.critics {
                Critics::Rola { central, locals, .. } => {
                    same(&central.nets.live, &central.nets.target)
                        && locals.iter().all(|l| same(&l.nets.live, &l.nets.target))
                }
                Critics::Joint { central, .. } => same(&central.nets.live, &central.nets.target),
                Critics::CentralV { value, .. } => same(&value.nets.live, &value.nets.target),
                Critics::Ia2c { values, .. } => values.iter().all(|v| same(&v.nets.live, &v.nets.target)),
            }
    }

    /// Adds every live network to a checkpoint under stable prefixes.
    pub fn add_to_checkpoint(&self, ckpt: &mut Checkpoint) {
        for (i, a) in self.actors.iter().enumerate() {
            ckpt.add(&format!("agent{i}"), a);
        }
        match &self.critics {
            Critics::Rola { central, locals, .. } => {
                ckpt.add("central", &central.nets.live);
                for (i, l) in locals.iter().enumerate() {
                    ckpt.add(&format!("local{i}"), &l.nets.live);
                }
            }
            Critics::Joint { central, .. } => ckpt.add("central", &central.nets.live),
            Critics::CentralV { value, .. } => ckpt.add("value", &value.nets.live),
            Critics::Ia2c { values, .. } => {
                for (i, v) in values.iter().enumerate() {
                    ckpt.add(&format!("value{i}"), &v.nets.live);
                }
            }
        }
    }

    /// Restores actor parameters from a checkpoint written by [`add_to_checkpoint`](Self::add_to_checkpoint).
    pub fn restore_actors(&mut self, ckpt: &Checkpoint) -> Result<()> {
        for (i, a) in self.actors.iter_mut().enumerate() {
            ckpt.restore(&format!("agent{i}"), a)?;
        }
        Ok(())
    }
}

/// `out[episode][agent][t]`: each actor's current policy along each episode.
fn current_policies(actors: &[Actor], episodes: &[Episode]) -> Result<Vec<Vec<Vec<PolicyDistribution>>>> {
    episodes
        .iter()
        .map(|ep| {
            actors
                .iter()
                .enumerate()
                .map(|(i, a)| a.policies(&ep.observations(i)[..ep.len()]))
                .collect()
        })
        .collect()
}

/// Builds one advantage sequence per episode from `f(episode, t, policies)`.
fn per_step<F>(episodes: &[Episode], policies: &[Vec<Vec<PolicyDistribution>>], mut f: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&Episode, usize, &[Vec<PolicyDistribution>]) -> Result<f64>,
{
    episodes
        .iter()
        .zip(policies)
        .map(|(ep, pols)| (0..ep.len()).map(|t| f(ep, t, pols)).collect())
        .collect()
}
