//! Brute-force ground truth for tests and the `oracle` command. Nothing here
//! calls into the estimators, critics or joint-action helpers it is used to
//! check.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::envs::{box_pushing_optimal_return, CaptureTarget, EnumerableEnv, MatrixGame};
use crate::error::{contract, Error, Result};

/// Largest `states x joint actions x steps` table `exact_joint_q` will fill.
pub const EXACT_Q_CAP: usize = 200_000;

/// Finite-horizon action values under a fixed joint policy.
///
/// `q[t][s][a]` and `v[t][s]` index states in `states` order and joint actions
/// in mixed radix with agent 0 most significant. `v[horizon]` is all zeros.
#[derive(Debug, Clone)]
pub struct ExactEvaluation<S> {
    pub states: Vec<S>,
    pub action_counts: Vec<usize>,
    pub gamma: f64,
    pub horizon: usize,
    pub q: Vec<Vec<Vec<f64>>>,
    pub v: Vec<Vec<f64>>,
    index: HashMap<S, usize>,
}

impl<S: Clone + Eq + std::hash::Hash> ExactEvaluation<S> {
    pub fn state_index(&self, s: &S) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn q_at(&self, t: usize, s: &S, joint: usize) -> Option<f64> {
        Some(self.q[t][self.state_index(s)?][joint])
    }

    pub fn v_at(&self, t: usize, s: &S) -> Option<f64> {
        Some(self.v[t][self.state_index(s)?])
    }
}

fn joint_count(counts: &[usize]) -> usize {
    counts.iter().product()
}

fn unrank(mut idx: usize, counts: &[usize]) -> Vec<usize> {
    let mut out = vec![0; counts.len()];
    for k in (0..counts.len()).rev() {
        out[k] = idx % counts[k];
        idx /= counts[k];
    }
    out
}

/// Backward induction over steps `horizon - 1 ..= 0`:
/// `Q_t(s, a) = E[r] + gamma * sum_s' P(s' | s, a) V_{t+1}(s')` (zero
/// continuation after a terminal outcome) and `V_t(s) = sum_a policy(s)[a] Q_t(s, a)`.
///
/// `policy(s)` returns a distribution over joint actions.
pub fn exact_joint_q<E, P>(env: &E, policy: P, gamma: f64, horizon: usize) -> Result<ExactEvaluation<E::State>>
where
    E: EnumerableEnv,
    P: Fn(&E::State) -> Vec<f64>,
{
    let states = env.states();
    let counts = env.action_counts();
    let n_joint = joint_count(&counts);
    let entries = states
        .len()
        .checked_mul(n_joint)
        .and_then(|x| x.checked_mul(horizon))
        .unwrap_or(usize::MAX);
    if entries > EXACT_Q_CAP {
        return Err(Error::Unsupported(format!(
            "exact evaluation needs {entries} entries, cap is {EXACT_Q_CAP}"
        )));
    }
    let index: HashMap<E::State, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let pi: Vec<Vec<f64>> = states.iter().map(&policy).collect();
    for (s, p) in states.iter().zip(&pi) {
        if p.len() != n_joint {
            return contract(format!("policy at {s:?} has {} entries, expected {n_joint}", p.len()));
        }
    }
    let mut q = vec![vec![vec![0.0; n_joint]; states.len()]; horizon];
    let mut v = vec![vec![0.0; states.len()]; horizon + 1];
    for t in (0..horizon).rev() {
        for (si, s) in states.iter().enumerate() {
            for a in 0..n_joint {
                let mut total = 0.0;
                for o in env.outcomes(s, &unrank(a, &counts)) {
                    let cont = if o.terminal {
                        0.0
                    } else {
                        let ni = *index
                            .get(&o.next)
                            .ok_or_else(|| Error::Contract(format!("successor {:?} not enumerated", o.next)))?;
                        v[t + 1][ni]
                    };
                    total += o.prob * (o.reward + gamma * cont);
                }
                q[t][si][a] = total;
            }
            v[t][si] = pi[si].iter().zip(&q[t][si]).map(|(p, x)| p * x).sum();
        }
    }
    Ok(ExactEvaluation {
        states,
        action_counts: counts,
        gamma,
        horizon,
        q,
        v,
        index,
    })
}

/// Largest absolute violation of the Bellman recursion when every entry of
/// `eval` is substituted back into it.
pub fn bellman_residual<E, P>(env: &E, policy: P, eval: &ExactEvaluation<E::State>) -> f64
where
    E: EnumerableEnv,
    P: Fn(&E::State) -> Vec<f64>,
{
    let n_joint = joint_count(&eval.action_counts);
    let mut worst: f64 = 0.0;
    for t in 0..eval.horizon {
        for (si, s) in eval.states.iter().enumerate() {
            let pi = policy(s);
            let mut v = 0.0;
            for a in 0..n_joint {
                let rhs: f64 = env
                    .outcomes(s, &unrank(a, &eval.action_counts))
                    .iter()
                    .map(|o| {
                        let next = if o.terminal {
                            0.0
                        } else {
                            eval.v_at(t + 1, &o.next).unwrap_or(f64::NAN)
                        };
                        o.prob * (o.reward + eval.gamma * next)
                    })
                    .sum();
                worst = worst.max((eval.q[t][si][a] - rhs).abs());
                v += pi[a] * eval.q[t][si][a];
            }
            worst = worst.max((eval.v[t][si] - v).abs());
        }
    }
    worst
}

/// Expected counterfactual advantage of every action of `agent`, by explicit
/// nested sums over teammates' joint actions. `q` is indexed in mixed radix
/// over `policies[k].len()`, agent 0 most significant.
pub fn exact_eca(q: &[f64], policies: &[Vec<f64>], agent: usize) -> Vec<f64> {
    let counts: Vec<usize> = policies.iter().map(Vec::len).collect();
    let strides: Vec<usize> = (0..counts.len())
        .map(|k| counts[k + 1..].iter().product())
        .collect();
    let teammates: Vec<usize> = (0..counts.len()).filter(|&k| k != agent).collect();
    let mut out = vec![0.0; counts[agent]];
    // Odometer over the teammates' actions.
    let mut others = vec![0usize; teammates.len()];
    loop {
        let mut weight = 1.0;
        let mut base = 0;
        for (slot, &k) in teammates.iter().enumerate() {
            weight *= policies[k][others[slot]];
            base += others[slot] * strides[k];
        }
        let row: Vec<f64> = (0..counts[agent]).map(|b| q[base + b * strides[agent]]).collect();
        let mut baseline = 0.0;
        for b in 0..counts[agent] {
            baseline += policies[agent][b] * row[b];
        }
        for a in 0..counts[agent] {
            out[a] += weight * (row[a] - baseline);
        }
        let mut k = 0;
        loop {
            if k == others.len() {
                return out;
            }
            others[k] += 1;
            if others[k] < counts[teammates[k]] {
                break;
            }
            others[k] = 0;
            k += 1;
        }
    }
}

/// Analytic fixed point of local-critic regression on a one-step two-player
/// game: `E_{teammate ~ behavior}[R(a_i, a_teammate)]` for each own action.
pub fn local_critic_fixed_point(payoff: &[Vec<f64>], behavior: &[Vec<f64>], agent: usize) -> Vec<f64> {
    let rows = payoff.len();
    let cols = payoff[0].len();
    if agent == 0 {
        (0..rows)
            .map(|a| (0..cols).map(|b| behavior[1][b] * payoff[a][b]).sum())
            .collect()
    } else {
        (0..cols)
            .map(|b| (0..rows).map(|a| behavior[0][a] * payoff[a][b]).sum())
            .collect()
    }
}

/// Named small instances printable by the `oracle` command.
pub const INSTANCES: &[&str] = &[
    "matrix-2x2",
    "matrix-3-0-0-1",
    "capture-3x3-h4",
    "boxpush-6x6",
    "boxpush-10x10",
];

/// Human-readable exact values for one named instance.
pub fn describe_instance(name: &str, gamma: f64) -> Result<String> {
    let mut out = String::new();
    match name {
        "matrix-2x2" | "matrix-3-0-0-1" => {
            let payoff = if name == "matrix-2x2" {
                vec![vec![1.0, 0.0], vec![0.0, 1.0]]
            } else {
                vec![vec![3.0, 0.0], vec![0.0, 1.0]]
            };
            let game = MatrixGame::new(payoff.clone())?;
            let uniform = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
            let eval = exact_joint_q(&game, |_| vec![0.25; 4], gamma, 1)?;
            let flat: Vec<f64> = payoff.iter().flatten().copied().collect();
            writeln!(out, "instance: {name}").ok();
            writeln!(out, "payoff: {payoff:?}").ok();
            writeln!(out, "exact Q under uniform play: {:?}", eval.q[0][0]).ok();
            writeln!(out, "value under uniform play: {}", eval.v[0][0]).ok();
            for agent in 0..2 {
                writeln!(
                    out,
                    "agent {agent}: local critic fixed point {:?}, ECA {:?}",
                    local_critic_fixed_point(&payoff, &uniform, agent),
                    exact_eca(&flat, &uniform, agent)
                )
                .ok();
            }
            let best = flat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            writeln!(out, "optimal return: {best}").ok();
        }
        "capture-3x3-h4" => {
            let env = CaptureTarget::new(3)?.with_noise(0.0);
            let eval = exact_joint_q(&env, |_| vec![1.0 / 25.0; 25], gamma, 4)?;
            let residual = bellman_residual(&env, |_| vec![1.0 / 25.0; 25], &eval);
            let mean_v = eval.v[0].iter().sum::<f64>() / eval.v[0].len() as f64;
            let max_v = eval.v[0].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            writeln!(out, "instance: {name} (noise-free, uniform policies, horizon 4)").ok();
            writeln!(out, "states: {}", eval.states.len()).ok();
            writeln!(out, "mean V_0 over states: {mean_v}").ok();
            writeln!(out, "max V_0 over states: {max_v}").ok();
            writeln!(out, "bellman residual: {residual:e}").ok();
        }
        "boxpush-6x6" | "boxpush-10x10" => {
            let size = if name == "boxpush-6x6" { 6 } else { 10 };
            writeln!(out, "instance: {name}").ok();
            writeln!(
                out,
                "optimal discounted return: {}",
                box_pushing_optimal_return(size, gamma)?
            )
            .ok();
        }
        other => {
            return Err(Error::Config(format!(
                "unknown oracle instance `{other}`; valid instances: {}",
                INSTANCES.join(", ")
            )))
        }
    }
    Ok(out)
}
