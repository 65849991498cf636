use std::io::Write;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::Environment;
use crate::error::Result;

/// One line of a trajectory dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub episode: usize,
    pub t: usize,
    pub state: Vec<f64>,
    pub observations: Vec<Vec<f64>>,
    pub joint_action: Vec<usize>,
    pub reward: f64,
    pub terminal: bool,
}

/// Rolls out one episode, choosing joint actions with `policy(t, observations, rng)`.
/// Each record holds the state and observations the action was chosen from,
/// and the reward/terminal flag that followed.
pub fn record_episode<F>(
    env: &mut dyn Environment,
    episode: usize,
    rng: &mut dyn RngCore,
    mut policy: F,
) -> Result<Vec<TraceRecord>>
where
    F: FnMut(usize, &[Vec<f64>], &mut dyn RngCore) -> Vec<usize>,
{
    let horizon = env.spec().max_steps;
    let mut current = env.reset(rng);
    let mut out = Vec::new();
    for t in 0..horizon {
        let joint_action = policy(t, &current.observations, rng);
        let next = env.step(&joint_action, rng)?;
        out.push(TraceRecord {
            episode,
            t,
            state: current.state,
            observations: current.observations,
            joint_action,
            reward: next.reward,
            terminal: next.terminal,
        });
        let done = next.terminal;
        current = next;
        if done {
            break;
        }
    }
    Ok(out)
}

/// Writes records as line-delimited JSON.
pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
