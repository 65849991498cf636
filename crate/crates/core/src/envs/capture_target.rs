use rand::{Rng, RngCore};

use super::{check_actions, EnumerableEnv, EnvSpec, Environment, Outcome, StepResult};
use crate::error::{contract, Result};

/// `(row, col)` on the torus.
pub type Cell = (usize, usize);

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;
pub const STAY: usize = 4;

const HORIZON: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaptureTargetState {
    pub agents: [Cell; 2],
    pub target: Cell,
    pub step_count: usize,
}

/// Two agents on an `n x n` torus chase a target that drifts one cell east
/// per step. Each agent sees its own position always and the target with
/// probability `visibility` (drawn independently per agent and step).
#[derive(Debug, Clone)]
pub struct CaptureTarget {
    spec: EnvSpec,
    size: usize,
    noise: f64,
    visibility: f64,
    state: CaptureTargetState,
}

impl CaptureTarget {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return contract(format!("capture target grid must be at least 2x2, got {size}"));
        }
        Ok(Self {
            spec: EnvSpec {
                name: format!("capture_target_{size}x{size}"),
                n_agents: 2,
                action_counts: vec![5, 5],
                obs_dims: vec![5, 5],
                state_dim: 7,
                max_steps: HORIZON,
            },
            size,
            noise: 0.1,
            visibility: 0.7,
            state: CaptureTargetState {
                agents: [(0, 0), (0, 1)],
                target: (1, 0),
                step_count: 0,
            },
        })
    }

    /// Probability of slipping to a random adjacent cell (0.1 by default).
    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        self.visibility = visibility;
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn state(&self) -> &CaptureTargetState {
        &self.state
    }

    pub fn set_state(&mut self, state: CaptureTargetState) {
        self.state = state;
    }

    fn shift(&self, (r, c): Cell, action: usize) -> Cell {
        let n = self.size;
        match action {
            UP => ((r + n - 1) % n, c),
            DOWN => ((r + 1) % n, c),
            LEFT => (r, (c + n - 1) % n),
            RIGHT => (r, (c + 1) % n),
            _ => (r, c),
        }
    }

    fn neighbours(&self, cell: Cell) -> [Cell; 4] {
        [UP, DOWN, LEFT, RIGHT].map(|a| self.shift(cell, a))
    }

    fn state_vector(&self) -> Vec<f64> {
        let n = self.size as f64;
        let s = &self.state;
        vec![
            s.agents[0].0 as f64 / n,
            s.agents[0].1 as f64 / n,
            s.agents[1].0 as f64 / n,
            s.agents[1].1 as f64 / n,
            s.target.0 as f64 / n,
            s.target.1 as f64 / n,
            s.step_count as f64 / HORIZON as f64,
        ]
    }

    fn observe(&self, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let n = self.size as f64;
        let s = &self.state;
        s.agents
            .iter()
            .map(|&(r, c)| {
                let visible = rng.gen::<f64>() < self.visibility;
                let (tr, tc, flag) = if visible {
                    (s.target.0 as f64 / n, s.target.1 as f64 / n, 1.0)
                } else {
                    (0.0, 0.0, 0.0)
                };
                vec![r as f64 / n, c as f64 / n, tr, tc, flag]
            })
            .collect()
    }

    fn result(&self, reward: f64, terminal: bool, rng: &mut dyn RngCore) -> StepResult {
        StepResult {
            state: self.state_vector(),
            observations: self.observe(rng),
            reward,
            terminal,
            info: None,
        }
    }
}

impl Environment for CaptureTarget {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> StepResult {
        let n = self.size;
        let mut taken: Vec<Cell> = Vec::with_capacity(3);
        while taken.len() < 3 {
            let cell = (rng.gen_range(0..n), rng.gen_range(0..n));
            if !taken.contains(&cell) {
                taken.push(cell);
            }
        }
        self.state = CaptureTargetState {
            agents: [taken[0], taken[1]],
            target: taken[2],
            step_count: 0,
        };
        self.result(0.0, false, rng)
    }

    fn step(&mut self, joint_action: &[usize], rng: &mut dyn RngCore) -> Result<StepResult> {
        check_actions(&self.spec, joint_action)?;
        for (i, &a) in joint_action.iter().enumerate() {
            let here = self.state.agents[i];
            let next = if rng.gen::<f64>() < self.noise {
                self.neighbours(here)[rng.gen_range(0..4)]
            } else {
                self.shift(here, a)
            };
            self.state.agents[i] = next;
        }
        self.state.target = self.shift(self.state.target, RIGHT);
        self.state.step_count += 1;
        let captured = self.state.agents.iter().all(|&p| p == self.state.target);
        let terminal = captured || self.state.step_count >= HORIZON;
        Ok(self.result(if captured { 1.0 } else { 0.0 }, terminal, rng))
    }
}

impl EnumerableEnv for CaptureTarget {
    /// Step count is left at zero; the finite-horizon oracle tracks time itself.
    type State = CaptureTargetState;

    fn action_counts(&self) -> Vec<usize> {
        self.spec.action_counts.clone()
    }

    fn states(&self) -> Vec<CaptureTargetState> {
        let n = self.size;
        let cells: Vec<Cell> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
        let mut out = Vec::with_capacity(cells.len().pow(3));
        for &a in &cells {
            for &b in &cells {
                for &t in &cells {
                    out.push(CaptureTargetState {
                        agents: [a, b],
                        target: t,
                        step_count: 0,
                    });
                }
            }
        }
        out
    }

    fn outcomes(&self, state: &CaptureTargetState, joint_action: &[usize]) -> Vec<Outcome<CaptureTargetState>> {
        let per_agent: Vec<Vec<(f64, Cell)>> = joint_action
            .iter()
            .zip(state.agents)
            .map(|(&a, here)| {
                let mut dist: Vec<(f64, Cell)> = vec![(1.0 - self.noise, self.shift(here, a))];
                for nb in self.neighbours(here) {
                    dist.push((self.noise / 4.0, nb));
                }
                merge(dist)
            })
            .collect();
        let target = self.shift(state.target, RIGHT);
        let mut out = Vec::new();
        for &(p0, c0) in &per_agent[0] {
            for &(p1, c1) in &per_agent[1] {
                let captured = c0 == target && c1 == target;
                out.push(Outcome {
                    prob: p0 * p1,
                    next: CaptureTargetState {
                        agents: [c0, c1],
                        target,
                        step_count: 0,
                    },
                    reward: if captured { 1.0 } else { 0.0 },
                    terminal: captured,
                });
            }
        }
        out
    }
}

fn merge(mut dist: Vec<(f64, Cell)>) -> Vec<(f64, Cell)> {
    dist.sort_by(|a, b| a.1.cmp(&b.1));
    let mut out: Vec<(f64, Cell)> = Vec::new();
    for (p, c) in dist {
        if p == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 == c => last.0 += p,
            _ => out.push((p, c)),
        }
    }
    out
}
