use std::collections::{HashSet, VecDeque};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{check_actions, EnvSpec, Environment, StepResult};
use crate::error::{contract, Error, Result};

pub const FORWARD: usize = 0;
pub const TURN_LEFT: usize = 1;
pub const TURN_RIGHT: usize = 2;
pub const STAY: usize = 3;

const HORIZON: usize = 100;
pub const GOAL_REWARD: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    fn index(self) -> usize {
        self as usize
    }

    fn left(self) -> Self {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    fn right(self) -> Self {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Heading::North => (-1, 0),
            Heading::East => (0, 1),
            Heading::South => (1, 0),
            Heading::West => (0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pose {
    pub row: usize,
    pub col: usize,
    pub heading: Heading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoxPushingState {
    pub agents: [Pose; 2],
    pub boxes: [(usize, usize); 2],
    pub step_count: usize,
}

/// What an agent sees in the cell it faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrontCell {
    Empty = 0,
    Box = 1,
    Teammate = 2,
    Boundary = 3,
}

/// Two agents push boxes north; the first box to reach row 0 pays
/// [`GOAL_REWARD`] and ends the episode. Fully deterministic.
#[derive(Debug, Clone)]
pub struct BoxPushing {
    spec: EnvSpec,
    size: usize,
    state: BoxPushingState,
}

fn step_cell(size: usize, row: usize, col: usize, heading: Heading) -> Option<(usize, usize)> {
    let (dr, dc) = heading.delta();
    let r = row as isize + dr;
    let c = col as isize + dc;
    (r >= 0 && c >= 0 && (r as usize) < size && (c as usize) < size).then(|| (r as usize, c as usize))
}

impl BoxPushing {
    pub fn new(size: usize) -> Result<Self> {
        if size < 4 {
            return contract(format!("box pushing grid must be at least 4x4, got {size}"));
        }
        Ok(Self {
            spec: EnvSpec {
                name: format!("box_pushing_{size}x{size}"),
                n_agents: 2,
                action_counts: vec![4, 4],
                obs_dims: vec![4, 4],
                state_dim: 17,
                max_steps: HORIZON,
            },
            size,
            state: Self::initial_layout(size),
        })
    }

    /// Boxes in row `ceil(n/2)` at columns `floor(n/3)` and `ceil(2n/3)`,
    /// each agent directly south of its box facing north.
    pub fn initial_layout(size: usize) -> BoxPushingState {
        let box_row = size.div_ceil(2);
        let cols = [size / 3, (2 * size).div_ceil(3)];
        BoxPushingState {
            agents: cols.map(|col| Pose {
                row: box_row + 1,
                col,
                heading: Heading::North,
            }),
            boxes: cols.map(|col| (box_row, col)),
            step_count: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn state(&self) -> &BoxPushingState {
        &self.state
    }

    pub fn set_state(&mut self, state: BoxPushingState) {
        self.state = state;
    }

    fn front(&self, agent: usize) -> FrontCell {
        let p = self.state.agents[agent];
        match step_cell(self.size, p.row, p.col, p.heading) {
            None => FrontCell::Boundary,
            Some(cell) if self.state.boxes.contains(&cell) => FrontCell::Box,
            Some(cell) => {
                let mate = self.state.agents[1 - agent];
                if (mate.row, mate.col) == cell {
                    FrontCell::Teammate
                } else {
                    FrontCell::Empty
                }
            }
        }
    }

    fn occupied(&self, cell: (usize, usize)) -> bool {
        self.state.boxes.contains(&cell)
            || self.state.agents.iter().any(|a| (a.row, a.col) == cell)
    }

    fn move_forward(&mut self, agent: usize) {
        let p = self.state.agents[agent];
        let Some(cell) = step_cell(self.size, p.row, p.col, p.heading) else {
            return;
        };
        if let Some(b) = self.state.boxes.iter().position(|&bx| bx == cell) {
            if p.heading != Heading::North {
                return;
            }
            let Some(beyond) = step_cell(self.size, cell.0, cell.1, Heading::North) else {
                return;
            };
            if self.occupied(beyond) {
                return;
            }
            self.state.boxes[b] = beyond;
        } else if self.occupied(cell) {
            return;
        }
        self.state.agents[agent].row = cell.0;
        self.state.agents[agent].col = cell.1;
    }

    fn state_vector(&self) -> Vec<f64> {
        let n = self.size as f64;
        let mut v = Vec::with_capacity(self.spec.state_dim);
        for a in &self.state.agents {
            v.push(a.row as f64 / n);
            v.push(a.col as f64 / n);
            let mut onehot = [0.0; 4];
            onehot[a.heading.index()] = 1.0;
            v.extend_from_slice(&onehot);
        }
        for &(r, c) in &self.state.boxes {
            v.push(r as f64 / n);
            v.push(c as f64 / n);
        }
        v.push(self.state.step_count as f64 / HORIZON as f64);
        v
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        (0..2)
            .map(|i| {
                let mut o = vec![0.0; 4];
                o[self.front(i) as usize] = 1.0;
                o
            })
            .collect()
    }

    fn result(&self, reward: f64, terminal: bool) -> StepResult {
        StepResult {
            state: self.state_vector(),
            observations: self.observations(),
            reward,
            terminal,
            info: None,
        }
    }
}

impl Environment for BoxPushing {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> StepResult {
        self.state = Self::initial_layout(self.size);
        self.result(0.0, false)
    }

    /// Agents act in index order, so agent 0 resolves any conflict first.
    fn step(&mut self, joint_action: &[usize], _rng: &mut dyn RngCore) -> Result<StepResult> {
        check_actions(&self.spec, joint_action)?;
        for (i, &a) in joint_action.iter().enumerate() {
            match a {
                FORWARD => self.move_forward(i),
                TURN_LEFT => self.state.agents[i].heading = self.state.agents[i].heading.left(),
                TURN_RIGHT => self.state.agents[i].heading = self.state.agents[i].heading.right(),
                _ => {}
            }
        }
        self.state.step_count += 1;
        let goal = self.state.boxes.iter().any(|&(r, _)| r == 0);
        let terminal = goal || self.state.step_count >= HORIZON;
        Ok(self.result(if goal { GOAL_REWARD } else { 0.0 }, terminal))
    }
}

/// Shortest number of steps for a single agent, starting from its pose in
/// the initial layout, to push any box into the goal row. Breadth-first
/// search over (agent pose, box positions); the teammate is ignored.
fn shortest_push(size: usize) -> Option<usize> {
    let layout = BoxPushing::initial_layout(size);
    let mut best: Option<usize> = None;
    for start in layout.agents {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        queue.push_back((start, layout.boxes, 0usize));
        seen.insert((start, layout.boxes));
        while let Some((pose, boxes, depth)) = queue.pop_front() {
            for action in [FORWARD, TURN_LEFT, TURN_RIGHT] {
                let mut p = pose;
                let mut b = boxes;
                match action {
                    TURN_LEFT => p.heading = p.heading.left(),
                    TURN_RIGHT => p.heading = p.heading.right(),
                    _ => {
                        let Some(cell) = step_cell(size, p.row, p.col, p.heading) else {
                            continue;
                        };
                        if let Some(k) = b.iter().position(|&x| x == cell) {
                            if p.heading != Heading::North {
                                continue;
                            }
                            let Some(beyond) = step_cell(size, cell.0, cell.1, Heading::North)
                            else {
                                continue;
                            };
                            if b.contains(&beyond) {
                                continue;
                            }
                            b[k] = beyond;
                        }
                        p.row = cell.0;
                        p.col = cell.1;
                    }
                }
                if b.iter().any(|&(r, _)| r == 0) {
                    let steps = depth + 1;
                    best = Some(best.map_or(steps, |s: usize| s.min(steps)));
                    queue.clear();
                    break;
                }
                if seen.insert((p, b)) {
                    queue.push_back((p, b, depth + 1));
                }
            }
        }
    }
    best
}

/// Optimal discounted team return `100 * gamma^(t* - 1)` for the
/// deterministic layout, where `t*` is the shortest single-agent push.
pub fn box_pushing_optimal_return(size: usize, gamma: f64) -> Result<f64> {
    if size < 4 {
        return contract(format!("box pushing grid must be at least 4x4, got {size}"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return contract(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    let steps = shortest_push(size)
        .ok_or_else(|| Error::Contract(format!("goal unreachable in {size}x{size} layout")))?;
    Ok(GOAL_REWARD * gamma.powi(steps as i32 - 1))
}
