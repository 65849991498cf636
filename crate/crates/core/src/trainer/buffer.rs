/// One environment step as stored for training.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub observations: Vec<Vec<f64>>,
    pub joint_action: Vec<usize>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub next_observations: Vec<Vec<f64>>,
    pub terminal: bool,
}

/// A complete episode. Transition `t` goes from state `x_t` to `x_{t+1}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Episode {
    pub transitions: Vec<Transition>,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.reward).collect()
    }

    /// Whether the final transition ended in a terminal state (as opposed to
    /// being cut off).
    pub fn ends_terminal(&self) -> bool {
        self.transitions.last().is_some_and(|t| t.terminal)
    }

    /// `x_0 .. x_T`, i.e. one more entry than there are transitions.
    pub fn states(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.transitions.iter().map(|t| t.state.as_slice()).collect();
        if let Some(last) = self.transitions.last() {
            out.push(&last.next_state);
        }
        out
    }

    /// `o_{i,0} .. o_{i,T}` for one agent.
    pub fn observations(&self, agent: usize) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self
            .transitions
            .iter()
            .map(|t| t.observations[agent].as_slice())
            .collect();
        if let Some(last) = self.transitions.last() {
            out.push(&last.next_observations[agent]);
        }
        out
    }

    pub fn discounted_return(&self, gamma: f64) -> f64 {
        self.transitions
            .iter()
            .rev()
            .fold(0.0, |acc, t| t.reward + gamma * acc)
    }
}

/// On-policy episode buffer. `clear` bumps the generation so callers can
/// verify that no episode is trained on twice.
#[derive(Debug, Clone, Default)]
pub struct EpisodeBuffer {
    episodes: Vec<Episode>,
    generation: u64,
}

impl EpisodeBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, episode: Episode) {
        self.episodes.push(episode);
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn num_transitions(&self) -> usize {
        self.episodes.iter().map(Episode::len).sum()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn clear(&mut self) {
        self.episodes.clear();
        self.generation += 1;
    }
}
