//! Enumeration of joint actions in mixed radix, agent 0 most significant.

use crate::error::{contract, Error, Result};

/// Largest joint-action space the enumerating critics accept.
pub const DEFAULT_JOINT_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointActionSpace {
    counts: Vec<usize>,
    size: usize,
}

impl JointActionSpace {
    pub fn new(counts: &[usize]) -> Result<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return contract(format!("invalid per-agent action counts {counts:?}"));
        }
        let size = counts
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .ok_or_else(|| Error::Unsupported("joint action count overflows".into()))?;
        Ok(Self {
            counts: counts.to_vec(),
            size,
        })
    }

    /// Like [`new`](Self::new) but refuses spaces larger than `cap`.
    pub fn with_cap(counts: &[usize], cap: usize) -> Result<Self> {
        let space = Self::new(counts)?;
        if space.size > cap {
            return Err(Error::Unsupported(format!(
                "{} joint actions exceed the enumeration cap of {cap}",
                space.size
            )));
        }
        Ok(space)
    }

    pub fn n_agents(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn encode(&self, joint: &[usize]) -> Result<usize> {
        if joint.len() != self.counts.len() {
            return contract(format!(
                "joint action {joint:?} has {} entries, expected {}",
                joint.len(),
                self.counts.len()
            ));
        }
        let mut idx = 0;
        for (&a, &n) in joint.iter().zip(&self.counts) {
            if a >= n {
                return contract(format!("joint action {joint:?} out of range {:?}", self.counts));
            }
            idx = idx * n + a;
        }
        Ok(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.counts.len()];
        for (slot, &n) in out.iter_mut().zip(&self.counts).rev() {
            *slot = idx % n;
            idx /= n;
        }
        out
    }

    /// Index of `joint` with agent `agent`'s component replaced by `action`.
    pub fn substitute(&self, joint: &[usize], agent: usize, action: usize) -> Result<usize> {
        let mut j = joint.to_vec();
        j[agent] = action;
        self.encode(&j)
    }
}
