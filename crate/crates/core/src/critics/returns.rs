use crate::error::{contract, Result};

/// n-step bootstrapped return from step `t`:
/// `sum_{k<m} gamma^k r_{t+k} + gamma^m values[t+m]` with `m = min(n, T - t)`.
///
/// `values` holds one estimate per state `x_0 ..= x_T` (length `T + 1`); the
/// caller zeroes `values[T]` when the episode ended in a terminal state.
pub fn nstep_return(rewards: &[f64], values: &[f64], gamma: f64, n: usize, t: usize) -> Result<f64> {
    if n == 0 {
        return contract("n-step return needs n >= 1");
    }
    let len = rewards.len();
    if values.len() != len + 1 {
        return contract(format!(
            "expected {} bootstrap values for {len} rewards, got {}",
            len + 1,
            values.len()
        ));
    }
    if t >= len {
        return contract(format!("step {t} outside episode of length {len}"));
    }
    let m = n.min(len - t);
    let mut g = 0.0;
    let mut discount = 1.0;
    for r in &rewards[t..t + m] {
        g += discount * r;
        discount *= gamma;
    }
    Ok(g + discount * values[t + m])
}

/// n-step returns for every step of an episode.
pub fn nstep_returns(rewards: &[f64], values: &[f64], gamma: f64, n: usize) -> Result<Vec<f64>> {
    (0..rewards.len())
        .map(|t| nstep_return(rewards, values, gamma, n, t))
        .collect()
}

/// Truncated forward-view lambda-returns for every step, using the same
/// `values` convention as [`nstep_return`].
pub fn lambda_return(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return contract(format!("lambda must lie in [0, 1], got {lambda}"));
    }
    let len = rewards.len();
    if values.len() != len + 1 {
        return contract(format!(
            "expected {} bootstrap values for {len} rewards, got {}",
            len + 1,
            values.len()
        ));
    }
    let mut out = vec![0.0; len];
    let mut next = values[len];
    for t in (0..len).rev() {
        let g = if t + 1 == len {
            rewards[t] + gamma * values[len]
        } else {
            rewards[t] + gamma * ((1.0 - lambda) * values[t + 1] + lambda * next)
        };
        out[t] = g;
        next = g;
    }
    Ok(out)
}
