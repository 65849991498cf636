//! Small differentiable-network toolkit: dense and LSTM layers with
//! hand-written backward passes, Adam, gradient clipping, finite-difference
//! checking and a binary checkpoint format.
//!
//! Layers keep a tape of cached forward passes. `forward_train` pushes onto
//! the tape and `backward` pops from it, so a sequence forwarded step by step
//! is backpropagated in reverse order.

mod adam;
mod checkpoint;
mod dense;
mod gradcheck;
mod lstm;
mod net;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use dense::{Activation, DenseLayer, LEAKY_SLOPE};
pub use gradcheck::{gradient_check, GradCheckFailure, GradCheckReport, DEFAULT_PARAM_CAP, FD_STEP};
pub use lstm::{HiddenState, LstmCell};
pub use net::{Mlp, RecurrentNet};
pub use tensor::Tensor;

use crate::error::{Error, Result};

/// Anything owning trainable tensors.
///
/// Visit order must be stable: optimizers, checkpoints and target-network
/// synchronisation all rely on it.
pub trait Parameterized {
    fn visit(&self, f: &mut dyn FnMut(&str, &Tensor));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor));

    /// Drops any cached forward passes.
    fn clear_tape(&mut self);

    fn num_parameters(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, t| n += t.len());
        n
    }

    fn zero_grad(&mut self) {
        self.visit_mut(&mut |_, t| t.zero_grad());
    }

    fn grad_norm(&self) -> f64 {
        let mut sq = 0.0;
        self.visit(&mut |_, t| sq += t.grad().iter().map(|g| g * g).sum::<f64>());
        sq.sqrt()
    }

    /// Rescales gradients so their global L2 norm is at most `max_norm`.
    /// Returns the norm before clipping.
    fn clip_grad_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.grad_norm();
        if norm.is_finite() && norm > max_norm && max_norm > 0.0 {
            let scale = max_norm / norm;
            self.visit_mut(&mut |_, t| t.grad_mut().iter_mut().for_each(|g| *g *= scale));
        }
        norm
    }

    /// Flattened parameter values in visit order.
    fn flat_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        self.visit(&mut |_, t| out.extend_from_slice(t.values()));
        out
    }
}

/// Overwrites `target`'s parameter values with `live`'s.
pub fn copy_parameters<P: Parameterized + ?Sized>(live: &P, target: &mut P) -> Result<()> {
    let mut blocks: Vec<(String, Tensor)> = Vec::new();
    live.visit(&mut |name, t| blocks.push((name.to_string(), t.clone())));
    let mut idx = 0;
    let mut err = None;
    target.visit_mut(&mut |name, t| {
        if err.is_some() {
            return;
        }
        match blocks.get(idx) {
            Some((src_name, src)) if src_name == name => {
                if let Err(e) = t.copy_values_from(src) {
                    err = Some(e);
                }
            }
            _ => {
                err = Some(Error::Contract(format!(
                    "architecture mismatch at parameter block `{name}`"
                )))
            }
        }
        idx += 1;
    });
    if let Some(e) = err {
        return Err(e);
    }
    if idx != blocks.len() {
        return Err(Error::Contract(format!(
            "architecture mismatch: {} blocks vs {idx}",
            blocks.len()
        )));
    }
    Ok(())
}

/// Numerically stable softmax with temperature.
pub fn softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits
        .iter()
        .map(|&l| ((l - max) / temperature).exp())
        .collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Draws an index from a categorical distribution with one uniform draw.
pub fn sample_categorical<R: rand::Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Prefixes every visited block name with `prefix.`.
pub(crate) fn visit_prefixed<P: Parameterized + ?Sized>(
    p: &P,
    prefix: &str,
    f: &mut dyn FnMut(&str, &Tensor),
) {
    p.visit(&mut |name, t| f(&format!("{prefix}.{name}"), t));
}

pub(crate) fn visit_prefixed_mut<P: Parameterized + ?Sized>(
    p: &mut P,
    prefix: &str,
    f: &mut dyn FnMut(&str, &mut Tensor),
) {
    p.visit_mut(&mut |name, t| f(&format!("{prefix}.{name}"), t));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_is_normalised_and_ordered() {
        let p = softmax(&[2.0_f64.ln(), 0.0, 0.0, 0.0], 1.0);
        let expect = [0.4, 0.2, 0.2, 0.2];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let big = softmax(&[1000.0, 0.0], 1.0);
        assert!(big.iter().all(|v| v.is_finite()));
    }
}
