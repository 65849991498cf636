use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Parameterized, Tensor};
use crate::error::{Error, Result};

pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// Leaky ReLU with slope 0.01 on the negative side.
    LeakyRelu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::LeakyRelu if x < 0.0 => LEAKY_SLOPE * x,
            _ => x,
        }
    }

    #[inline]
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::LeakyRelu if pre < 0.0 => LEAKY_SLOPE,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
struct DenseCache {
    input: Vec<f64>,
    pre: Vec<f64>,
}

/// Fully connected layer `activation(W x + b)` with `W` stored `[out, in]`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    weights: Tensor,
    bias: Tensor,
    activation: Activation,
    tape: Vec<DenseCache>,
}

impl DenseLayer {
    /// Weights uniform in `±1/sqrt(fan_in)`, zero bias.
    pub fn new<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        Self {
            weights: Tensor::uniform(&[out_dim, in_dim], bound, rng),
            bias: Tensor::zeros(&[out_dim]),
            activation,
            tape: Vec::new(),
        }
    }

    pub fn from_parts(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        if weights.shape().len() != 2 || bias.shape() != [weights.shape()[0]] {
            return Err(Error::Shape {
                expected: vec![weights.shape()[0]],
                actual: bias.shape().to_vec(),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
            tape: Vec::new(),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn out_dim(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Tensor {
        &mut self.weights
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut Tensor {
        &mut self.bias
    }

    fn pre_activation(&self, input: &[f64]) -> Result<Vec<f64>> {
        let n_in = self.in_dim();
        if input.len() != n_in {
            return Err(Error::Shape {
                expected: vec![n_in],
                actual: vec![input.len()],
            });
        }
        let w = self.weights.values();
        let pre = self
            .bias
            .values()
            .iter()
            .enumerate()
            .map(|(o, b)| {
                let row = &w[o * n_in..(o + 1) * n_in];
                b + row.iter().zip(input).map(|(a, x)| a * x).sum::<f64>()
            })
            .collect();
        Ok(pre)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.pre_activation(input)?;
        for v in &mut out {
            *v = self.activation.apply(*v);
        }
        Ok(out)
    }

    /// Forward pass that records what `backward` needs.
    pub fn forward_train(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        let pre = self.pre_activation(input)?;
        let out = pre.iter().map(|&p| self.activation.apply(p)).collect();
        self.tape.push(DenseCache {
            input: input.to_vec(),
            pre,
        });
        Ok(out)
    }

    /// Consumes the most recent cached forward pass, accumulates parameter
    /// gradients and returns the gradient with respect to that pass's input.
    pub fn backward(&mut self, grad_out: &[f64]) -> Result<Vec<f64>> {
        let cache = self
            .tape
            .pop()
            .ok_or_else(|| Error::NoForward("dense".into()))?;
        let (n_out, n_in) = (self.out_dim(), self.in_dim());
        if grad_out.len() != n_out {
            return Err(Error::Shape {
                expected: vec![n_out],
                actual: vec![grad_out.len()],
            });
        }
        let mut grad_in = vec![0.0; n_in];
        let (w, wg) = self.weights.values_and_grad_mut();
        let mut delta = vec![0.0; n_out];
        for o in 0..n_out {
            let d = grad_out[o] * self.activation.derivative(cache.pre[o]);
            delta[o] = d;
            if d == 0.0 {
                continue;
            }
            let row = o * n_in;
            for i in 0..n_in {
                wg[row + i] += d * cache.input[i];
                grad_in[i] += d * w[row + i];
            }
        }
        for (g, d) in self.bias.grad_mut().iter_mut().zip(&delta) {
            *g += d;
        }
        Ok(grad_in)
    }

    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }

    pub fn clear_tape(&mut self) {
        self.tape.clear();
    }
}

impl Parameterized for DenseLayer {
    fn visit(&self, f: &mut dyn FnMut(&str, &Tensor)) {
        f("weights", &self.weights);
        f("bias", &self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
        f("weights", &mut self.weights);
        f("bias", &mut self.bias);
    }

    fn clear_tape(&mut self) {
        self.tape.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity(act: Activation) -> DenseLayer {
        DenseLayer::from_parts(
            Tensor::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap(),
            Tensor::zeros(&[2]),
            act,
        )
        .unwrap()
    }

    #[test]
    fn identity_layer_passes_through() {
        let out = identity(Activation::Identity).forward(&[1.0, -2.0]).unwrap();
        assert_eq!(out, vec![1.0, -2.0]);
    }

    #[test]
    fn leaky_relu_scales_negative_branch() {
        let out = identity(Activation::LeakyRelu).forward(&[1.0, -2.0]).unwrap();
        assert_eq!(out, vec![1.0, -0.02]);
    }

    #[test]
    fn zero_input_yields_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut layer = DenseLayer::new(2, 3, Activation::Identity, &mut rng);
        for (i, b) in layer.bias_mut().values_mut().iter_mut().enumerate() {
            *b = 0.25 * i as f64 + 0.1;
        }
        let out = layer.forward(&[0.0, 0.0]).unwrap();
        assert_eq!(out, layer.bias().values().to_vec());
    }

    #[test]
    fn dimension_mismatch_reports_both_shapes() {
        let layer = identity(Activation::Identity);
        let err = layer.forward(&[1.0, 2.0, 3.0]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2]") && msg.contains("[3]"), "{msg}");
    }

    #[test]
    fn sum_loss_gradient_is_outer_product_of_ones_and_input() {
        let mut layer = identity(Activation::Identity);
        let x = [0.5, -3.0];
        layer.forward_train(&x).unwrap();
        layer.backward(&[1.0, 1.0]).unwrap();
        assert_eq!(layer.weights().grad(), &[0.5, -3.0, 0.5, -3.0]);
        assert_eq!(layer.bias().grad(), &[1.0, 1.0]);
    }

    #[test]
    fn backward_without_forward_is_a_state_error() {
        let mut layer = identity(Activation::Identity);
        assert!(matches!(layer.backward(&[1.0, 1.0]), Err(Error::NoForward(_))));
    }
}
