use serde::{Deserialize, Serialize};

use super::Parameterized;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias correction. Moment buffers are sized on the first step and
/// must match the parameter layout on every later step.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    step_count: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step_count: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Applies one update from the accumulated gradients, then clears them.
    ///
    /// A non-finite gradient aborts before any parameter is touched. If every
    /// gradient is exactly zero the parameters and moments are left as they
    /// are and only the step counter advances.
    pub fn step<P: Parameterized + ?Sized>(&mut self, params: &mut P) -> Result<()> {
        let n = params.num_parameters();
        let mut bad: Option<String> = None;
        let mut all_zero = true;
        params.visit(&mut |name, t| {
            if bad.is_none() && t.grad().iter().any(|g| !g.is_finite()) {
                bad = Some(name.to_string());
            }
            if all_zero && t.grad().iter().any(|&g| g != 0.0) {
                all_zero = false;
            }
        });
        if let Some(block) = bad {
            return Err(Error::NonFinite {
                block,
                context: "gradient passed to Adam".into(),
            });
        }
        if self.first_moment.is_empty() {
            self.first_moment = vec![0.0; n];
            self.second_moment = vec![0.0; n];
        } else if self.first_moment.len() != n {
            return Err(Error::Contract(format!(
                "Adam moments sized for {} parameters, network has {n}",
                self.first_moment.len()
            )));
        }

        self.step_count += 1;
        if all_zero {
            return Ok(());
        }
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step_count as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        let (m, v) = (&mut self.first_moment, &mut self.second_moment);
        let mut offset = 0;
        params.visit_mut(&mut |_, tensor| {
            let (values, grads) = tensor.values_and_grad_mut();
            for (k, (p, g)) in values.iter_mut().zip(grads.iter_mut()).enumerate() {
                let j = offset + k;
                m[j] = beta1 * m[j] + (1.0 - beta1) * *g;
                v[j] = beta2 * v[j] + (1.0 - beta2) * *g * *g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
                *g = 0.0;
            }
            offset += values.len();
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{DenseLayer, Tensor};

    struct Scalar(Tensor);

    impl Parameterized for Scalar {
        fn visit(&self, f: &mut dyn FnMut(&str, &Tensor)) {
            f("x", &self.0);
        }
        fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
            f("x", &mut self.0);
        }
        fn clear_tape(&mut self) {}
    }

    fn scalar(v: f64) -> Scalar {
        Scalar(Tensor::from_vec(&[1], vec![v]).unwrap())
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = scalar(2.0);
        let mut opt = Adam::new(AdamConfig::with_lr(0.1));
        opt.step(&mut p).unwrap();
        assert_eq!(p.0.values(), &[2.0]);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn zero_gradient_after_momentum_is_still_a_no_op() {
        let mut p = scalar(2.0);
        let mut opt = Adam::new(AdamConfig::with_lr(0.1));
        p.0.grad_mut()[0] = 1.0;
        opt.step(&mut p).unwrap();
        let after = p.0.values()[0];
        opt.step(&mut p).unwrap();
        assert_eq!(p.0.values()[0], after);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // t = 1: m̂ = g, v̂ = g², update = lr·g/(|g| + ε) = 0.1/(1 + 1e-8)
        let mut p = scalar(0.0);
        let mut opt = Adam::new(AdamConfig::with_lr(0.1));
        p.0.grad_mut()[0] = 1.0;
        opt.step(&mut p).unwrap();
        let expected = -0.1 / (1.0 + 1e-8);
        assert!((p.0.values()[0] - expected).abs() < 1e-15);
        assert_eq!(p.0.grad(), &[0.0]);
    }

    #[test]
    fn constant_gradient_moves_against_its_sign() {
        for g in [3.0, -0.5] {
            let mut p = scalar(1.0);
            let mut opt = Adam::new(AdamConfig::with_lr(0.01));
            for _ in 0..50 {
                p.0.grad_mut()[0] = g;
                opt.step(&mut p).unwrap();
            }
            assert!((p.0.values()[0] - 1.0).signum() == -g.signum());
        }
    }

    #[test]
    fn nan_gradient_names_block() {
        let mut layer = DenseLayer::from_parts(
            Tensor::zeros(&[1, 1]),
            Tensor::zeros(&[1]),
            crate::numerics::Activation::Identity,
        )
        .unwrap();
        layer.bias_mut().grad_mut()[0] = f64::NAN;
        let err = Adam::new(AdamConfig::default()).step(&mut layer).unwrap_err();
        assert!(err.to_string().contains("bias"), "{err}");
    }
}
