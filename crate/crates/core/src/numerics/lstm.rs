use rand::Rng;

use super::{Parameterized, Tensor};
use crate::error::{Error, Result};

/// Recurrent summary carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl HiddenState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            h: vec![0.0; hidden_size],
            c: vec![0.0; hidden_size],
        }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

#[derive(Debug, Clone)]
struct LstmCache {
    input: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Activated gates laid out `[i, f, g, o]`.
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Standard LSTM cell. Gate blocks are stacked in the order input, forget,
/// candidate, output along the first axis of every parameter tensor.
#[derive(Debug, Clone)]
pub struct LstmCell {
    input_weights: Tensor,
    recurrent_weights: Tensor,
    bias: Tensor,
    hidden_size: usize,
    tape: Vec<LstmCache>,
}

impl LstmCell {
    /// Uniform `±1/sqrt(fan_in)` weights, zero biases except the forget gate at 1.0.
    pub fn new<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let input_weights = Tensor::uniform(
            &[4 * hidden_size, input_size],
            1.0 / (input_size as f64).sqrt(),
            rng,
        );
        let recurrent_weights = Tensor::uniform(
            &[4 * hidden_size, hidden_size],
            1.0 / (hidden_size as f64).sqrt(),
            rng,
        );
        let mut bias = Tensor::zeros(&[4 * hidden_size]);
        bias.values_mut()[hidden_size..2 * hidden_size].fill(1.0);
        Self {
            input_weights,
            recurrent_weights,
            bias,
            hidden_size,
            tape: Vec::new(),
        }
    }

    pub fn from_parts(
        input_weights: Tensor,
        recurrent_weights: Tensor,
        bias: Tensor,
    ) -> Result<Self> {
        let rows = bias.len();
        if rows % 4 != 0 || rows == 0 {
            return Err(Error::Contract(format!(
                "LSTM bias length {rows} is not a positive multiple of 4"
            )));
        }
        let hidden_size = rows / 4;
        if input_weights.shape().len() != 2 || input_weights.shape()[0] != rows {
            return Err(Error::Shape {
                expected: vec![rows, input_weights.shape().last().copied().unwrap_or(0)],
                actual: input_weights.shape().to_vec(),
            });
        }
        if recurrent_weights.shape() != [rows, hidden_size] {
            return Err(Error::Shape {
                expected: vec![rows, hidden_size],
                actual: recurrent_weights.shape().to_vec(),
            });
        }
        Ok(Self {
            input_weights,
            recurrent_weights,
            bias,
            hidden_size,
            tape: Vec::new(),
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn input_size(&self) -> usize {
        self.input_weights.shape()[1]
    }

    pub fn initial_state(&self) -> HiddenState {
        HiddenState::zeros(self.hidden_size)
    }

    pub fn bias_mut(&mut self) -> &mut Tensor {
        &mut self.bias
    }

    fn gates(&self, input: &[f64], state: &HiddenState) -> Result<Vec<f64>> {
        let n_in = self.input_size();
        let hs = self.hidden_size;
        if input.len() != n_in {
            return Err(Error::Shape {
                expected: vec![n_in],
                actual: vec![input.len()],
            });
        }
        if state.h.len() != hs || state.c.len() != hs {
            return Err(Error::Shape {
                expected: vec![hs],
                actual: vec![state.h.len(), state.c.len()],
            });
        }
        let wx = self.input_weights.values();
        let wh = self.recurrent_weights.values();
        let mut z = self.bias.values().to_vec();
        for (r, zr) in z.iter_mut().enumerate() {
            let a: f64 = wx[r * n_in..(r + 1) * n_in]
                .iter()
                .zip(input)
                .map(|(w, x)| w * x)
                .sum();
            let b: f64 = wh[r * hs..(r + 1) * hs]
                .iter()
                .zip(&state.h)
                .map(|(w, h)| w * h)
                .sum();
            *zr += a + b;
        }
        for (r, zr) in z.iter_mut().enumerate() {
            *zr = if (2 * hs..3 * hs).contains(&r) {
                zr.tanh()
            } else {
                sigmoid(*zr)
            };
        }
        Ok(z)
    }

    fn combine(&self, gates: &[f64], state: &HiddenState) -> (HiddenState, Vec<f64>) {
        let hs = self.hidden_size;
        let mut c = vec![0.0; hs];
        let mut h = vec![0.0; hs];
        let mut tanh_c = vec![0.0; hs];
        for k in 0..hs {
            let (i, f, g, o) = (gates[k], gates[hs + k], gates[2 * hs + k], gates[3 * hs + k]);
            c[k] = f * state.c[k] + i * g;
            tanh_c[k] = c[k].tanh();
            h[k] = o * tanh_c[k];
        }
        (HiddenState { h, c }, tanh_c)
    }

    /// Returns `(h', state')`; `h'` is also `state'.h`.
    pub fn forward(&self, input: &[f64], state: &HiddenState) -> Result<(Vec<f64>, HiddenState)> {
        let gates = self.gates(input, state)?;
        let (next, _) = self.combine(&gates, state);
        Ok((next.h.clone(), next))
    }

    pub fn forward_train(
        &mut self,
        input: &[f64],
        state: &HiddenState,
    ) -> Result<(Vec<f64>, HiddenState)> {
        let gates = self.gates(input, state)?;
        let (next, tanh_c) = self.combine(&gates, state);
        self.tape.push(LstmCache {
            input: input.to_vec(),
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            gates,
            tanh_c,
        });
        Ok((next.h.clone(), next))
    }

    /// Backpropagates one step. `grad_h` and `grad_c` are the total gradients
    /// reaching this step's outputs; returns `(grad_input, grad_h_prev, grad_c_prev)`.
    pub fn backward(
        &mut self,
        grad_h: &[f64],
        grad_c: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let cache = self
            .tape
            .pop()
            .ok_or_else(|| Error::NoForward("lstm".into()))?;
        let hs = self.hidden_size;
        let n_in = self.input_size();
        if grad_h.len() != hs || grad_c.len() != hs {
            return Err(Error::Shape {
                expected: vec![hs],
                actual: vec![grad_h.len(), grad_c.len()],
            });
        }
        let g = &cache.gates;
        let mut dz = vec![0.0; 4 * hs];
        let mut grad_c_prev = vec![0.0; hs];
        for k in 0..hs {
            let (i, f, cand, o) = (g[k], g[hs + k], g[2 * hs + k], g[3 * hs + k]);
            let tc = cache.tanh_c[k];
            let d_o = grad_h[k] * tc;
            let dc = grad_c[k] + grad_h[k] * o * (1.0 - tc * tc);
            dz[k] = dc * cand * i * (1.0 - i);
            dz[hs + k] = dc * cache.c_prev[k] * f * (1.0 - f);
            dz[2 * hs + k] = dc * i * (1.0 - cand * cand);
            dz[3 * hs + k] = d_o * o * (1.0 - o);
            grad_c_prev[k] = dc * f;
        }

        let mut grad_input = vec![0.0; n_in];
        let mut grad_h_prev = vec![0.0; hs];
        {
            let (w, wg) = self.input_weights.values_and_grad_mut();
            for (r, &d) in dz.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = r * n_in;
                for j in 0..n_in {
                    wg[row + j] += d * cache.input[j];
                    grad_input[j] += d * w[row + j];
                }
            }
        }
        {
            let (w, wg) = self.recurrent_weights.values_and_grad_mut();
            for (r, &d) in dz.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = r * hs;
                for j in 0..hs {
                    wg[row + j] += d * cache.h_prev[j];
                    grad_h_prev[j] += d * w[row + j];
                }
            }
        }
        for (b, d) in self.bias.grad_mut().iter_mut().zip(&dz) {
            *b += d;
        }
        Ok((grad_input, grad_h_prev, grad_c_prev))
    }

    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }
}

impl Parameterized for LstmCell {
    fn visit(&self, f: &mut dyn FnMut(&str, &Tensor)) {
        f("input_weights", &self.input_weights);
        f("recurrent_weights", &self.recurrent_weights);
        f("bias", &self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
        f("input_weights", &mut self.input_weights);
        f("recurrent_weights", &mut self.recurrent_weights);
        f("bias", &mut self.bias);
    }

    fn clear_tape(&mut self) {
        self.tape.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(wx: [f64; 4], wh: [f64; 4], b: [f64; 4]) -> LstmCell {
        LstmCell::from_parts(
            Tensor::from_vec(&[4, 1], wx.to_vec()).unwrap(),
            Tensor::from_vec(&[4, 1], wh.to_vec()).unwrap(),
            Tensor::from_vec(&[4], b.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_parameters_give_zero_state() {
        let c = cell([0.0; 4], [0.0; 4], [0.0; 4]);
        let (h, s) = c.forward(&[3.7], &HiddenState::zeros(1)).unwrap();
        assert_eq!(h, vec![0.0]);
        assert_eq!(s.c, vec![0.0]);
    }

    #[test]
    fn forget_bias_alone_keeps_empty_cell_empty() {
        let c = cell([0.0; 4], [0.0; 4], [0.0, 20.0, 0.0, 0.0]);
        let (_, s) = c.forward(&[0.0], &HiddenState::zeros(1)).unwrap();
        assert_eq!(s.c, vec![0.0]);
        assert_eq!(s.h, vec![0.0]);
    }

    #[test]
    fn scalar_cell_matches_hand_evaluation() {
        // i = σ(0.55), f = σ(1.0), g = tanh(0.7), o = σ(0.25)
        // c' = f·(−0.2) + i·g, h' = o·tanh(c')
        let c = cell(
            [0.5, -0.3, 0.8, 0.2],
            [0.1, 0.2, -0.4, 0.3],
            [0.0, 1.2, 0.1, -0.1],
        );
        let state = HiddenState {
            h: vec![0.5],
            c: vec![-0.2],
        };
        let (h, s) = c.forward(&[1.0], &state).unwrap();
        assert!((s.c[0] - 0.237_039_401_804_075_48).abs() < 1e-15, "{}", s.c[0]);
        assert!((h[0] - 0.130_817_009_014_378_84).abs() < 1e-15, "{}", h[0]);
    }

    #[test]
    fn new_cell_has_unit_forget_bias() {
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        let c = LstmCell::new(3, 2, &mut rng);
        let mut biases = Vec::new();
        c.visit(&mut |name, t| {
            if name == "bias" {
                biases = t.values().to_vec();
            }
        });
        assert_eq!(biases, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn backward_requires_forward() {
        let mut c = cell([0.0; 4], [0.0; 4], [0.0; 4]);
        assert!(matches!(
            c.backward(&[1.0], &[0.0]),
            Err(Error::NoForward(_))
        ));
    }
}
