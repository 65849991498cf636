use rand::Rng;

use super::{
    visit_prefixed, visit_prefixed_mut, Activation, DenseLayer, HiddenState, LstmCell,
    Parameterized, Tensor,
};
use crate::error::{Error, Result};

/// Stack of dense layers; every hidden layer uses leaky ReLU, the output layer is linear.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let n = sizes.len().saturating_sub(1);
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n {
                    Activation::Identity
                } else {
                    Activation::LeakyRelu
                };
                DenseLayer::new(sizes[i], sizes[i + 1], act, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim())
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut x = input.to_vec();
        for layer in &self.layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_train(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        let mut x = input.to_vec();
        for layer in &mut self.layers {
            x = layer.forward_train(&x)?;
        }
        Ok(x)
    }

    /// Backpropagates the most recent `forward_train` call.
    pub fn backward(&mut self, grad_out: &[f64]) -> Result<Vec<f64>> {
        let mut g = grad_out.to_vec();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }
}

impl Parameterized for Mlp {
    fn visit(&self, f: &mut dyn FnMut(&str, &Tensor)) {
        for (i, l) in self.layers.iter().enumerate() {
            visit_prefixed(l, &format!("layer{i}"), f);
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
        for (i, l) in self.layers.iter_mut().enumerate() {
            visit_prefixed_mut(l, &format!("layer{i}"), f);
        }
    }

    fn clear_tape(&mut self) {
        self.layers.iter_mut().for_each(|l| l.clear_tape());
    }
}

/// FC (leaky ReLU) -> LSTM -> FC (linear). Used for decentralized actors and
/// for history-conditioned value critics.
#[derive(Debug, Clone)]
pub struct RecurrentNet {
    input: DenseLayer,
    lstm: LstmCell,
    output: DenseLayer,
    /// Number of cached steps still awaiting backward.
    pending: usize,
    /// Gradients flowing into the hidden/cell state of the step currently
    /// at the top of the tape (from the later step already backpropagated).
    carry: Option<(Vec<f64>, Vec<f64>)>,
}

impl RecurrentNet {
    pub fn new<R: Rng + ?Sized>(in_dim: usize, hidden: usize, out_dim: usize, rng: &mut R) -> Self {
        Self {
            input: DenseLayer::new(in_dim, hidden, Activation::LeakyRelu, rng),
            lstm: LstmCell::new(hidden, hidden, rng),
            output: DenseLayer::new(hidden, out_dim, Activation::Identity, rng),
            pending: 0,
            carry: None,
        }
    }

    pub fn from_parts(input: DenseLayer, lstm: LstmCell, output: DenseLayer) -> Result<Self> {
        if input.out_dim() != lstm.input_size() || lstm.hidden_size() != output.in_dim() {
            return Err(Error::Shape {
                expected: vec![input.out_dim(), lstm.hidden_size()],
                actual: vec![lstm.input_size(), output.in_dim()],
            });
        }
        Ok(Self {
            input,
            lstm,
            output,
            pending: 0,
            carry: None,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.input.in_dim()
    }

    pub fn hidden_size(&self) -> usize {
        self.lstm.hidden_size()
    }

    pub fn out_dim(&self) -> usize {
        self.output.out_dim()
    }

    pub fn output_layer_mut(&mut self) -> &mut DenseLayer {
        &mut self.output
    }

    pub fn initial_state(&self) -> HiddenState {
        self.lstm.initial_state()
    }

    pub fn step(&self, input: &[f64], state: &HiddenState) -> Result<(Vec<f64>, HiddenState)> {
        let x = self.input.forward(input)?;
        let (h, next) = self.lstm.forward(&x, state)?;
        Ok((self.output.forward(&h)?, next))
    }

    pub fn step_train(
        &mut self,
        input: &[f64],
        state: &HiddenState,
    ) -> Result<(Vec<f64>, HiddenState)> {
        let x = self.input.forward_train(input)?;
        let (h, next) = self.lstm.forward_train(&x, state)?;
        let out = self.output.forward_train(&h)?;
        self.pending += 1;
        Ok((out, next))
    }

    /// Backpropagates the most recent cached step given the loss gradient at
    /// its output. Calls must come in reverse order of `step_train`; the
    /// recurrent gradient is carried between calls. Returns the gradient with
    /// respect to that step's input.
    pub fn backward_step(&mut self, grad_out: &[f64]) -> Result<Vec<f64>> {
        if self.pending == 0 {
            return Err(Error::NoForward("recurrent net".into()));
        }
        let hs = self.hidden_size();
        let mut dh = self.output.backward(grad_out)?;
        let (carry_h, carry_c) = self
            .carry
            .take()
            .unwrap_or_else(|| (vec![0.0; hs], vec![0.0; hs]));
        for (a, b) in dh.iter_mut().zip(&carry_h) {
            *a += b;
        }
        let (dx, dh_prev, dc_prev) = self.lstm.backward(&dh, &carry_c)?;
        let grad_in = self.input.backward(&dx)?;
        self.pending -= 1;
        if self.pending > 0 {
            self.carry = Some((dh_prev, dc_prev));
        }
        Ok(grad_in)
    }

    /// Forwards a whole sequence from the initial state with caching.
    pub fn sequence_train(&mut self, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let mut state = self.initial_state();
        let mut outs = Vec::with_capacity(inputs.len());
        for x in inputs {
            let (o, s) = self.step_train(x, &state)?;
            state = s;
            outs.push(o);
        }
        Ok(outs)
    }

    /// Forwards a whole sequence from the initial state without caching.
    pub fn sequence(&self, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let mut state = self.initial_state();
        let mut outs = Vec::with_capacity(inputs.len());
        for x in inputs {
            let (o, s) = self.step(x, &state)?;
            state = s;
            outs.push(o);
        }
        Ok(outs)
    }

    /// Full backpropagation through time for a sequence cached with
    /// `sequence_train`; `grad_outs[t]` is the loss gradient at step `t`.
    pub fn backward_sequence(&mut self, grad_outs: &[Vec<f64>]) -> Result<()> {
        for g in grad_outs.iter().rev() {
            self.backward_step(g)?;
        }
        Ok(())
    }
}

impl Parameterized for RecurrentNet {
    fn visit(&self, f: &mut dyn FnMut(&str, &Tensor)) {
        visit_prefixed(&self.input, "input", f);
        visit_prefixed(&self.lstm, "lstm", f);
        visit_prefixed(&self.output, "output", f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
        visit_prefixed_mut(&mut self.input, "input", f);
        visit_prefixed_mut(&mut self.lstm, "lstm", f);
        visit_prefixed_mut(&mut self.output, "output", f);
    }

    fn clear_tape(&mut self) {
        self.input.clear_tape();
        self.lstm.clear_tape();
        self.output.clear_tape();
        self.pending = 0;
        self.carry = None;
    }
}
