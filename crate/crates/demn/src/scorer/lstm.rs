//! Single-direction LSTM: forward pass with full caching and the matching
//! backpropagation-through-time pass.
//!
//! Gate layout stacks the four gates along rows of the weight matrices:
//! input gate, forget gate, cell candidate, output gate. Initial hidden and
//! cell states are zero.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::numcore::{add_outer, mat_tvec, mat_vec, Matrix, ParamGroup};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weights for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// Input-to-gates weights, (4H x D).
    pub w_input: ParamGroup,
    /// Recurrent weights, (4H x H).
    pub w_recur: ParamGroup,
    /// Gate biases, (1 x 4H).
    pub bias: ParamGroup,
}

impl LstmParams {
    pub fn init(prefix: &str, embed_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let in_bound = 1.0 / (embed_dim as f64).sqrt();
        let rec_bound = 1.0 / (hidden as f64).sqrt();
        let w_input = Matrix::from_vec(
            4 * hidden,
            embed_dim,
            (0..4 * hidden * embed_dim)
                .map(|_| rng.gen_range(-in_bound..in_bound))
                .collect(),
        )
        .unwrap();
        let w_recur = Matrix::from_vec(
            4 * hidden,
            hidden,
            (0..4 * hidden * hidden)
                .map(|_| rng.gen_range(-rec_bound..rec_bound))
                .collect(),
        )
        .unwrap();
        LstmParams {
            w_input: ParamGroup::new(format!("{prefix}.w_input"), w_input),
            w_recur: ParamGroup::new(format!("{prefix}.w_recur"), w_recur),
            bias: ParamGroup::new(format!("{prefix}.bias"), Matrix::zeros(1, 4 * hidden)),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_recur.value.cols()
    }
}

/// Everything the backward pass needs from one timestep.
#[derive(Debug, Clone)]
pub struct StepState {
    /// Post-activation gates, concatenated (i, f, g, o), length 4H.
    pub gates: Vec<f64>,
    pub cell: Vec<f64>,
    pub cell_tanh: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// Cached states for a whole sequence, in processing order.
#[derive(Debug, Clone, Default)]
pub struct SeqCache {
    pub steps: Vec<StepState>,
}

/// Runs the recurrence over `inputs` (already in processing order).
pub fn run(params: &LstmParams, inputs: &[Vec<f64>]) -> SeqCache {
    let h = params.hidden();
    let mut steps: Vec<StepState> = Vec::with_capacity(inputs.len());
    let zeros = vec![0.0; h];
    for (t, x) in inputs.iter().enumerate() {
        let (h_prev, c_prev) = if t == 0 {
            (&zeros, &zeros)
        } else {
            let prev = &steps[t - 1];
            (&prev.hidden, &prev.cell)
        };
        let mut a = mat_vec(&params.w_input.value, x).expect("input width");
        let rec = mat_vec(&params.w_recur.value, h_prev).expect("hidden width");
        for ((ai, ri), bi) in a.iter_mut().zip(&rec).zip(params.bias.value.row(0)) {
            *ai += ri + bi;
        }
        let mut gates = vec![0.0; 4 * h];
        for k in 0..h {
            gates[k] = sigmoid(a[k]); // input
            gates[h + k] = sigmoid(a[h + k]); // forget
            gates[2 * h + k] = a[2 * h + k].tanh(); // candidate
            gates[3 * h + k] = sigmoid(a[3 * h + k]); // output
        }
        let mut cell = vec![0.0; h];
        let mut cell_tanh = vec![0.0; h];
        let mut hidden = vec![0.0; h];
        for k in 0..h {
            cell[k] = gates[h + k] * c_prev[k] + gates[k] * gates[2 * h + k];
            cell_tanh[k] = cell[k].tanh();
            hidden[k] = gates[3 * h + k] * cell_tanh[k];
        }
        steps.push(StepState {
            gates,
            cell,
            cell_tanh,
            hidden,
        });
    }
    SeqCache { steps }
}

/// Backpropagation through time. `upstream[t]` is the loss gradient on the
/// hidden state at step `t`. Accumulates weight gradients into `params` and
/// returns the gradient on each input.
pub fn backward(
    params: &mut LstmParams,
    inputs: &[Vec<f64>],
    cache: &SeqCache,
    upstream: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let h = params.hidden();
    let t_len = inputs.len();
    debug_assert_eq!(cache.steps.len(), t_len);
    debug_assert_eq!(upstream.len(), t_len);

    let zeros = vec![0.0; h];
    let mut d_inputs: Vec<Vec<f64>> = Vec::with_capacity(t_len);
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut da = vec![0.0; 4 * h];
    for _ in 0..t_len {
        d_inputs.push(Vec::new());
    }
    for t in (0..t_len).rev() {
        let step = &cache.steps[t];
        let (h_prev, c_prev) = if t == 0 {
            (&zeros, &zeros)
        } else {
            let prev = &cache.steps[t - 1];
            (&prev.hidden, &prev.cell)
        };
        for k in 0..h {
            let i = step.gates[k];
            let f = step.gates[h + k];
            let g = step.gates[2 * h + k];
            let o = step.gates[3 * h + k];
            let tau = step.cell_tanh[k];
            let dh = upstream[t][k] + dh_next[k];
            let d_o = dh * tau;
            let dc = dc_next[k] + dh * o * (1.0 - tau * tau);
            let d_i = dc * g;
            let d_f = dc * c_prev[k];
            let d_g = dc * i;
            da[k] = d_i * i * (1.0 - i);
            da[h + k] = d_f * f * (1.0 - f);
            da[2 * h + k] = d_g * (1.0 - g * g);
            da[3 * h + k] = d_o * o * (1.0 - o);
            dc_next[k] = dc * f;
        }
        add_outer(&mut params.w_input.grad, &da, &inputs[t]);
        add_outer(&mut params.w_recur.grad, &da, h_prev);
        for (b, &d) in params.bias.grad.row_mut(0).iter_mut().zip(&da) {
            *b += d;
        }
        d_inputs[t] = mat_tvec(&params.w_input.value, &da).expect("input width");
        dh_next = mat_tvec(&params.w_recur.value, &da).expect("hidden width");
    }
    d_inputs
}
