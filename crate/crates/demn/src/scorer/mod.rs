//! Attention BiLSTM sequence matcher used by both the story-selection and
//! answer-selection scoring functions.
//!
//! Two token sequences are each encoded with a bidirectional LSTM. The X-side
//! sentence vector is the average of its token vectors. On the Y side, each
//! token vector is reweighted by a softmax attention conditioned on the X
//! sentence vector, then averaged. The score is the cosine similarity of the
//! two sentence vectors. With attention off, the Y side is a plain average.
//!
//! Every gradient here is hand-derived and checked against the central
//! finite-difference oracle in `numcore`.

pub mod lstm;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numcore::{
    add_outer, axpy, dot, l2_norm, mat_tvec, mat_vec, softmax, Matrix, ParamGroup, NORM_EPS,
};
use lstm::{LstmParams, SeqCache};

/// Architecture sizes for one scorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScorerConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    /// Hidden units per direction; token vectors have length 2*hidden.
    pub hidden: usize,
    /// Attention space dimension.
    pub attn_dim: usize,
}

impl ScorerConfig {
    /// Desk-scale defaults: gradient-checkable, minutes-scale training.
    pub fn desk(vocab_size: usize) -> Self {
        ScorerConfig {
            vocab_size,
            embed_dim: 32,
            hidden: 32,
            attn_dim: 32,
        }
    }
}

/// All trainable parameters of one scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerParams {
    pub cfg: ScorerConfig,
    pub embedding: ParamGroup,
    pub fwd: LstmParams,
    pub bwd: LstmParams,
    /// Attention map on Y-side token vectors, (attn_dim x 2H).
    pub attn_token: ParamGroup,
    /// Attention map on the X-side sentence vector, (attn_dim x 2H).
    pub attn_query: ParamGroup,
    /// Attention scoring vector, (1 x attn_dim).
    pub attn_score: ParamGroup,
}

impl ScorerParams {
    pub fn init(cfg: ScorerConfig, rng: &mut ChaCha8Rng) -> Self {
        let emb = Matrix::from_vec(
            cfg.vocab_size,
            cfg.embed_dim,
            (0..cfg.vocab_size * cfg.embed_dim)
                .map(|_| rng.gen_range(-0.5..0.5))
                .collect(),
        )
        .unwrap();
        let fwd = LstmParams::init("fwd", cfg.embed_dim, cfg.hidden, rng);
        let bwd = LstmParams::init("bwd", cfg.embed_dim, cfg.hidden, rng);
        let attn_bound = 1.0 / ((2 * cfg.hidden) as f64).sqrt();
        let score_bound = 1.0 / (cfg.attn_dim as f64).sqrt();
        let attn_token = Matrix::from_vec(
            cfg.attn_dim,
            2 * cfg.hidden,
            (0..cfg.attn_dim * 2 * cfg.hidden)
                .map(|_| rng.gen_range(-attn_bound..attn_bound))
                .collect(),
        )
        .unwrap();
        let attn_query = Matrix::from_vec(
            cfg.attn_dim,
            2 * cfg.hidden,
            (0..cfg.attn_dim * 2 * cfg.hidden)
                .map(|_| rng.gen_range(-attn_bound..attn_bound))
                .collect(),
        )
        .unwrap();
        let attn_score = Matrix::from_vec(
            1,
            cfg.attn_dim,
            (0..cfg.attn_dim)
                .map(|_| rng.gen_range(-score_bound..score_bound))
                .collect(),
        )
        .unwrap();
        ScorerParams {
            cfg,
            embedding: ParamGroup::new("embedding", emb),
            fwd,
            bwd,
            attn_token: ParamGroup::new("attn_token", attn_token),
            attn_query: ParamGroup::new("attn_query", attn_query),
            attn_score: ParamGroup::new("attn_score", attn_score),
        }
    }

    pub fn init_seeded(cfg: ScorerConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init(cfg, &mut rng)
    }

    pub fn groups_mut(&mut self) -> Vec<&mut ParamGroup> {
        vec![
            &mut self.embedding,
            &mut self.fwd.w_input,
            &mut self.fwd.w_recur,
            &mut self.fwd.bias,
            &mut self.bwd.w_input,
            &mut self.bwd.w_recur,
            &mut self.bwd.bias,
            &mut self.attn_token,
            &mut self.attn_query,
            &mut self.attn_score,
        ]
    }

    pub fn groups(&self) -> Vec<&ParamGroup> {
        vec![
            &self.embedding,
            &self.fwd.w_input,
            &self.fwd.w_recur,
            &self.fwd.bias,
            &self.bwd.w_input,
            &self.bwd.w_recur,
            &self.bwd.bias,
            &self.attn_token,
            &self.attn_query,
            &self.attn_score,
        ]
    }

    /// Owned copies of all groups with `prefix.` prepended to each name.
    pub fn to_groups(&self, prefix: &str) -> Vec<ParamGroup> {
        self.groups()
            .into_iter()
            .map(|g| {
                let mut c = g.clone();
                c.name = format!("{prefix}.{}", g.name);
                c
            })
            .collect()
    }

    /// Rebuilds a scorer from named groups produced by [`Self::to_groups`].
    pub fn from_groups(cfg: ScorerConfig, prefix: &str, groups: &[ParamGroup]) -> Result<Self> {
        let find = |suffix: &str| -> Result<ParamGroup> {
            let want = format!("{prefix}.{suffix}");
            groups
                .iter()
                .find(|g| g.name == want)
                .cloned()
                .map(|mut g| {
                    g.name = suffix.to_string();
                    g
                })
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter block `{want}`")))
        };
        let expect = |g: &ParamGroup, rows: usize, cols: usize| -> Result<()> {
            if g.value.rows() != rows || g.value.cols() != cols {
                return Err(Error::Checkpoint(format!(
                    "block `{}` is {}x{}, expected {rows}x{cols}",
                    g.name,
                    g.value.rows(),
                    g.value.cols()
                )));
            }
            Ok(())
        };
        let (h, d, a) = (cfg.hidden, cfg.embed_dim, cfg.attn_dim);
        let embedding = find("embedding")?;
        expect(&embedding, cfg.vocab_size, d)?;
        let fwd = LstmParams {
            w_input: find("fwd.w_input")?,
            w_recur: find("fwd.w_recur")?,
            bias: find("fwd.bias")?,
        };
        let bwd = LstmParams {
            w_input: find("bwd.w_input")?,
            w_recur: find("bwd.w_recur")?,
            bias: find("bwd.bias")?,
        };
        for p in [&fwd, &bwd] {
            expect(&p.w_input, 4 * h, d)?;
            expect(&p.w_recur, 4 * h, h)?;
            expect(&p.bias, 1, 4 * h)?;
        }
        let attn_token = find("attn_token")?;
        let attn_query = find("attn_query")?;
        let attn_score = find("attn_score")?;
        expect(&attn_token, a, 2 * h)?;
        expect(&attn_query, a, 2 * h)?;
        expect(&attn_score, 1, a)?;
        Ok(ScorerParams {
            cfg,
            embedding,
            fwd,
            bwd,
            attn_token,
            attn_query,
            attn_score,
        })
    }

    pub fn zero_grads(&mut self) {
        for g in self.groups_mut() {
            g.zero_grad();
        }
    }
}

/// Attention intermediates kept for audit and for tests.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionTrace {
    /// Pre-score attention states, one per Y token.
    pub m_vectors: Vec<Vec<f64>>,
    /// Softmax weights over Y positions; nonnegative, sums to one.
    pub weights: Vec<f64>,
    /// Reweighted Y token vectors.
    pub updated_tokens: Vec<Vec<f64>>,
}

impl AttentionTrace {
    /// Asserts the simplex invariant on the weights.
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.updated_tokens.len()
            || self.weights.len() != self.m_vectors.len()
        {
            return Err(Error::Contract("attention trace length mismatch".into()));
        }
        if self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Contract("negative attention weight".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("attention weights sum to {sum}")));
        }
        Ok(())
    }
}

/// Full forward cache for one encoded sequence.
#[derive(Debug, Clone)]
pub struct SideCache {
    pub ids: Vec<usize>,
    embeds: Vec<Vec<f64>>,
    fwd: SeqCache,
    bwd: SeqCache,
    /// Per-token vectors, forward state concatenated with backward state.
    pub token_vectors: Vec<Vec<f64>>,
    /// Average of the token vectors.
    pub mean: Vec<f64>,
}

/// Accumulates loss gradients flowing into one encoded sequence.
#[derive(Debug, Clone)]
pub struct SideGrad {
    d_tokens: Vec<Vec<f64>>,
}

impl SideGrad {
    pub fn new(side: &SideCache) -> Self {
        SideGrad {
            d_tokens: side
                .token_vectors
                .iter()
                .map(|v| vec![0.0; v.len()])
                .collect(),
        }
    }

    /// Adds a gradient on the mean vector: spreads `d / T` onto every token.
    pub fn add_mean(&mut self, d: &[f64]) {
        let t = self.d_tokens.len() as f64;
        for row in &mut self.d_tokens {
            axpy(row, 1.0 / t, d);
        }
    }

    pub fn add_token(&mut self, t: usize, scale: f64, d: &[f64]) {
        axpy(&mut self.d_tokens[t], scale, d);
    }
}

/// Encodes token ids into a cached bidirectional representation.
pub fn encode_side(params: &ScorerParams, ids: &[usize]) -> Result<SideCache> {
    if ids.is_empty() {
        return Err(Error::shape("encode_sequence", "empty token sequence"));
    }
    for &id in ids {
        if id >= params.cfg.vocab_size {
            return Err(Error::Contract(format!(
                "token id {id} outside vocabulary of {}",
                params.cfg.vocab_size
            )));
        }
    }
    let embeds: Vec<Vec<f64>> = ids
        .iter()
        .map(|&id| params.embedding.value.row(id).to_vec())
        .collect();
    let fwd = lstm::run(&params.fwd, &embeds);
    let reversed: Vec<Vec<f64>> = embeds.iter().rev().cloned().collect();
    let bwd = lstm::run(&params.bwd, &reversed);

    let t_len = ids.len();
    let h = params.cfg.hidden;
    let mut token_vectors = Vec::with_capacity(t_len);
    let mut mean = vec![0.0; 2 * h];
    for t in 0..t_len {
        let mut v = Vec::with_capacity(2 * h);
        v.extend_from_slice(&fwd.steps[t].hidden);
        v.extend_from_slice(&bwd.steps[t_len - 1 - t].hidden);
        axpy(&mut mean, 1.0 / t_len as f64, &v);
        token_vectors.push(v);
    }
    Ok(SideCache {
        ids: ids.to_vec(),
        embeds,
        fwd,
        bwd,
        token_vectors,
        mean,
    })
}

/// One token vector per input position: forward hidden state concatenated
/// with backward hidden state, each of length `hidden`.
pub fn encode_sequence(params: &ScorerParams, ids: &[usize]) -> Result<Vec<Vec<f64>>> {
    Ok(encode_side(params, ids)?.token_vectors)
}

/// Elementwise arithmetic mean of the given vectors.
pub fn pool_average(states: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = states
        .first()
        .ok_or_else(|| Error::shape("pool_average", "empty list"))?;
    let mut out = vec![0.0; first.len()];
    for s in states {
        if s.len() != first.len() {
            return Err(Error::shape("pool_average", "ragged state lengths"));
        }
        axpy(&mut out, 1.0 / states.len() as f64, s);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AttnCache {
    m: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn attend_core(
    params: &ScorerParams,
    hidden_y: &[Vec<f64>],
    x_vec: &[f64],
) -> Result<(Vec<f64>, AttnCache)> {
    if hidden_y.is_empty() {
        return Err(Error::shape("attend", "no Y tokens"));
    }
    let query = mat_vec(&params.attn_query.value, x_vec)?;
    let mut m = Vec::with_capacity(hidden_y.len());
    let mut logits = Vec::with_capacity(hidden_y.len());
    for hy in hidden_y {
        let mut u = mat_vec(&params.attn_token.value, hy)?;
        for (ui, qi) in u.iter_mut().zip(&query) {
            *ui += qi;
        }
        let mt: Vec<f64> = u.iter().map(|x| x.tanh()).collect();
        logits.push(dot(params.attn_score.value.row(0), &mt)?);
        m.push(mt);
    }
    let weights = softmax(&logits)?;
    let mut y_vec = vec![0.0; hidden_y[0].len()];
    for (hy, &w) in hidden_y.iter().zip(&weights) {
        axpy(&mut y_vec, w / hidden_y.len() as f64, hy);
    }
    Ok((y_vec, AttnCache { m, weights }))
}

/// Applies attention to the Y-side token vectors conditioned on the X-side
/// sentence vector. Returns the pooled Y sentence vector and the audit trace.
pub fn attend(
    params: &ScorerParams,
    hidden_y: &[Vec<f64>],
    x_vec: &[f64],
) -> Result<(Vec<f64>, AttentionTrace)> {
    let (y_vec, cache) = attend_core(params, hidden_y, x_vec)?;
    let updated_tokens = hidden_y
        .iter()
        .zip(&cache.weights)
        .map(|(hy, &w)| hy.iter().map(|v| v * w).collect())
        .collect();
    let trace = AttentionTrace {
        m_vectors: cache.m,
        weights: cache.weights,
        updated_tokens,
    };
    trace.validate()?;
    Ok((y_vec, trace))
}

/// Pair-level forward cache: what `backward_pair` needs beyond the two sides.
#[derive(Debug, Clone)]
pub struct PairCache {
    pub score: f64,
    y_vec: Vec<f64>,
    attention: Option<AttnCache>,
}

impl PairCache {
    pub fn trace(&self, y: &SideCache) -> Option<AttentionTrace> {
        self.attention.as_ref().map(|a| AttentionTrace {
            m_vectors: a.m.clone(),
            weights: a.weights.clone(),
            updated_tokens: y
                .token_vectors
                .iter()
                .zip(&a.weights)
                .map(|(hy, &w)| hy.iter().map(|v| v * w).collect())
                .collect(),
        })
    }
}

/// Scores a pair of encoded sides by cosine similarity.
pub fn score_with_cache(
    params: &ScorerParams,
    x: &SideCache,
    y: &SideCache,
    attention_on: bool,
) -> Result<(f64, PairCache)> {
    let (y_vec, attention) = if attention_on {
        let (y_vec, cache) = attend_core(params, &y.token_vectors, &x.mean)?;
        (y_vec, Some(cache))
    } else {
        (y.mean.clone(), None)
    };
    let nx = l2_norm(&x.mean);
    let ny = l2_norm(&y_vec);
    if nx <= NORM_EPS || ny <= NORM_EPS {
        return Err(Error::Degenerate {
            op: "score_pair",
            norm: nx.min(ny),
        });
    }
    let score = dot(&x.mean, &y_vec)? / (nx * ny);
    Ok((
        score,
        PairCache {
            score,
            y_vec,
            attention,
        },
    ))
}

/// Encodes both token sequences and scores them. The trace is present only
/// when attention is on.
pub fn score_pair(
    params: &ScorerParams,
    x_ids: &[usize],
    y_ids: &[usize],
    attention_on: bool,
) -> Result<(f64, Option<AttentionTrace>)> {
    let x = encode_side(params, x_ids)?;
    let y = encode_side(params, y_ids)?;
    let (score, cache) = score_with_cache(params, &x, &y, attention_on)?;
    Ok((score, cache.trace(&y)))
}

/// Backward pass for one scored pair. Accumulates attention-parameter
/// gradients into `params` and per-token gradients into the two side sinks.
/// Call [`backward_side`] once per side afterwards.
pub fn backward_pair(
    params: &mut ScorerParams,
    x: &SideCache,
    y: &SideCache,
    pair: &PairCache,
    upstream: f64,
    dx: &mut SideGrad,
    dy: &mut SideGrad,
) -> Result<()> {
    // Cosine backward.
    let nx = l2_norm(&x.mean);
    let ny = l2_norm(&pair.y_vec);
    let scale = 1.0 / (nx * ny);
    let s = pair.score;
    let mut d_xmean: Vec<f64> = pair
        .y_vec
        .iter()
        .zip(&x.mean)
        .map(|(&yv, &xv)| upstream * (yv * scale - s * xv / (nx * nx)))
        .collect();
    let d_yvec: Vec<f64> = x
        .mean
        .iter()
        .zip(&pair.y_vec)
        .map(|(&xv, &yv)| upstream * (xv * scale - s * yv / (ny * ny)))
        .collect();

    match &pair.attention {
        None => dy.add_mean(&d_yvec),
        Some(attn) => {
            let t_len = y.token_vectors.len() as f64;
            // y_vec = (1/T) sum_t w_t * hy_t
            let mut d_weights = Vec::with_capacity(attn.weights.len());
            for (t, hy) in y.token_vectors.iter().enumerate() {
                d_weights.push(dot(&d_yvec, hy)? / t_len);
                dy.add_token(t, attn.weights[t] / t_len, &d_yvec);
            }
            // softmax backward
            let inner: f64 = attn
                .weights
                .iter()
                .zip(&d_weights)
                .map(|(w, dw)| w * dw)
                .sum();
            let d_logits: Vec<f64> = attn
                .weights
                .iter()
                .zip(&d_weights)
                .map(|(w, dw)| w * (dw - inner))
                .collect();
            // logits_t = attn_score . m_t ; m_t = tanh(Wa hy_t + Wq xmean)
            for (t, (mt, &dz)) in attn.m.iter().zip(&d_logits).enumerate() {
                if dz != 0.0 {
                    axpy(params.attn_score.grad.row_mut(0), dz, mt);
                }
                let du: Vec<f64> = params
                    .attn_score
                    .value
                    .row(0)
                    .iter()
                    .zip(mt)
                    .map(|(&w, &m)| dz * w * (1.0 - m * m))
                    .collect();
                add_outer(&mut params.attn_token.grad, &du, &y.token_vectors[t]);
                add_outer(&mut params.attn_query.grad, &du, &x.mean);
                let d_hy = mat_tvec(&params.attn_token.value, &du)?;
                dy.add_token(t, 1.0, &d_hy);
                let d_xq = mat_tvec(&params.attn_query.value, &du)?;
                axpy(&mut d_xmean, 1.0, &d_xq);
            }
        }
    }
    dx.add_mean(&d_xmean);
    Ok(())
}

/// Runs backpropagation through both LSTM directions of one side and scatters
/// embedding gradients. Consumes the per-token gradients gathered by
/// [`backward_pair`] calls.
pub fn backward_side(params: &mut ScorerParams, side: &SideCache, grad: &SideGrad) {
    let h = params.cfg.hidden;
    let t_len = side.ids.len();
    let fwd_upstream: Vec<Vec<f64>> = grad.d_tokens.iter().map(|d| d[..h].to_vec()).collect();
    let bwd_upstream: Vec<Vec<f64>> = (0..t_len)
        .map(|k| grad.d_tokens[t_len - 1 - k][h..].to_vec())
        .collect();

    let d_embeds_fwd = lstm::backward(&mut params.fwd, &side.embeds, &side.fwd, &fwd_upstream);
    let reversed: Vec<Vec<f64>> = side.embeds.iter().rev().cloned().collect();
    let d_embeds_bwd = lstm::backward(&mut params.bwd, &reversed, &side.bwd, &bwd_upstream);

    for t in 0..t_len {
        let row = params.embedding.grad.row_mut(side.ids[t]);
        axpy(row, 1.0, &d_embeds_fwd[t]);
        axpy(row, 1.0, &d_embeds_bwd[t_len - 1 - t]);
    }
}

/// Convenience wrapper used by gradient checks: full forward and backward of
/// a single scored pair with the given upstream gradient.
pub fn score_pair_with_grads(
    params: &mut ScorerParams,
    x_ids: &[usize],
    y_ids: &[usize],
    attention_on: bool,
    upstream: f64,
) -> Result<f64> {
    let x = encode_side(params, x_ids)?;
    let y = encode_side(params, y_ids)?;
    let (score, pair) = score_with_cache(params, &x, &y, attention_on)?;
    let mut dx = SideGrad::new(&x);
    let mut dy = SideGrad::new(&y);
    backward_pair(params, &x, &y, &pair, upstream, &mut dx, &mut dy)?;
    backward_side(params, &y, &dy);
    backward_side(params, &x, &dx);
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{finite_diff_grad, max_relative_error, sgd_step};

    fn tiny_cfg() -> ScorerConfig {
        ScorerConfig {
            vocab_size: 12,
            embed_dim: 5,
            hidden: 4,
            attn_dim: 6,
        }
    }

    fn tiny_params(seed: u64) -> ScorerParams {
        ScorerParams::init_seeded(tiny_cfg(), seed)
    }

    #[test]
    fn encode_shape_contract() {
        let p = tiny_params(1);
        let out = encode_sequence(&p, &[3, 4, 5, 6]).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|v| v.len() == 2 * p.cfg.hidden));
    }

    #[test]
    fn encode_rejects_empty_and_out_of_range() {
        let p = tiny_params(1);
        assert!(matches!(
            encode_sequence(&p, &[]),
            Err(Error::Shape { .. })
        ));
        assert!(encode_sequence(&p, &[99]).is_err());
    }

    #[test]
    fn zero_parameters_give_exactly_zero_states() {
        let mut p = tiny_params(1);
        for g in p.groups_mut() {
            g.value.fill(0.0);
        }
        let out = encode_sequence(&p, &[1, 2, 3]).unwrap();
        for v in out {
            assert!(v.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn reversing_input_reverses_and_swaps_halves() {
        // The two directions carry separate weights, so the mirror image of
        // an encoding is produced by the same model with the direction
        // parameters exchanged: encode(rev(x)) under swapped directions equals
        // the reversed encoding of x with fwd/bwd halves swapped.
        let p = tiny_params(5);
        let mut swapped_dirs = p.clone();
        std::mem::swap(&mut swapped_dirs.fwd, &mut swapped_dirs.bwd);
        let ids = [3, 7, 2, 9, 4];
        let rev: Vec<usize> = ids.iter().rev().copied().collect();
        let a = encode_sequence(&p, &ids).unwrap();
        let b = encode_sequence(&swapped_dirs, &rev).unwrap();
        let h = p.cfg.hidden;
        let t_len = ids.len();
        for t in 0..t_len {
            let orig = &a[t_len - 1 - t];
            let swapped: Vec<f64> = orig[h..].iter().chain(&orig[..h]).copied().collect();
            for (x, y) in b[t].iter().zip(&swapped) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pool_average_cases() {
        let v = vec![1.0, -2.0, 3.0];
        assert_eq!(pool_average(std::slice::from_ref(&v)).unwrap(), v);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let zero = pool_average(&[v.clone(), neg]).unwrap();
        assert!(zero.iter().all(|&x| x.abs() < 1e-15));
        let perm = pool_average(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let perm2 = pool_average(&[vec![3.0, 4.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(perm, perm2);
        assert!(pool_average(&[]).is_err());
    }

    #[test]
    fn attention_with_zero_score_vector_is_uniform() {
        let mut p = tiny_params(2);
        p.attn_score.value.fill(0.0);
        let hidden_y: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..8).map(|j| ((i * 8 + j) as f64).sin()).collect())
            .collect();
        let x_vec: Vec<f64> = (0..8).map(|j| (j as f64).cos()).collect();
        let (y_vec, trace) = attend(&p, &hidden_y, &x_vec).unwrap();
        trace.validate().unwrap();
        for w in &trace.weights {
            assert!((w - 0.25).abs() < 1e-12);
        }
        let pooled = pool_average(&hidden_y).unwrap();
        for (a, b) in y_vec.iter().zip(&pooled) {
            assert!((a - b / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn attention_singleton_is_weight_one() {
        let p = tiny_params(3);
        let hidden_y = vec![(0..8).map(|j| 0.1 * j as f64).collect::<Vec<f64>>()];
        let x_vec: Vec<f64> = (0..8).map(|j| 0.05 * j as f64).collect();
        let (y_vec, trace) = attend(&p, &hidden_y, &x_vec).unwrap();
        assert_eq!(trace.weights, vec![1.0]);
        for (a, b) in y_vec.iter().zip(&hidden_y[0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_inputs_without_attention_score_one() {
        let p = tiny_params(4);
        let ids = [3, 5, 7];
        let (score, trace) = score_pair(&p, &ids, &ids, false).unwrap();
        assert!((score - 1.0).abs() < 1e-9);
        assert!(trace.is_none());
    }

    #[test]
    fn zero_attention_score_matches_attention_off() {
        // Uniform attention rescales the Y vector by 1/T; cosine ignores it.
        let mut p = tiny_params(6);
        p.attn_score.value.fill(0.0);
        let x = [1, 2, 3];
        let y = [4, 5, 6, 7];
        let (with_attn, trace) = score_pair(&p, &x, &y, true).unwrap();
        let (without, _) = score_pair(&p, &x, &y, false).unwrap();
        assert!((with_attn - without).abs() < 1e-12);
        trace.unwrap().validate().unwrap();
    }

    #[test]
    fn scores_stay_in_cosine_bounds() {
        for seed in 0..10u64 {
            let p = tiny_params(100 + seed);
            let mut state = 7 + seed;
            let mut next = move |bound: usize| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % bound as u64) as usize
            };
            for _ in 0..10 {
                let x: Vec<usize> = (0..1 + next(6)).map(|_| next(12)).collect();
                let y: Vec<usize> = (0..1 + next(6)).map(|_| next(12)).collect();
                for attn in [false, true] {
                    let (score, trace) = score_pair(&p, &x, &y, attn).unwrap();
                    assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&score));
                    if let Some(t) = trace {
                        t.validate().unwrap();
                        assert_eq!(t.weights.len(), y.len());
                    }
                }
            }
        }
    }

    #[test]
    fn zero_norm_sentence_vector_is_degenerate() {
        let mut p = tiny_params(1);
        for g in p.groups_mut() {
            g.value.fill(0.0);
        }
        assert!(matches!(
            score_pair(&p, &[1, 2], &[3], false),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn scoring_is_deterministic() {
        let p = tiny_params(9);
        let (a, _) = score_pair(&p, &[1, 2, 3], &[4, 5], true).unwrap();
        let (b, _) = score_pair(&p, &[1, 2, 3], &[4, 5], true).unwrap();
        assert_eq!(a, b);
    }

    /// Finite-difference check of the full score gradient for every group.
    fn check_score_gradients(seed: u64, attention_on: bool) {
        let mut params = tiny_params(seed);
        let x_ids = vec![1, 4, 2];
        let y_ids = vec![5, 3, 6, 3];

        params.zero_grads();
        score_pair_with_grads(&mut params, &x_ids, &y_ids, attention_on, 1.0).unwrap();
        let analytic: Vec<Matrix> = params.groups().iter().map(|g| g.grad.clone()).collect();

        let cfg = params.cfg;
        let mut flat = params.to_groups("s");
        let numeric = finite_diff_grad(&mut flat, 1e-5, |groups| {
            let model = ScorerParams::from_groups(cfg, "s", groups)?;
            score_pair(&model, &x_ids, &y_ids, attention_on).map(|(s, _)| s)
        })
        .unwrap();

        for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let err = max_relative_error(a.data(), n.data());
            assert!(
                err < 1e-4,
                "seed {seed} attn {attention_on} group {} rel err {err}",
                params.groups()[i].name
            );
        }
    }

    #[test]
    fn score_gradients_match_finite_differences_no_attention() {
        for seed in [11, 12, 13] {
            check_score_gradients(seed, false);
        }
    }

    #[test]
    fn score_gradients_match_finite_differences_with_attention() {
        for seed in [21, 22, 23] {
            check_score_gradients(seed, true);
        }
    }

    #[test]
    fn sgd_on_score_moves_pairs_closer() {
        // Minimizing (1 - score) should raise the score.
        let mut params = tiny_params(40);
        let x = [1, 2, 3];
        let y = [4, 5];
        let (before, _) = score_pair(&params, &x, &y, true).unwrap();
        for _ in 0..25 {
            params.zero_grads();
            score_pair_with_grads(&mut params, &x, &y, true, -1.0).unwrap();
            sgd_step(params.groups_mut(), 0.05).unwrap();
        }
        let (after, _) = score_pair(&params, &x, &y, true).unwrap();
        assert!(after > before, "{after} <= {before}");
    }

    #[test]
    fn group_round_trip_preserves_params() {
        let p = tiny_params(77);
        let groups = p.to_groups("g");
        let back = ScorerParams::from_groups(p.cfg, "g", &groups).unwrap();
        assert_eq!(p, back);
    }
}
