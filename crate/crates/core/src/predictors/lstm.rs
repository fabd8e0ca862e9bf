//! Stacked LSTM next-action predictor with a softmax head, trained by full
//! backpropagation through time.
//!
//! Gate pre-activations for a layer are stored stacked: rows `0..H` are the
//! input gate, `H..2H` forget, `2H..3H` output, `3H..4H` the candidate cell.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::SupervisedSequence;
use crate::error::{Error, Result};
use crate::numerics::{adam_step, l2_norm, sigmoid, softmax, AdamState, Mat};

pub const DEFAULT_HIDDEN: usize = 10;
pub const DEFAULT_LAYERS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Output,
    Candidate,
}

impl Gate {
    fn block(self) -> usize {
        match self {
            Gate::Input => 0,
            Gate::Forget => 1,
            Gate::Output => 2,
            Gate::Candidate => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmLayer {
    /// 4H × input_dim
    pub input_weights: Mat,
    /// 4H × H
    pub recurrent_weights: Mat,
    /// 4H
    pub bias: Vec<f64>,
}

impl LstmLayer {
    fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmLayer {
            input_weights: Mat::zeros(4 * hidden, input_dim),
            recurrent_weights: Mat::zeros(4 * hidden, hidden),
            bias: vec![0.0; 4 * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.recurrent_weights.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.input_weights.cols()
    }

    /// The H × input_dim block of one gate.
    pub fn gate_input_weights(&self, gate: Gate) -> Mat {
        self.gate_block(&self.input_weights, gate)
    }

    pub fn gate_recurrent_weights(&self, gate: Gate) -> Mat {
        self.gate_block(&self.recurrent_weights, gate)
    }

    pub fn gate_bias(&self, gate: Gate) -> &[f64] {
        let h = self.hidden();
        &self.bias[gate.block() * h..(gate.block() + 1) * h]
    }

    fn gate_block(&self, m: &Mat, gate: Gate) -> Mat {
        let h = self.hidden();
        let rows = gate.block() * h..(gate.block() + 1) * h;
        let data = rows.flat_map(|r| m.row(r).to_vec()).collect();
        Mat::from_vec(h, m.cols(), data).expect("gate block shape")
    }
}

/// All weights of the recurrent predictor. Gradients use the same type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub feature_dim: usize,
    pub alphabet: usize,
    pub hidden: usize,
    pub layers: Vec<LstmLayer>,
    /// alphabet × H
    pub head_weights: Mat,
    pub head_bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl LstmParams {
    pub fn zeros(feature_dim: usize, alphabet: usize, hidden: usize, n_layers: usize) -> Self {
        let layers = (0..n_layers)
            .map(|l| LstmLayer::zeros(if l == 0 { feature_dim } else { hidden }, hidden))
            .collect();
        LstmParams {
            feature_dim,
            alphabet,
            hidden,
            layers,
            head_weights: Mat::zeros(alphabet, hidden),
            head_bias: vec![0.0; alphabet],
        }
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams::zeros(self.feature_dim, self.alphabet, self.hidden, self.layers.len())
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    fn blocks(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for l in &self.layers {
            v.push(l.input_weights.as_slice());
            v.push(l.recurrent_weights.as_slice());
            v.push(&l.bias);
        }
        v.push(self.head_weights.as_slice());
        v.push(&self.head_bias);
        v
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for l in &mut self.layers {
            v.push(l.input_weights.as_mut_slice());
            v.push(l.recurrent_weights.as_mut_slice());
            v.push(&mut l.bias);
        }
        v.push(self.head_weights.as_mut_slice());
        v.push(&mut self.head_bias);
        v
    }

    pub fn n_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    /// Layer by layer (input weights, recurrent weights, bias), then the head.
    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks().concat()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Dimension(format!(
                "{} flat values for {} parameters",
                flat.len(),
                self.n_params()
            )));
        }
        let mut offset = 0;
        for b in self.blocks_mut() {
            b.copy_from_slice(&flat[offset..offset + b.len()]);
            offset += b.len();
        }
        Ok(())
    }

    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        let mut p = self.clone();
        p.set_flat(flat)?;
        Ok(p)
    }

    fn add_assign(&mut self, other: &LstmParams) {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn zero_state(&self) -> LstmState {
        LstmState {
            h: vec![vec![0.0; self.hidden]; self.layers.len()],
            c: vec![vec![0.0; self.hidden]; self.layers.len()],
        }
    }
}

/// Uniform ±1/√fan_in weights, forget-gate bias 1, other biases 0.
pub fn init_lstm(feature_dim: usize, alphabet: usize, seed: u64) -> LstmParams {
    init_lstm_with(feature_dim, alphabet, DEFAULT_HIDDEN, DEFAULT_LAYERS, seed)
}

pub fn init_lstm_with(feature_dim: usize, alphabet: usize, hidden: usize, n_layers: usize, seed: u64) -> LstmParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fill = |m: &mut [f64], fan_in: usize| {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        for v in m {
            *v = dist.sample(&mut rng);
        }
    };
    let mut p = LstmParams::zeros(feature_dim, alphabet, hidden, n_layers);
    for layer in &mut p.layers {
        let fan_in = layer.input_dim();
        fill(layer.input_weights.as_mut_slice(), fan_in);
        fill(layer.recurrent_weights.as_mut_slice(), hidden);
        let f = Gate::Forget.block() * hidden;
        layer.bias[f..f + hidden].fill(1.0);
    }
    fill(p.head_weights.as_mut_slice(), hidden);
    p
}

/// Activations of one layer at one step, kept for the backward pass.
#[derive(Clone, Debug)]
struct CellCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// post-activation i, f, o, g stacked
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

fn cell_step(layer: &LstmLayer, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>, CellCache) {
    let hs = layer.hidden();
    let mut z = layer.bias.clone();
    layer.input_weights.mul_vec_acc(x, &mut z);
    layer.recurrent_weights.mul_vec_acc(h_prev, &mut z);
    for v in &mut z[..3 * hs] {
        *v = sigmoid(*v);
    }
    for v in &mut z[3 * hs..] {
        *v = v.tanh();
    }
    let mut c = vec![0.0; hs];
    let mut h = vec![0.0; hs];
    let mut tanh_c = vec![0.0; hs];
    for k in 0..hs {
        let (i, f, o, g) = (z[k], z[hs + k], z[2 * hs + k], z[3 * hs + k]);
        c[k] = f * c_prev[k] + i * g;
        tanh_c[k] = c[k].tanh();
        h[k] = o * tanh_c[k];
    }
    let cache = CellCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates: z,
        tanh_c,
    };
    (h, c, cache)
}

/// One LSTM step: `c' = f⊙c + i⊙g`, `h' = o⊙tanh(c')`.
pub fn lstm_cell(layer: &LstmLayer, x: &[f64], h: &[f64], c: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let hs = layer.hidden();
    if x.len() != layer.input_dim() || h.len() != hs || c.len() != hs || layer.bias.len() != 4 * hs {
        return Err(Error::Dimension(format!(
            "cell expects input {} and state {hs}, got input {}, h {}, c {}",
            layer.input_dim(),
            x.len(),
            h.len(),
            c.len()
        )));
    }
    let (h2, c2, _) = cell_step(layer, x, h, c);
    Ok((h2, c2))
}

struct Trace {
    /// [t][layer]
    cells: Vec<Vec<CellCache>>,
    /// top-layer hidden per step
    top: Vec<Vec<f64>>,
    probs: Vec<Vec<f64>>,
    states: Vec<LstmState>,
}

fn run(params: &LstmParams, inputs: &[Vec<f64>], keep_cache: bool) -> Result<Trace> {
    let mut state = params.zero_state();
    let mut trace = Trace {
        cells: Vec::new(),
        top: Vec::with_capacity(inputs.len()),
        probs: Vec::with_capacity(inputs.len()),
        states: Vec::with_capacity(inputs.len()),
    };
    for (t, x) in inputs.iter().enumerate() {
        if x.len() != params.feature_dim {
            return Err(Error::Dimension(format!(
                "input {t} has {} features, model expects {}",
                x.len(),
                params.feature_dim
            )));
        }
        let mut below = x.clone();
        let mut caches = Vec::with_capacity(params.layers.len());
        for (l, layer) in params.layers.iter().enumerate() {
            let (h, c, cache) = cell_step(layer, &below, &state.h[l], &state.c[l]);
            if keep_cache {
                caches.push(cache);
            }
            state.h[l] = h.clone();
            state.c[l] = c;
            below = h;
        }
        let mut logits = params.head_bias.clone();
        params.head_weights.mul_vec_acc(&below, &mut logits);
        trace.probs.push(softmax(&logits)?);
        trace.top.push(below);
        trace.states.push(state.clone());
        if keep_cache {
            trace.cells.push(caches);
        }
    }
    Ok(trace)
}

/// Next-action distributions for every prefix, from a zero initial state.
pub fn lstm_forward(params: &LstmParams, inputs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<LstmState>)> {
    let t = run(params, inputs, false)?;
    Ok((t.probs, t.states))
}

fn cross_entropy_terms(probs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for (t, (p, y)) in probs.iter().zip(targets).enumerate() {
        let ce: f64 = -p
            .iter()
            .zip(y)
            .filter(|(_, &yy)| yy != 0.0)
            .map(|(pp, yy)| yy * pp.ln())
            .sum::<f64>();
        if !ce.is_finite() {
            return Err(Error::Numeric(format!("non-finite cross-entropy at step {t}")));
        }
        total += ce;
    }
    Ok(total)
}

fn check_sequence(params: &LstmParams, seq: &SupervisedSequence) -> Result<()> {
    if seq.targets.is_empty() {
        return Err(Error::Degenerate(seq.source.clone()));
    }
    if seq.inputs.len() != seq.targets.len() {
        return Err(Error::Dimension(format!(
            "sequence {} has {} inputs but {} targets",
            seq.source,
            seq.inputs.len(),
            seq.targets.len()
        )));
    }
    if let Some(y) = seq.targets.iter().find(|y| y.len() != params.alphabet) {
        return Err(Error::Dimension(format!("target of length {} for alphabet {}", y.len(), params.alphabet)));
    }
    Ok(())
}

/// Mean cross-entropy of one sequence.
pub fn lstm_loss(params: &LstmParams, seq: &SupervisedSequence) -> Result<f64> {
    check_sequence(params, seq)?;
    let (probs, _) = lstm_forward(params, &seq.inputs)?;
    Ok(cross_entropy_terms(&probs, &seq.targets)? / seq.targets.len() as f64)
}

/// Gradient of the mean per-step cross-entropy of `seq`, and that loss.
pub fn lstm_bptt(params: &LstmParams, seq: &SupervisedSequence) -> Result<(LstmParams, f64)> {
    check_sequence(params, seq)?;
    let trace = run(params, &seq.inputs, true)?;
    let steps = seq.targets.len();
    let loss = cross_entropy_terms(&trace.probs, &seq.targets)? / steps as f64;

    let hs = params.hidden;
    let n_layers = params.layers.len();
    let mut grads = params.zeros_like();
    let mut dh_next = vec![vec![0.0; hs]; n_layers];
    let mut dc_next = vec![vec![0.0; hs]; n_layers];
    let inv = 1.0 / steps as f64;

    for t in (0..steps).rev() {
        let dlogits: Vec<f64> = trace.probs[t]
            .iter()
            .zip(&seq.targets[t])
            .map(|(p, y)| (p - y) * inv)
            .collect();
        grads.head_weights.add_outer(&dlogits, &trace.top[t]);
        for (b, d) in grads.head_bias.iter_mut().zip(&dlogits) {
            *b += d;
        }
        let mut dh = dh_next[n_layers - 1].clone();
        params.head_weights.mul_t_vec_acc(&dlogits, &mut dh);

        for l in (0..n_layers).rev() {
            let cache = &trace.cells[t][l];
            let layer = &params.layers[l];
            let g = &cache.gates;
            let mut dz = vec![0.0; 4 * hs];
            for k in 0..hs {
                let (i, f, o, cand) = (g[k], g[hs + k], g[2 * hs + k], g[3 * hs + k]);
                let tc = cache.tanh_c[k];
                let dc = dh[k] * o * (1.0 - tc * tc) + dc_next[l][k];
                let d_o = dh[k] * tc;
                let d_i = dc * cand;
                let d_f = dc * cache.c_prev[k];
                let d_g = dc * i;
                dz[k] = d_i * i * (1.0 - i);
                dz[hs + k] = d_f * f * (1.0 - f);
                dz[2 * hs + k] = d_o * o * (1.0 - o);
                dz[3 * hs + k] = d_g * (1.0 - cand * cand);
                dc_next[l][k] = dc * f;
            }
            let gl = &mut grads.layers[l];
            gl.input_weights.add_outer(&dz, &cache.x);
            gl.recurrent_weights.add_outer(&dz, &cache.h_prev);
            for (b, d) in gl.bias.iter_mut().zip(&dz) {
                *b += d;
            }
            let mut dh_prev = vec![0.0; hs];
            layer.recurrent_weights.mul_t_vec_acc(&dz, &mut dh_prev);
            dh_next[l] = dh_prev;
            if l > 0 {
                let mut dx = dh_next[l - 1].clone();
                layer.input_weights.mul_t_vec_acc(&dz, &mut dx);
                dh = dx;
            }
        }
    }
    Ok((grads, loss))
}

/// Summed gradients and losses over `batch`, accumulated in slice order.
pub fn batch_gradient(params: &LstmParams, batch: &[&SupervisedSequence]) -> Result<(LstmParams, f64)> {
    let mut total = params.zeros_like();
    let mut loss = 0.0;
    for seq in batch {
        let (g, l) = lstm_bptt(params, seq)?;
        total.add_assign(&g);
        loss += l;
    }
    Ok((total, loss))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub gradient_clip_norm: f64,
    pub validation_fraction: f64,
    pub early_stop_patience: usize,
    pub hidden: usize,
    pub layers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 0.01,
            batch_size: 32,
            seed: 0,
            gradient_clip_norm: 5.0,
            validation_fraction: 0.1,
            early_stop_patience: 20,
            hidden: DEFAULT_HIDDEN,
            layers: DEFAULT_LAYERS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0
            || self.batch_size == 0
            || self.early_stop_patience == 0
            || self.hidden == 0
            || self.layers == 0
            || !(self.learning_rate > 0.0)
            || !(self.gradient_clip_norm > 0.0)
        {
            return Err(Error::Config(format!("training settings must be positive: {self:?}")));
        }
        if !(0.0..=0.5).contains(&self.validation_fraction) {
            return Err(Error::Config(format!(
                "validation fraction {} outside [0, 0.5]",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
    pub n_train: usize,
    pub n_validation: usize,
}

fn mean_loss(params: &LstmParams, seqs: &[&SupervisedSequence]) -> Result<f64> {
    let mut s = 0.0;
    for q in seqs {
        s += lstm_loss(params, q)?;
    }
    Ok(s / seqs.len() as f64)
}

/// Mini-batch Adam with global-norm clipping and early stopping on held-out
/// cross-entropy. Validation sequences are chosen by source trajectory, so
/// both perspectives of a dyad stay together.
pub fn train_lstm(data: &[SupervisedSequence], config: &TrainConfig) -> Result<(LstmParams, TrainHistory)> {
    config.validate()?;
    let first = data
        .first()
        .ok_or_else(|| Error::InsufficientData("no training sequences".into()))?;
    let feature_dim = first.inputs.first().map_or(0, Vec::len);
    let alphabet = first.targets.first().map_or(0, Vec::len);
    if feature_dim == 0 || alphabet == 0 {
        return Err(Error::Degenerate(first.source.clone()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sources: Vec<&str> = data.iter().map(|s| s.source.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
    sources.shuffle(&mut rng);
    let n_val = ((sources.len() as f64) * config.validation_fraction).round() as usize;
    let n_val = if n_val >= sources.len() { 0 } else { n_val };
    let val_sources: BTreeSet<&str> = sources[..n_val].iter().copied().collect();
    let (val, train): (Vec<&SupervisedSequence>, Vec<&SupervisedSequence>) =
        data.iter().partition(|s| val_sources.contains(s.source.as_str()));

    let mut params = init_lstm_with(feature_dim, alphabet, config.hidden, config.layers, config.seed);
    let n = params.n_params();
    let mut flat = Mat::from_vec(1, n, params.to_flat())?;
    let mut adam = AdamState::new(1, n, config.learning_rate);
    let mut history = TrainHistory {
        n_train: train.len(),
        n_validation: val.len(),
        ..TrainHistory::default()
    };
    let mut best = (f64::INFINITY, params.clone());
    let mut stale = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&SupervisedSequence> = chunk.iter().map(|&i| train[i]).collect();
            let (g, loss) = batch_gradient(&params, &batch).map_err(|e| match e {
                Error::Numeric(m) => Error::Numeric(format!("epoch {epoch}: {m}")),
                other => other,
            })?;
            epoch_loss += loss;
            let mut g = g.to_flat();
            let scale = 1.0 / batch.len() as f64;
            g.iter_mut().for_each(|v| *v *= scale);
            let norm = l2_norm(&g);
            if !norm.is_finite() {
                return Err(Error::Numeric(format!("epoch {epoch}: gradient diverged")));
            }
            if norm > config.gradient_clip_norm {
                let s = config.gradient_clip_norm / norm;
                g.iter_mut().for_each(|v| *v *= s);
            }
            let (next, state) = adam_step(&flat, &Mat::from_vec(1, n, g)?, &adam)?;
            flat = next;
            adam = state;
            params.set_flat(flat.as_slice())?;
        }
        let train_loss = epoch_loss / train.len() as f64;
        let validation_loss = if val.is_empty() {
            None
        } else {
            Some(mean_loss(&params, &val)?)
        };
        if !train_loss.is_finite() || validation_loss.is_some_and(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("loss diverged at epoch {epoch}")));
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            validation_loss,
        });
        let monitored = validation_loss.unwrap_or(train_loss);
        if monitored < best.0 {
            best = (monitored, params.clone());
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.early_stop_patience {
                log::info!("early stop at epoch {epoch}, best epoch {}", history.best_epoch);
                break;
            }
        }
    }
    Ok((best.1, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::GameKind;

    fn seq(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> SupervisedSequence {
        SupervisedSequence {
            kind: GameKind::Igt,
            inputs,
            targets,
            focal_agent: 0,
            source: "toy".into(),
            spec: None,
        }
    }

    fn one_hot(i: usize) -> Vec<f64> {
        let mut v = vec![0.0; 4];
        v[i] = 1.0;
        v
    }

    #[test]
    fn init_shapes_and_forget_bias() {
        let p = init_lstm(4, 4, 7);
        assert_eq!(p, init_lstm(4, 4, 7));
        assert_eq!(p.layers[0].gate_input_weights(Gate::Input).shape(), (10, 4));
        assert_eq!(p.layers[1].gate_input_weights(Gate::Input).shape(), (10, 10));
        assert_eq!(p.head_weights.shape(), (4, 10));
        for l in &p.layers {
            assert!(l.gate_bias(Gate::Forget).iter().all(|&b| b == 1.0));
            assert!(l.gate_bias(Gate::Input).iter().all(|&b| b == 0.0));
        }
        let bound = 0.5;
        assert!(p.layers[0].input_weights.as_slice().iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn zero_cell_stays_zero() {
        let layer = LstmLayer::zeros(4, 10);
        let (h, c) = lstm_cell(&layer, &[1.0, -3.0, 0.5, 2.0], &[0.0; 10], &[0.0; 10]).unwrap();
        assert!(h.iter().chain(&c).all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_forget_gate_remembers() {
        // f = σ(50) ≈ 1, i = σ(-50) ≈ 0, so c' ≈ c
        let mut layer = LstmLayer::zeros(1, 1);
        layer.bias = vec![-50.0, 50.0, 0.0, 0.0];
        let (_, c) = lstm_cell(&layer, &[0.0], &[0.0], &[1.0]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cell_dimension_error() {
        let layer = LstmLayer::zeros(4, 10);
        assert!(matches!(lstm_cell(&layer, &[1.0], &[0.0; 10], &[0.0; 10]), Err(Error::Dimension(_))));
    }

    #[test]
    fn forward_basics() {
        let p = init_lstm(4, 4, 1);
        let (probs, states) = lstm_forward(&p, &[]).unwrap();
        assert!(probs.is_empty() && states.is_empty());

        let inputs: Vec<Vec<f64>> = (0..6).map(|t| one_hot(t % 4)).collect();
        let (probs, states) = lstm_forward(&p, &inputs).unwrap();
        assert_eq!(probs.len(), 6);
        for q in &probs {
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for s in &states {
            assert!(s.h.iter().flatten().all(|v| v.abs() < 1.0));
        }
        let (prefix, _) = lstm_forward(&p, &inputs[..3]).unwrap();
        assert_eq!(prefix[..], probs[..3]);
    }

    #[test]
    fn bptt_empty_targets_is_degenerate() {
        let p = init_lstm(4, 4, 1);
        assert!(matches!(lstm_bptt(&p, &seq(vec![], vec![])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn duplicated_batch_doubles_gradient() {
        let p = init_lstm(4, 4, 2);
        let s = seq(vec![one_hot(0), one_hot(1), one_hot(3)], vec![one_hot(1), one_hot(3), one_hot(2)]);
        let (single, l1) = batch_gradient(&p, &[&s]).unwrap();
        let (double, l2) = batch_gradient(&p, &[&s, &s]).unwrap();
        assert_eq!(l2, 2.0 * l1);
        for (a, b) in single.to_flat().iter().zip(double.to_flat()) {
            assert_eq!(2.0 * a, b);
        }
    }

    #[test]
    fn flat_round_trip() {
        let p = init_lstm(4, 2, 3);
        let flat = p.to_flat();
        assert_eq!(flat.len(), p.n_params());
        // 2 layers × (40·4 + 40·10 + 40) for layer 1, (40·10 + 40·10 + 40) for layer 2, head 2·10 + 2
        assert_eq!(p.n_params(), (160 + 400 + 40) + (400 + 400 + 40) + 22);
        assert_eq!(p.with_flat(&flat).unwrap(), p);
        assert!(p.with_flat(&flat[1..]).is_err());
    }

    #[test]
    fn training_is_reproducible() {
        let data: Vec<SupervisedSequence> = (0..6)
            .map(|k| {
                let mut s = seq(
                    (0..8).map(|t| one_hot((t + k) % 4)).collect(),
                    (0..8).map(|t| one_hot((t + k + 1) % 4)).collect(),
                );
                s.source = format!("s{k}");
                s
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 2,
            seed: 9,
            validation_fraction: 0.2,
            ..TrainConfig::default()
        };
        let (p1, h1) = train_lstm(&data, &cfg).unwrap();
        let (p2, h2) = train_lstm(&data, &cfg).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(h1, h2);
        assert_eq!(h1.n_validation, 1);
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = TrainConfig {
            validation_fraction: 0.7,
            ..TrainConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(matches!(train_lstm(&[], &TrainConfig::default()), Err(Error::InsufficientData(_))));
    }
}
