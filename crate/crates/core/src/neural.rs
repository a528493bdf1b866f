//! Multilayer perceptron: ReLU hidden layers, a sigmoid output unit, mean
//! binary cross-entropy, reverse-mode gradients and Adam updates.
//!
//! Layer `l` computes `a_i = f(Σ_j w_ij·x_j + b_i)` with `w` stored row-major
//! as `outputs × inputs`.

use std::fmt::Write as _;

use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};
use crate::math::{logit_log_loss, sigmoid};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl Default for MlpArchitecture {
    fn default() -> Self {
        MlpArchitecture::new(vec![7, 16, 8, 1])
    }
}

impl MlpArchitecture {
    pub fn new(layer_sizes: Vec<usize>) -> Self {
        MlpArchitecture {
            layer_sizes,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Sigmoid,
        }
    }

    fn validate(&self) -> Result<()> {
        let s = &self.layer_sizes;
        if s.len() < 3 || s.contains(&0) || s[s.len() - 1] != 1 {
            return Err(Error::Config(
                "MLP needs an input layer, at least one hidden layer, and a single output unit"
                    .into(),
            ));
        }
        if self.hidden_activation != Activation::Relu
            || self.output_activation != Activation::Sigmoid
        {
            return Err(Error::Config(
                "only relu hidden layers with a sigmoid output are supported".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.outputs {
            let w = &self.weights[i * self.inputs..(i + 1) * self.inputs];
            out.push(w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.bias[i]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    pub fn zeros(arch: &MlpArchitecture) -> Self {
        MlpParams {
            layers: arch
                .layer_sizes
                .windows(2)
                .map(|w| Layer::zeros(w[0], w[1]))
                .collect(),
        }
    }

    /// Uniform He initialization `U(±√(6/fan_in))` for ReLU layers, Glorot
    /// `U(±√(6/(fan_in+fan_out)))` for the output layer; zero biases.
    pub fn init(arch: &MlpArchitecture, seed: u64) -> Self {
        let mut rng = rng::stream(seed, Purpose::MlpInit, 0);
        let mut params = MlpParams::zeros(arch);
        let last = params.layers.len() - 1;
        for (l, layer) in params.layers.iter_mut().enumerate() {
            let limit = if l == last {
                (6.0 / (layer.inputs + layer.outputs) as f64).sqrt()
            } else {
                (6.0 / layer.inputs as f64).sqrt()
            };
            let dist = Uniform::new(-limit, limit).expect("finite limit");
            for w in layer.weights.iter_mut() {
                *w = dist.sample(&mut rng);
            }
        }
        params
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// All parameters flattened layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            v.extend_from_slice(&l.weights);
            v.extend_from_slice(&l.bias);
        }
        v
    }

    pub fn unflatten(&mut self, v: &[f64]) {
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&v[k..k + nw]);
            k += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&v[k..k + nb]);
            k += nb;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        mlp_forward(self, x).map(|(p, _)| p)
    }
}

/// Per-layer values from a forward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// Layer inputs: `inputs[0]` is `x`, `inputs[l]` the activation of
    /// layer `l-1`.
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activations of every layer.
    pub pre_activations: Vec<Vec<f64>>,
    /// Output logit.
    pub logit: f64,
}

fn forward_into(params: &MlpParams, x: &[f64], cache: &mut ForwardCache) {
    let n = params.layers.len();
    cache.inputs.resize(n, Vec::new());
    cache.pre_activations.resize(n, Vec::new());
    cache.inputs[0].clear();
    cache.inputs[0].extend_from_slice(x);
    for (l, layer) in params.layers.iter().enumerate() {
        let (head, tail) = cache.pre_activations.split_at_mut(l);
        let _ = head;
        layer.affine(&cache.inputs[l], &mut tail[0]);
        if l + 1 < n {
            let next: Vec<f64> = cache.pre_activations[l]
                .iter()
                .map(|&z| z.max(0.0))
                .collect();
            cache.inputs[l + 1] = next;
        }
    }
    cache.logit = cache.pre_activations[n - 1][0];
}

/// Output probability, kept strictly inside (0, 1).
fn squash(logit: f64) -> f64 {
    sigmoid(logit).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

pub fn mlp_forward(params: &MlpParams, x: &[f64]) -> Result<(f64, ForwardCache)> {
    if x.len() != params.input_dim() {
        return Err(Error::Dimension {
            expected: params.input_dim(),
            got: x.len(),
        });
    }
    let mut cache = ForwardCache::default();
    forward_into(params, x, &mut cache);
    Ok((squash(cache.logit), cache))
}

fn check_batch(params: &MlpParams, x: &Matrix, y: &[u8], rows: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty("batch"));
    }
    if x.cols() != params.input_dim() {
        return Err(Error::Dimension {
            expected: params.input_dim(),
            got: x.cols(),
        });
    }
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            expected: x.rows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Mean binary cross-entropy over `rows`.
pub fn mlp_loss(params: &MlpParams, x: &Matrix, y: &[u8], rows: &[usize]) -> Result<f64> {
    check_batch(params, x, y, rows)?;
    let mut cache = ForwardCache::default();
    let mut total = 0.0;
    for &i in rows {
        forward_into(params, x.row(i), &mut cache);
        total += logit_log_loss(cache.logit, f64::from(y[i]));
    }
    Ok(total / rows.len() as f64)
}

/// Mean loss over `rows` and its exact gradient, shaped like the params.
pub fn mlp_gradients(
    params: &MlpParams,
    x: &Matrix,
    y: &[u8],
    rows: &[usize],
) -> Result<(f64, MlpParams)> {
    check_batch(params, x, y, rows)?;
    let mut grads = MlpParams {
        layers: params
            .layers
            .iter()
            .map(|l| Layer::zeros(l.inputs, l.outputs))
            .collect(),
    };
    let scale = 1.0 / rows.len() as f64;
    let mut cache = ForwardCache::default();
    let mut loss = 0.0;
    let mut delta: Vec<f64> = Vec::new();
    let mut next_delta: Vec<f64> = Vec::new();
    for &i in rows {
        forward_into(params, x.row(i), &mut cache);
        let t = f64::from(y[i]);
        loss += logit_log_loss(cache.logit, t);
        delta.clear();
        delta.push((sigmoid(cache.logit) - t) * scale);
        for l in (0..params.layers.len()).rev() {
            let layer = &params.layers[l];
            let g = &mut grads.layers[l];
            let input = &cache.inputs[l];
            for (o, &d) in delta.iter().enumerate() {
                g.bias[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, &a) in row.iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if l == 0 {
                break;
            }
            next_delta.clear();
            next_delta.resize(layer.inputs, 0.0);
            for (o, &d) in delta.iter().enumerate() {
                let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (nd, &wv) in next_delta.iter_mut().zip(w) {
                    *nd += d * wv;
                }
            }
            for (nd, &z) in next_delta.iter_mut().zip(&cache.pre_activations[l - 1]) {
                if z <= 0.0 {
                    *nd = 0.0;
                }
            }
            std::mem::swap(&mut delta, &mut next_delta);
        }
    }
    Ok((loss * scale, grads))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for MlpTrainConfig {
    fn default() -> Self {
        MlpTrainConfig {
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub entries: Vec<TraceEntry>,
}

impl TrainingTrace {
    pub const CSV_HEADER: &'static str = "epoch,train_loss,train_acc,val_loss,val_acc";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        for e in &self.entries {
            writeln!(
                out,
                "{},{:.6},{:.6},{},{}",
                e.epoch,
                e.train_loss,
                e.train_acc,
                opt(e.val_loss),
                opt(e.val_acc)
            )
            .unwrap();
        }
        out
    }
}

fn loss_and_accuracy(params: &MlpParams, x: &Matrix, y: &[u8]) -> (f64, f64) {
    let mut cache = ForwardCache::default();
    let (mut loss, mut correct) = (0.0, 0usize);
    for (row, &t) in x.iter_rows().zip(y) {
        forward_into(params, row, &mut cache);
        loss += logit_log_loss(cache.logit, f64::from(t));
        correct += usize::from(u8::from(sigmoid(cache.logit) >= 0.5) == t);
    }
    (loss / y.len() as f64, correct as f64 / y.len() as f64)
}

/// Training rows in a content-defined order, so the input order of the
/// training set has no effect; only the seeded shuffle decides batches.
fn canonical_order(x: &Matrix, y: &[u8]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.rows()).collect();
    idx.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y[a].cmp(&y[b]))
    });
    idx
}

pub fn train_mlp(
    x: &Matrix,
    y: &[u8],
    validation: Option<(&Matrix, &[u8])>,
    arch: &MlpArchitecture,
    config: &MlpTrainConfig,
) -> Result<(MlpParams, TrainingTrace)> {
    arch.validate()?;
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::Config("epochs and batch_size must be >= 1".into()));
    }
    if x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.cols() != arch.layer_sizes[0] {
        return Err(Error::Dimension {
            expected: arch.layer_sizes[0],
            got: x.cols(),
        });
    }

    let mut params = MlpParams::init(arch, config.seed);
    let mut flat = params.flatten();
    let mut m = vec![0.0; flat.len()];
    let mut v = vec![0.0; flat.len()];
    let mut step = 0i32;
    let mut shuffle_rng = rng::stream(config.seed, Purpose::MlpShuffle, 0);
    let mut order = canonical_order(x, y);
    let mut trace = TrainingTrace::default();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(config.batch_size) {
            let (_, grads) = mlp_gradients(&params, x, y, batch)?;
            let g = grads.flatten();
            step += 1;
            let c1 = 1.0 - config.beta1.powi(step);
            let c2 = 1.0 - config.beta2.powi(step);
            for k in 0..flat.len() {
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
                flat[k] -=
                    config.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + config.epsilon);
            }
            params.unflatten(&flat);
        }
        if !params.is_finite() {
            return Err(Error::Numeric("MLP training".into()));
        }
        let (train_loss, train_acc) = loss_and_accuracy(&params, x, y);
        let (val_loss, val_acc) = match validation {
            Some((vx, vy)) if !vx.is_empty() => {
                let (l, a) = loss_and_accuracy(&params, vx, vy);
                (Some(l), Some(a))
            }
            _ => (None, None),
        };
        trace.entries.push(TraceEntry {
            epoch,
            train_loss,
            train_acc,
            val_loss,
            val_acc,
        });
    }
    Ok((params, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_net(w1: f64, b1: f64, b2: f64) -> MlpParams {
        MlpParams {
            layers: vec![
                Layer {
                    inputs: 1,
                    outputs: 1,
                    weights: vec![w1],
                    bias: vec![b1],
                },
                Layer {
                    inputs: 1,
                    outputs: 1,
                    weights: vec![1.0],
                    bias: vec![b2],
                },
            ],
        }
    }

    #[test]
    fn zero_network_outputs_half() {
        let p = MlpParams::zeros(&MlpArchitecture::default());
        assert_eq!(mlp_forward(&p, &[1.0; 7]).unwrap().0, 0.5);
        assert!(mlp_forward(&p, &[1.0; 3]).is_err());
    }

    #[test]
    fn hand_evaluated_layers() {
        let (p, cache) = mlp_forward(&hand_net(2.0, -1.0, 0.0), &[1.0]).unwrap();
        assert_eq!(cache.inputs[1], vec![1.0]);
        assert!((p - 0.731_059).abs() < 1e-6);

        let (p, cache) = mlp_forward(&hand_net(-2.0, 0.0, 0.3), &[1.0]).unwrap();
        assert_eq!(cache.inputs[1], vec![0.0]);
        assert_eq!(p, sigmoid(0.3));
    }

    #[test]
    fn one_epoch_gives_one_trace_entry() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        let y = [0, 1, 1];
        let arch = MlpArchitecture::new(vec![2, 3, 1]);
        let cfg = MlpTrainConfig {
            epochs: 1,
            ..Default::default()
        };
        let (_, trace) = train_mlp(&x, &y, None, &arch, &cfg).unwrap();
        assert_eq!(trace.entries.len(), 1);
        let cfg = MlpTrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(train_mlp(&x, &y, None, &arch, &cfg).is_err());
    }

    #[test]
    fn architecture_validation() {
        let x = Matrix::from_rows(&[[0.0, 1.0]]);
        for sizes in [vec![2, 1], vec![2, 3, 2], vec![2, 0, 1]] {
            let arch = MlpArchitecture::new(sizes);
            assert!(train_mlp(&x, &[1], None, &arch, &MlpTrainConfig::default()).is_err());
        }
    }

    #[test]
    fn saturated_output_stays_inside_unit_interval() {
        let p = hand_net(100.0, 0.0, 0.0).predict_proba(&[10.0]).unwrap();
        assert!(p < 1.0);
        let q = hand_net(1.0, 0.0, -1000.0).predict_proba(&[0.0]).unwrap();
        assert!(q > 0.0);
    }
}
