use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Deserialize;

use crate::data::EncodedDataset;
use crate::net::Network;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Momentum,
}

/// Hyperparameters of one training run. All values are configuration, not
/// contract; the defaults work for the small networks this crate targets.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            learning_rate: 0.01,
            optimizer: Optimizer::Momentum,
            momentum: 0.9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidParam("batch_size must be positive".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParam("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParam("momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Accumulated parameter gradients, shaped like the network they came from.
pub(crate) struct Gradients {
    pub gw: Vec<Vec<f64>>,
    pub gb: Vec<Vec<f64>>,
}

impl Gradients {
    pub(crate) fn zeros_like(net: &Network) -> Self {
        let sizes = net.structure().layer_sizes();
        Self {
            gw: sizes.windows(2).map(|p| vec![0.0; p[0] * p[1]]).collect(),
            gb: sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub(crate) fn reset(&mut self) {
        for g in self.gw.iter_mut().chain(self.gb.iter_mut()) {
            g.fill(0.0);
        }
    }
}

pub(crate) struct Scratch {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Scratch {
    pub(crate) fn for_net(net: &Network) -> Self {
        Self { acts: net.new_activations(), deltas: net.new_activations() }
    }
}

/// Binary cross-entropy of a sigmoid output against a 0/1 label.
pub(crate) fn bce_loss(p: f64, y: u8) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// One backpropagation pass for a single row. Adds this row's gradient of the
/// binary cross-entropy loss into `grads` and returns the row loss.
///
/// This is the analytic-gradient path that both training and gradient
/// checking use.
pub(crate) fn accumulate_gradient(
    net: &Network,
    row: &[f64],
    label: u8,
    scratch: &mut Scratch,
    grads: &mut Gradients,
) -> f64 {
    let sizes = net.structure().layer_sizes();
    let n_layers = sizes.len();
    net.forward_into(row, &mut scratch.acts);
    let p = scratch.acts[n_layers - 1][0];
    let y = label as f64;

    // d loss / d output-pre-activation for sigmoid + BCE.
    scratch.deltas[n_layers - 1][0] = p - y;

    for l in (1..n_layers - 1).rev() {
        let (lower, upper) = scratch.deltas.split_at_mut(l + 1);
        let delta_next = &upper[0];
        let delta_here = &mut lower[l];
        let n_tgt = sizes[l + 1];
        let w = net.layer_weights(l);
        for s in 0..sizes[l] {
            if scratch.acts[l][s] <= 0.0 {
                delta_here[s] = 0.0;
                continue;
            }
            let row_w = &w[s * n_tgt..(s + 1) * n_tgt];
            let mut sum = 0.0;
            for (&wv, &d) in row_w.iter().zip(delta_next.iter()) {
                sum += wv * d;
            }
            delta_here[s] = sum;
        }
    }

    for l in 0..n_layers - 1 {
        let n_tgt = sizes[l + 1];
        let delta_next = &scratch.deltas[l + 1];
        let gw = &mut grads.gw[l];
        for (s, &a) in scratch.acts[l].iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let g_row = &mut gw[s * n_tgt..(s + 1) * n_tgt];
            for (g, &d) in g_row.iter_mut().zip(delta_next.iter()) {
                *g += a * d;
            }
        }
        for (g, &d) in grads.gb[l].iter_mut().zip(delta_next.iter()) {
            *g += d;
        }
    }

    bce_loss(p, label)
}

/// The trained network together with its per-epoch mean training loss.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub network: Network,
    pub epoch_losses: Vec<f64>,
}

/// Trains with minibatch gradient descent on binary cross-entropy.
///
/// Deterministic given `cfg.seed` (the shuffle order is fixed by it). Zero
/// epochs returns the input network unchanged.
pub fn train(net: Network, data: &EncodedDataset, cfg: &TrainConfig) -> Result<Network> {
    train_with_losses(net, data, cfg).map(|r| r.network)
}

/// [`train`], also reporting the mean training loss of each epoch.
pub fn train_with_losses(
    mut net: Network,
    data: &EncodedDataset,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.n_cols() != net.structure().input_size() {
        return Err(Error::DimensionMismatch {
            expected: net.structure().input_size(),
            got: data.n_cols(),
        });
    }
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }

    let n_layers = net.structure().n_layers();
    let mut scratch = Scratch::for_net(&net);
    let mut grads = Gradients::zeros_like(&net);
    let mut velocity = Gradients::zeros_like(&net);
    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            grads.reset();
            let mut batch_loss = 0.0;
            for &r in batch {
                batch_loss +=
                    accumulate_gradient(&net, data.row(r), data.labels()[r], &mut scratch, &mut grads);
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: batch_idx });
            }
            epoch_loss += batch_loss;

            let scale = 1.0 / batch.len() as f64;
            for l in 0..n_layers - 1 {
                match cfg.optimizer {
                    Optimizer::Sgd => {
                        apply_step(net.layer_weights_mut(l), &grads.gw[l], cfg.learning_rate * scale);
                        apply_step(net.layer_biases_mut(l), &grads.gb[l], cfg.learning_rate * scale);
                    }
                    Optimizer::Momentum => {
                        momentum_step(
                            net.layer_weights_mut(l),
                            &mut velocity.gw[l],
                            &grads.gw[l],
                            cfg.learning_rate,
                            cfg.momentum,
                            scale,
                        );
                        momentum_step(
                            net.layer_biases_mut(l),
                            &mut velocity.gb[l],
                            &grads.gb[l],
                            cfg.learning_rate,
                            cfg.momentum,
                            scale,
                        );
                    }
                }
            }
        }
        epoch_losses.push(epoch_loss / data.n_rows() as f64);
    }
    Ok(TrainReport { network: net, epoch_losses })
}

fn apply_step(params: &mut [f64], grad: &[f64], lr_scaled: f64) {
    for (p, &g) in params.iter_mut().zip(grad) {
        *p -= lr_scaled * g;
    }
}

fn momentum_step(
    params: &mut [f64],
    velocity: &mut [f64],
    grad: &[f64],
    lr: f64,
    momentum: f64,
    scale: f64,
) {
    for ((p, v), &g) in params.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = momentum * *v + g * scale;
        *p -= lr * *v;
    }
}

/// Evaluates the mean BCE loss over a dataset without touching the network.
pub fn mean_loss(net: &Network, data: &EncodedDataset) -> Result<f64> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut acts = net.new_activations();
    let mut total = 0.0;
    for r in 0..data.n_rows() {
        if data.row(r).len() != net.structure().input_size() {
            return Err(Error::DimensionMismatch {
                expected: net.structure().input_size(),
                got: data.row(r).len(),
            });
        }
        net.forward_into(data.row(r), &mut acts);
        let p = acts.last().unwrap()[0];
        total += bce_loss(p, data.labels()[r]);
    }
    Ok(total / data.n_rows() as f64)
}
