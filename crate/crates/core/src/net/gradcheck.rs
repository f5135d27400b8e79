use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::net::train::{accumulate_gradient, bce_loss, Gradients, Scratch};
use crate::net::Network;
use crate::{Error, Result};

/// Outcome of comparing analytic gradients with central finite differences.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Coordinates actually compared.
    pub n_checked: usize,
    /// Coordinates skipped because the perturbation crossed a ReLU kink,
    /// where a central difference does not estimate the one-sided gradient.
    pub n_skipped: usize,
}

const ABS_FLOOR: f64 = 1e-8;

/// Checks the backpropagation gradient of the BCE loss for one data row
/// against central finite differences.
///
/// Samples at least 50 weight coordinates (all of them when the network is
/// smaller) plus a handful of biases, each perturbed by `±epsilon`. When both
/// gradients are below an absolute floor the coordinate counts as exact, so
/// saturated points do not produce spurious relative errors; coordinates
/// whose perturbation flips a ReLU activation are excluded the same way.
pub fn gradient_check(
    net: &Network,
    input: &[f64],
    label: u8,
    epsilon: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParam("epsilon must be positive".into()));
    }
    if input.len() != net.structure().input_size() {
        return Err(Error::DimensionMismatch {
            expected: net.structure().input_size(),
            got: input.len(),
        });
    }

    let mut scratch = Scratch::for_net(net);
    let mut grads = Gradients::zeros_like(net);
    accumulate_gradient(net, input, label, &mut scratch, &mut grads);

    let sizes = net.structure().layer_sizes().to_vec();
    let n_pairs = sizes.len() - 1;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let total_weights = net.structure().n_weights();
    let n_weight_samples = total_weights.min(64);

    let mut positions: Vec<(usize, usize, bool)> = Vec::new();
    if total_weights <= n_weight_samples {
        for l in 0..n_pairs {
            for i in 0..sizes[l] * sizes[l + 1] {
                positions.push((l, i, true));
            }
        }
    } else {
        for _ in 0..n_weight_samples {
            let l = rng.random_range(0..n_pairs);
            let i = rng.random_range(0..sizes[l] * sizes[l + 1]);
            positions.push((l, i, true));
        }
    }
    for _ in 0..8 {
        let l = rng.random_range(0..n_pairs);
        let i = rng.random_range(0..sizes[l + 1]);
        positions.push((l, i, false));
    }

    let mut probe = net.clone();
    let mut acts = net.new_activations();
    let mut max_rel = 0.0f64;
    let mut n_checked = 0usize;
    let mut n_skipped = 0usize;
    for (l, i, is_weight) in positions.iter().copied() {
        let analytic = if is_weight { grads.gw[l][i] } else { grads.gb[l][i] };
        let (loss_plus, pattern_plus) =
            perturbed_loss(&mut probe, &mut acts, l, i, is_weight, epsilon, input, label);
        let (loss_minus, pattern_minus) =
            perturbed_loss(&mut probe, &mut acts, l, i, is_weight, -epsilon, input, label);
        if pattern_plus != pattern_minus {
            n_skipped += 1;
            continue;
        }
        n_checked += 1;
        let numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
        if analytic.abs() < ABS_FLOOR && numeric.abs() < ABS_FLOOR {
            continue;
        }
        let rel = (numeric - analytic).abs() / (numeric.abs() + analytic.abs()).max(ABS_FLOOR);
        max_rel = max_rel.max(rel);
    }
    Ok(GradCheckReport { max_relative_error: max_rel, n_checked, n_skipped })
}

/// Loss at the perturbed parameter, plus a fingerprint of which hidden units
/// were active during the forward pass.
#[allow(clippy::too_many_arguments)]
fn perturbed_loss(
    probe: &mut Network,
    acts: &mut [Vec<f64>],
    layer: usize,
    index: usize,
    is_weight: bool,
    delta: f64,
    input: &[f64],
    label: u8,
) -> (f64, u64) {
    let slot = if is_weight {
        &mut probe.layer_weights_mut(layer)[index]
    } else {
        &mut probe.layer_biases_mut(layer)[index]
    };
    let original = *slot;
    *slot = original + delta;
    probe.forward_into(input, acts);
    let p = acts.last().unwrap()[0];
    let n_layers = acts.len();
    let mut pattern = 0xcbf2_9ce4_8422_2325u64;
    for layer_acts in &acts[1..n_layers - 1] {
        for &a in layer_acts.iter() {
            pattern = (pattern ^ u64::from(a > 0.0)).wrapping_mul(0x0000_0100_0000_01B3);
        }
    }
    let slot = if is_weight {
        &mut probe.layer_weights_mut(layer)[index]
    } else {
        &mut probe.layer_biases_mut(layer)[index]
    };
    *slot = original;
    (bce_loss(p, label), pattern)
}
