use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::net::NetworkStructure;
use crate::{Error, Result};

/// A fully connected feedforward network.
///
/// `weights[l]` holds the matrix between layers `l` and `l + 1`, flattened
/// row-major by source neuron: the link from source `s` to target `t` is
/// `weights[l][s * layer_sizes[l + 1] + t]`. `biases[l]` belongs to layer
/// `l + 1` (input neurons carry no bias).
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    structure: NetworkStructure,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    seed: u64,
}

impl Network {
    /// Initializes weights from a symmetric uniform distribution with
    /// standard deviation `sqrt(2 / fan_in)` per layer; biases start at zero.
    /// Bit-identical for equal `(structure, seed)`.
    pub fn init(structure: NetworkStructure, seed: u64) -> Network {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let sizes = structure.layer_sizes();
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            // U[-a, a] with a = sqrt(6 / fan_in) has std sqrt(2 / fan_in).
            let a = (6.0 / fan_in as f64).sqrt();
            let layer: Vec<f64> =
                (0..fan_in * fan_out).map(|_| rng.random_range(-a..=a)).collect();
            weights.push(layer);
            biases.push(vec![0.0; fan_out]);
        }
        Network { structure, weights, biases, seed }
    }

    /// Builds a network from explicit parameters (used by deserialization and
    /// by hand-constructed test fixtures). Shapes must match the structure.
    pub fn from_parts(
        structure: NetworkStructure,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Network> {
        let sizes = structure.layer_sizes();
        if weights.len() != sizes.len() - 1 || biases.len() != sizes.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: sizes.len() - 1,
                got: weights.len().max(biases.len()),
            });
        }
        for (l, pair) in sizes.windows(2).enumerate() {
            if weights[l].len() != pair[0] * pair[1] {
                return Err(Error::DimensionMismatch {
                    expected: pair[0] * pair[1],
                    got: weights[l].len(),
                });
            }
            if biases[l].len() != pair[1] {
                return Err(Error::DimensionMismatch { expected: pair[1], got: biases[l].len() });
            }
            if weights[l].iter().any(|w| !w.is_finite())
                || biases[l].iter().any(|b| !b.is_finite())
            {
                return Err(Error::InvalidParam("network parameters must be finite".into()));
            }
        }
        Ok(Network { structure, weights, biases, seed })
    }

    pub fn structure(&self) -> &NetworkStructure {
        &self.structure
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Weight of the link from `src` in layer `layer` to `tgt` in `layer + 1`.
    pub fn weight(&self, layer: usize, src: usize, tgt: usize) -> f64 {
        self.weights[layer][src * self.structure.layer_sizes()[layer + 1] + tgt]
    }

    /// Flat weight matrix between `layer` and `layer + 1`.
    pub fn layer_weights(&self, layer: usize) -> &[f64] {
        &self.weights[layer]
    }

    /// Biases of layer `layer + 1`.
    pub fn layer_biases(&self, layer: usize) -> &[f64] {
        &self.biases[layer]
    }

    pub(crate) fn layer_weights_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.weights[layer]
    }

    pub(crate) fn layer_biases_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.biases[layer]
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|layer| layer.iter())
            .fold(0.0f64, |m, &w| m.max(w.abs()))
    }

    /// Runs the network on one input row.
    ///
    /// Returns the sigmoid output together with every layer's activation
    /// vector (index 0 is the input itself).
    pub fn forward(&self, input: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
        if input.len() != self.structure.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.structure.input_size(),
                got: input.len(),
            });
        }
        let mut acts = self.new_activations();
        let _ = self.forward_into(input, &mut acts);
        let output = acts.last().unwrap()[0];
        Ok((output, acts))
    }

    /// Pre-activation of the output neuron for one input row.
    pub fn output_logit(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.structure.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.structure.input_size(),
                got: input.len(),
            });
        }
        let mut acts = self.new_activations();
        Ok(self.forward_into(input, &mut acts))
    }

    /// Allocates activation buffers shaped for this network.
    pub(crate) fn new_activations(&self) -> Vec<Vec<f64>> {
        self.structure.layer_sizes().iter().map(|&n| vec![0.0; n]).collect()
    }

    /// Forward pass writing every layer's activations into `acts`; returns
    /// the output neuron's pre-activation. `acts` must be shaped by
    /// [`Network::new_activations`] and `input` must match the input layer.
    pub(crate) fn forward_into(&self, input: &[f64], acts: &mut [Vec<f64>]) -> f64 {
        let sizes = self.structure.layer_sizes();
        let n_layers = sizes.len();
        acts[0].copy_from_slice(input);
        let mut logit = 0.0;
        for l in 0..n_layers - 1 {
            let (lower, upper) = acts.split_at_mut(l + 1);
            let src_acts = &lower[l];
            let out = &mut upper[0];
            let n_tgt = sizes[l + 1];
            out.copy_from_slice(&self.biases[l]);
            let w = &self.weights[l];
            for (s, &a) in src_acts.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let row = &w[s * n_tgt..(s + 1) * n_tgt];
                for (o, &wv) in out.iter_mut().zip(row) {
                    *o += a * wv;
                }
            }
            if l + 2 == n_layers {
                logit = out[0];
                out[0] = sigmoid(out[0]);
            } else {
                for o in out.iter_mut() {
                    if *o < 0.0 {
                        *o = 0.0;
                    }
                }
            }
        }
        logit
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeroed(sizes: Vec<usize>) -> Network {
        let structure = NetworkStructure::new(sizes).unwrap();
        let weights = structure
            .layer_sizes()
            .windows(2)
            .map(|p| vec![0.0; p[0] * p[1]])
            .collect();
        let biases = structure.layer_sizes()[1..].iter().map(|&n| vec![0.0; n]).collect();
        Network::from_parts(structure, weights, biases, 0).unwrap()
    }

    #[test]
    fn init_shapes_match_structure() {
        let s = NetworkStructure::new(vec![4, 120, 120, 120, 120, 120, 1]).unwrap();
        let net = Network::init(s, 1);
        assert_eq!(net.layer_weights(0).len(), 4 * 120);
        for l in 1..5 {
            assert_eq!(net.layer_weights(l).len(), 120 * 120);
        }
        assert_eq!(net.layer_weights(5).len(), 120);
        assert_eq!(net.layer_biases(0).len(), 120);
        assert!(net.layer_biases(0).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn init_is_deterministic() {
        let s = NetworkStructure::new(vec![3, 200, 200, 200, 1]).unwrap();
        let a = Network::init(s.clone(), 9);
        let b = Network::init(s, 9);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_network_outputs_half() {
        let net = zeroed(vec![3, 5, 5, 1]);
        for input in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5]] {
            let (out, _) = net.forward(&input).unwrap();
            assert_eq!(out, 0.5);
        }
    }

    #[test]
    fn hand_computed_single_path() {
        // Width-1 chain: x=2 -> relu(0.5x)=1 -> relu(-1*1+0.25)=0 -> sigmoid(3*0+1)
        let structure = NetworkStructure::new(vec![1, 1, 1, 1]).unwrap();
        let weights = vec![vec![0.5], vec![-1.0], vec![3.0]];
        let biases = vec![vec![0.0], vec![0.25], vec![1.0]];
        let net = Network::from_parts(structure, weights, biases, 0).unwrap();
        let (out, acts) = net.forward(&[2.0]).unwrap();
        assert_eq!(acts[1][0], 1.0);
        assert_eq!(acts[2][0], 0.0);
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((out - expected).abs() < 1e-15);
    }

    #[test]
    fn relu_positive_homogeneity() {
        let s = NetworkStructure::new(vec![4, 6, 6, 6, 1]).unwrap();
        let mut net = Network::init(s, 3);
        for l in 0..4 {
            net.layer_biases_mut(l).fill(0.0);
        }
        let x = [0.3, -0.7, 0.9, 0.1];
        let x2: Vec<f64> = x.iter().map(|v| v * 2.0).collect();
        let z1 = net.output_logit(&x).unwrap();
        let z2 = net.output_logit(&x2).unwrap();
        assert!((z2 - 2.0 * z1).abs() < 1e-12, "z1={z1} z2={z2}");
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = zeroed(vec![3, 4, 4, 1]);
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn from_parts_rejects_bad_shapes() {
        let structure = NetworkStructure::new(vec![2, 2, 2, 1]).unwrap();
        let weights = vec![vec![0.0; 4], vec![0.0; 4], vec![0.0; 3]];
        let biases = vec![vec![0.0; 2], vec![0.0; 2], vec![0.0; 1]];
        assert!(Network::from_parts(structure, weights, biases, 0).is_err());
    }
}
