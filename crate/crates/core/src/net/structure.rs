use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hidden-layer activation. Only ReLU is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenActivation {
    Relu,
}

/// Output-layer activation. Only sigmoid is supported (binary classifier).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Sigmoid,
}

/// Layer layout of a fully connected feedforward network.
///
/// At least 4 layers (input, two hidden, output) and a single output neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStructure {
    layer_sizes: Vec<usize>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
}

impl NetworkStructure {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 4 {
            return Err(Error::InvalidParam(format!(
                "a network needs at least 4 layers, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidParam("layer sizes must be positive".into()));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::InvalidParam(format!(
                "the output layer must have exactly 1 neuron, got {}",
                layer_sizes.last().unwrap()
            )));
        }
        Ok(Self {
            layer_sizes,
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Sigmoid,
        })
    }

    /// `[input, hidden..., 1]`.
    pub fn with_hidden(input_size: usize, hidden: &[usize]) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input_size);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Self::new(sizes)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    /// Total number of weights across all layer pairs.
    pub fn n_weights(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_fewer_than_four_layers() {
        assert!(NetworkStructure::new(vec![4, 8, 1]).is_err());
        assert!(NetworkStructure::new(vec![4, 8, 8, 1]).is_ok());
    }

    #[test]
    fn rejects_wide_output() {
        assert!(NetworkStructure::new(vec![4, 8, 8, 2]).is_err());
    }

    #[test]
    fn rejects_empty_layer() {
        assert!(NetworkStructure::new(vec![4, 0, 8, 1]).is_err());
    }

    #[test]
    fn with_hidden_builds_expected_sizes() {
        let s = NetworkStructure::with_hidden(25, &[120, 120, 120, 120, 120]).unwrap();
        assert_eq!(s.layer_sizes(), &[25, 120, 120, 120, 120, 120, 1]);
        assert_eq!(s.n_weights(), 25 * 120 + 4 * 120 * 120 + 120);
    }
}
