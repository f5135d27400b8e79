use std::fmt::Write as _;
use std::path::Path;

use crate::net::{Network, NetworkStructure};
use crate::{Error, Result};

const MAGIC: &str = "bcmnet-network v1";

/// Renders a network as its line-oriented text form.
///
/// Numbers are written with 17 significant digits, which round-trips every
/// finite f64 exactly; [`parse_network`] restores a value-identical network.
pub fn render_network(net: &Network) -> String {
    let sizes = net.structure().layer_sizes();
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    let size_list: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    writeln!(out, "layer_sizes {}", size_list.join(" ")).unwrap();
    writeln!(out, "hidden_activation relu").unwrap();
    writeln!(out, "output_activation sigmoid").unwrap();
    writeln!(out, "seed {}", net.seed()).unwrap();
    for l in 0..sizes.len() - 1 {
        writeln!(out, "weights {} {} {}", l, sizes[l], sizes[l + 1]).unwrap();
        let w = net.layer_weights(l);
        for s in 0..sizes[l] {
            let row = &w[s * sizes[l + 1]..(s + 1) * sizes[l + 1]];
            writeln!(out, "{}", join_floats(row)).unwrap();
        }
        writeln!(out, "biases {} {}", l + 1, sizes[l + 1]).unwrap();
        writeln!(out, "{}", join_floats(net.layer_biases(l))).unwrap();
    }
    out
}

fn join_floats(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v:.16e}").unwrap();
    }
    s
}

pub fn save_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_network(net)).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text)
}

pub fn parse_network(text: &str) -> Result<Network> {
    let bad = |msg: &str| Error::MalformedNetwork(msg.to_string());
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("missing header line"));
    }

    let sizes_line = lines.next().ok_or_else(|| bad("missing layer_sizes"))?;
    let sizes: Vec<usize> = sizes_line
        .strip_prefix("layer_sizes ")
        .ok_or_else(|| bad("expected layer_sizes"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("bad layer size")))
        .collect::<Result<_>>()?;
    if lines.next() != Some("hidden_activation relu") {
        return Err(bad("expected 'hidden_activation relu'"));
    }
    if lines.next() != Some("output_activation sigmoid") {
        return Err(bad("expected 'output_activation sigmoid'"));
    }
    let seed: u64 = lines
        .next()
        .and_then(|l| l.strip_prefix("seed "))
        .ok_or_else(|| bad("expected seed"))?
        .parse()
        .map_err(|_| bad("bad seed"))?;

    let structure = NetworkStructure::new(sizes.clone())?;
    let mut weights = Vec::with_capacity(sizes.len() - 1);
    let mut biases = Vec::with_capacity(sizes.len() - 1);
    for l in 0..sizes.len() - 1 {
        let header = lines.next().ok_or_else(|| bad("missing weights header"))?;
        let expected = format!("weights {} {} {}", l, sizes[l], sizes[l + 1]);
        if header != expected {
            return Err(bad(&format!("expected '{expected}', found '{header}'")));
        }
        let mut layer = Vec::with_capacity(sizes[l] * sizes[l + 1]);
        for _ in 0..sizes[l] {
            let row = lines.next().ok_or_else(|| bad("missing weight row"))?;
            parse_floats(row, sizes[l + 1], &mut layer)?;
        }
        weights.push(layer);

        let header = lines.next().ok_or_else(|| bad("missing biases header"))?;
        let expected = format!("biases {} {}", l + 1, sizes[l + 1]);
        if header != expected {
            return Err(bad(&format!("expected '{expected}', found '{header}'")));
        }
        let row = lines.next().ok_or_else(|| bad("missing bias row"))?;
        let mut layer = Vec::with_capacity(sizes[l + 1]);
        parse_floats(row, sizes[l + 1], &mut layer)?;
        biases.push(layer);
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(bad("trailing content"));
    }
    Network::from_parts(structure, weights, biases, seed)
}

fn parse_floats(line: &str, expected: usize, out: &mut Vec<f64>) -> Result<()> {
    let start = out.len();
    for token in line.split_whitespace() {
        let v: f64 = token
            .parse()
            .map_err(|_| Error::MalformedNetwork(format!("bad number '{token}'")))?;
        out.push(v);
    }
    if out.len() - start != expected {
        return Err(Error::MalformedNetwork(format!(
            "expected {expected} numbers, found {}",
            out.len() - start
        )));
    }
    Ok(())
}
