//! Sampled transient results.

use std::fmt::Write as _;

use super::circuit::{Circuit, ElementKind};
use super::CircuitError;

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub dt: f64,
    pub time: Vec<f64>,
    pub nodes: Vec<(String, Vec<f64>)>,
    /// Branch currents, positive into the element's `+` terminal.
    pub branches: Vec<(String, Vec<f64>)>,
}

impl Waveform {
    pub(crate) fn with_capacity(dt: f64, len: usize, nodes: Vec<String>, branches: Vec<String>) -> Self {
        Self {
            dt,
            time: Vec::with_capacity(len),
            nodes: nodes
                .into_iter()
                .map(|n| (n, Vec::with_capacity(len)))
                .collect(),
            branches: branches
                .into_iter()
                .map(|n| (n, Vec::with_capacity(len)))
                .collect(),
        }
    }

    pub(crate) fn push_sample(
        &mut self,
        t: f64,
        nodes: impl Iterator<Item = f64>,
        branches: impl Iterator<Item = f64>,
    ) {
        self.time.push(t);
        for (slot, v) in self.nodes.iter_mut().zip(nodes) {
            slot.1.push(v);
        }
        for (slot, v) in self.branches.iter_mut().zip(branches) {
            slot.1.push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Voltage trace of `node`; ground reads as zeros.
    pub fn voltage(&self, node: &str) -> Result<std::borrow::Cow<'_, [f64]>, CircuitError> {
        let key = node.to_ascii_lowercase();
        if key == "0" || key == "gnd" {
            return Ok(std::borrow::Cow::Owned(vec![0.0; self.len()]));
        }
        self.nodes
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, v)| std::borrow::Cow::Borrowed(v.as_slice()))
            .ok_or_else(|| CircuitError::UnknownNode(node.to_string()))
    }

    pub fn current(&self, element: &str) -> Result<&[f64], CircuitError> {
        self.branches
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(element))
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| CircuitError::UnknownNode(element.to_string()))
    }

    /// Energy held in capacitors and inductors at sample `k`. Needs a full
    /// recording (every node and inductor current).
    pub fn stored_energy(&self, circuit: &Circuit, k: usize) -> Result<f64, CircuitError> {
        let mut e = 0.0;
        for el in &circuit.elements {
            match el.kind {
                ElementKind::Capacitor { farads, .. } => {
                    let a = self.voltage(circuit.node_name(el.pos))?[k];
                    let b = self.voltage(circuit.node_name(el.neg))?[k];
                    e += 0.5 * farads * (a - b).powi(2);
                }
                ElementKind::Inductor { henries, .. } => {
                    let i = self.current(&el.name)?[k];
                    e += 0.5 * henries * i * i;
                }
                _ => {}
            }
        }
        Ok(e)
    }

    /// CSV with a `time` column and one column per recorded node, values in
    /// shortest round-trip scientific notation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for (n, _) in &self.nodes {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (k, t) in self.time.iter().enumerate() {
            let _ = write!(out, "{t:e}");
            for (_, v) in &self.nodes {
                let _ = write!(out, ",{:e}", v[k]);
            }
            out.push('\n');
        }
        out
    }
}

/// Copy of one node's voltage trace.
pub fn probe(w: &Waveform, node: &str) -> Result<Vec<f64>, CircuitError> {
    w.voltage(node).map(|v| v.into_owned())
}

/// Largest `|v|` seen on `node` over the run.
pub fn peak_abs(w: &Waveform, node: &str) -> Result<f64, CircuitError> {
    Ok(w.voltage(node)?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(values: Vec<f64>) -> Waveform {
        Waveform {
            dt: 1.0,
            time: (0..values.len()).map(|k| k as f64).collect(),
            nodes: vec![("x".into(), values)],
            branches: vec![],
        }
    }

    #[test]
    fn peak_of_constant_and_alternating() {
        assert_eq!(peak_abs(&trace(vec![3.0; 5]), "x").unwrap(), 3.0);
        assert_eq!(peak_abs(&trace(vec![2.0, -2.0, 2.0, -2.0]), "x").unwrap(), 2.0);
    }

    #[test]
    fn unknown_node_is_error() {
        assert!(peak_abs(&trace(vec![1.0]), "nope").is_err());
        assert_eq!(probe(&trace(vec![1.0, 2.0]), "X").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn csv_layout() {
        let csv = trace(vec![0.5, 1.25]).to_csv();
        assert_eq!(csv, "time,x\n0e0,5e-1\n1e0,1.25e0\n");
    }
}
