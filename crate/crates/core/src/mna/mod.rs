//! Nonlinear transient circuit simulation by modified nodal analysis.
//!
//! Unknowns are the non-ground node voltages, one internal node per diode
//! series resistance, and one branch current per voltage source and
//! inductor. Capacitors and inductors use trapezoidal companion models after
//! a single backward-Euler start-up step; diodes are linearised by Newton
//! iteration with SPICE-style junction-voltage limiting.

pub mod circuit;
pub mod lu;
pub mod netlist;
pub mod solver;
pub mod waveform;

pub use circuit::{Circuit, DiodeModel, Element, ElementKind, NodeId, Pwl};
pub use netlist::{parse_netlist, unparse_netlist, Deck, NetlistError};
pub use solver::{dc_operating_point, transient, transient_probed, DcSolution, TransientConfig};
pub use waveform::{peak_abs, probe, Waveform};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("unknown diode model `{0}`")]
    UnknownModel(String),
    #[error("node `{0}` has no path to ground")]
    DanglingNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("invalid transient configuration: {0}")]
    Config(String),
    #[error("{}Newton failed to converge after {iterations} iterations; worst update {residual:e} at `{node}`", fmt_time(*.time))]
    NonConvergence {
        time: Option<f64>,
        iterations: usize,
        node: String,
        residual: f64,
    },
    #[error("{}singular MNA matrix (pivot column {column})", fmt_time(*.time))]
    Singular { time: Option<f64>, column: usize },
}

fn fmt_time(t: Option<f64>) -> String {
    match t {
        Some(t) => format!("t = {t:e} s: "),
        None => "DC operating point: ".to_string(),
    }
}
