//! Packaging technology generations and chiplet geometry.
//!
//! Every length is stored in meters. The built-in tables cover two interface
//! families: solder micro-bumps (generations 0..=5) and Cu-Cu hybrid bonds
//! (generations 0..=4). Within a family every geometric field shrinks, or
//! stays equal, from one generation to the next.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::units::{MM, UM};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TechError {
    #[error("{kind} generation index {index} out of range 0..{max}")]
    IndexOutOfRange {
        kind: InterfaceKind,
        index: usize,
        max: usize,
    },
    #[error("geometry field `{field}` must be strictly positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("unknown interface kind `{0}` (expected `ubump` or `hybrid`)")]
    UnknownKind(String),
}

/// Interface family a generation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterfaceKind {
    MicroBump,
    HybridBond,
}

impl InterfaceKind {
    pub const ALL: [InterfaceKind; 2] = [InterfaceKind::MicroBump, InterfaceKind::HybridBond];

    /// Highest valid generation index.
    pub fn max_index(self) -> usize {
        self.table().len() - 1
    }

    fn table(self) -> &'static [TableRow] {
        match self {
            InterfaceKind::MicroBump => &MICRO_BUMP_TABLE,
            InterfaceKind::HybridBond => &HYBRID_BOND_TABLE,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            InterfaceKind::MicroBump => "ubump",
            InterfaceKind::HybridBond => "hybrid",
        }
    }
}

impl fmt::Display for InterfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceKind::MicroBump => f.write_str("micro-bump"),
            InterfaceKind::HybridBond => f.write_str("hybrid-bond"),
        }
    }
}

impl FromStr for InterfaceKind {
    type Err = TechError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ubump" | "micro-bump" | "microbump" | "micro_bump" => Ok(InterfaceKind::MicroBump),
            "hybrid" | "hybrid-bond" | "hybrid_bond" | "hb" => Ok(InterfaceKind::HybridBond),
            _ => Err(TechError::UnknownKind(s.to_string())),
        }
    }
}

/// Wire cross-section and run length, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireGeometry {
    pub length: f64,
    pub width: f64,
    pub spacing: f64,
    pub thickness: f64,
    /// Height above the return plane.
    pub height: f64,
}

impl WireGeometry {
    pub fn new(
        length: f64,
        width: f64,
        spacing: f64,
        thickness: f64,
        height: f64,
    ) -> Result<Self, TechError> {
        let g = Self {
            length,
            width,
            spacing,
            thickness,
            height,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), TechError> {
        positive("length", self.length)?;
        positive("width", self.width)?;
        positive("spacing", self.spacing)?;
        positive("thickness", self.thickness)?;
        positive("height", self.height)
    }

    /// Same cross-section, different run length. Zero is allowed here so that
    /// degenerate-channel sweeps can be expressed.
    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PadGeometry {
    pub pitch: f64,
    pub kind: InterfaceKind,
}

impl PadGeometry {
    pub fn new(pitch: f64, kind: InterfaceKind) -> Result<Self, TechError> {
        positive("pitch", pitch)?;
        Ok(Self { pitch, kind })
    }
}

/// One packaging generation: wire and pad geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechGeneration {
    pub kind: InterfaceKind,
    pub index: usize,
    pub wire: WireGeometry,
    pub pad: PadGeometry,
}

impl TechGeneration {
    /// Builds a custom generation from raw fields (meters). Single-row
    /// invariants are checked; cross-generation monotonicity is not.
    pub fn custom(
        kind: InterfaceKind,
        index: usize,
        wire: WireGeometry,
        pitch: f64,
    ) -> Result<Self, TechError> {
        wire.validate()?;
        Ok(Self {
            kind,
            index,
            wire,
            pad: PadGeometry::new(pitch, kind)?,
        })
    }

    /// Generation with the substrate channel length replaced.
    pub fn with_length(mut self, length: f64) -> Self {
        self.wire.length = length;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChipletGeometry {
    pub edge: f64,
    pub spacing: f64,
}

impl ChipletGeometry {
    pub fn new(edge: f64, spacing: f64) -> Result<Self, TechError> {
        positive("edge", edge)?;
        positive("spacing", spacing)?;
        Ok(Self { edge, spacing })
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), TechError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(TechError::NonPositive { field, value })
    }
}

// (L, W = S, T = H, P) in table units.
struct TableRow {
    length: f64,
    width: f64,
    thickness: f64,
    pitch: f64,
}

const MICRO_BUMP_TABLE: [TableRow; 6] = [
    row(4.0 * MM, 2.5 * UM, 5.0 * UM, 70.0 * UM),
    row(2.0 * MM, 2.0 * UM, 4.0 * UM, 55.0 * UM),
    row(1.6 * MM, 1.5 * UM, 3.0 * UM, 40.0 * UM),
    row(0.9 * MM, 1.0 * UM, 2.0 * UM, 30.0 * UM),
    row(0.4 * MM, 0.5 * UM, 1.0 * UM, 20.0 * UM),
    row(0.15 * MM, 0.25 * UM, 0.5 * UM, 10.0 * UM),
];

const HYBRID_BOND_TABLE: [TableRow; 5] = [
    row(150.0 * UM, 0.25 * UM, 0.5 * UM, 10.0 * UM),
    row(100.0 * UM, 0.20 * UM, 0.4 * UM, 5.0 * UM),
    row(75.0 * UM, 0.15 * UM, 0.3 * UM, 2.5 * UM),
    row(50.0 * UM, 0.10 * UM, 0.2 * UM, 1.0 * UM),
    row(25.0 * UM, 0.05 * UM, 0.1 * UM, 0.5 * UM),
];

const fn row(length: f64, width: f64, thickness: f64, pitch: f64) -> TableRow {
    TableRow {
        length,
        width,
        thickness,
        pitch,
    }
}

/// Exact table row for `(kind, index)` in SI units.
pub fn builtin_generation(kind: InterfaceKind, index: usize) -> Result<TechGeneration, TechError> {
    let r = kind.table().get(index).ok_or(TechError::IndexOutOfRange {
        kind,
        index,
        max: kind.max_index(),
    })?;
    Ok(TechGeneration {
        kind,
        index,
        wire: WireGeometry {
            length: r.length,
            width: r.width,
            spacing: r.width,
            thickness: r.thickness,
            height: r.thickness,
        },
        pad: PadGeometry {
            pitch: r.pitch,
            kind,
        },
    })
}

/// Whole table for a family, ascending by index.
pub fn list_generations(kind: InterfaceKind) -> Vec<TechGeneration> {
    (0..kind.table().len())
        .map(|i| builtin_generation(kind, i).expect("index within table"))
        .collect()
}
