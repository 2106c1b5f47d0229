//! Analytical I/O area and bandwidth models for chiplet sizing.
//!
//! Both interfaces sit in a single row of channels along one chiplet edge.
//! Supply bandwidth grows linearly with the edge until a channel cap binds;
//! compute demand grows with the remaining die area, so beyond some edge the
//! interface can no longer feed the array.

use serde::{Deserialize, Serialize};

use crate::esd::{self, CdmBench, EsdError, SizingOptions};
use crate::extraction::{extract_channel, ExtractionParams};
use crate::techlib::{InterfaceKind, TechGeneration};
use crate::units::{MM, UM};

#[derive(Debug, thiserror::Error)]
pub enum ExploreError {
    #[error("I/O consumes entire chiplet (io area {io_mm2:.4} mm² ≥ die area {die_mm2:.4} mm²)")]
    IoExceedsDie { io_mm2: f64, die_mm2: f64 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Esd(#[from] EsdError),
    #[error(transparent)]
    Extraction(#[from] crate::extraction::ExtractionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Aib,
    Dsl,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Protocol::Aib => "AIB",
            Protocol::Dsl => "DSL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoProtocolModel {
    pub name: Protocol,
    /// Area-equivalent bump cells per channel (signal, power, ground and the
    /// channel's share of I/O circuitry, in units of one P² cell).
    pub bumps_per_channel: f64,
    pub data_wires: f64,
    /// Gb/s per data wire.
    pub rate_gbps: f64,
    pub max_channels: Option<usize>,
    /// Bump pitch, meters.
    pub pitch: f64,
    /// Edge length one channel occupies, meters.
    pub channel_footprint: f64,
    /// Edges carrying I/O (1 = single-edge placement).
    pub edges: usize,
}

impl IoProtocolModel {
    /// AIB-style channel: 20 TX + 20 RX at 2 Gb/s, 24 channels per column,
    /// footprint chosen so that the column fills a 4 mm edge.
    pub fn aib() -> Self {
        Self {
            name: Protocol::Aib,
            bumps_per_channel: 2700.0,
            data_wires: 40.0,
            rate_gbps: 2.0,
            max_channels: Some(24),
            pitch: 10.0 * UM,
            channel_footprint: 4.0 * MM / 24.0,
            edges: 1,
        }
    }

    /// DSL channel: 4 signals + 1 ground bump at 1 Gb/s, ten bump rows deep.
    pub fn dsl() -> Self {
        Self {
            name: Protocol::Dsl,
            bumps_per_channel: 5.0,
            data_wires: 4.0,
            rate_gbps: 1.0,
            max_channels: None,
            pitch: 10.0 * UM,
            channel_footprint: 5.0 * UM,
            edges: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ExploreError> {
        let ok = [
            self.bumps_per_channel,
            self.data_wires,
            self.rate_gbps,
            self.pitch,
            self.channel_footprint,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite())
            && self.edges >= 1
            && self.max_channels != Some(0);
        if ok {
            Ok(())
        } else {
            Err(ExploreError::Invalid(format!("{} model needs positive fields", self.name)))
        }
    }

    /// Channels that fit along `edge` (meters).
    pub fn channels(&self, edge: f64) -> usize {
        if !(edge > 0.0) {
            return 0;
        }
        // small epsilon so an exact multiple of the footprint is not lost to rounding
        let per_edge = (edge / self.channel_footprint + 1e-9).floor() as usize;
        let per_edge = self.max_channels.map_or(per_edge, |m| per_edge.min(m));
        per_edge * self.edges
    }

    /// Edge beyond which the channel cap binds, if any.
    pub fn saturation_edge(&self) -> Option<f64> {
        self.max_channels
            .map(|m| m as f64 * self.channel_footprint)
    }
}

/// Bump-array area in mm² and the channel count, for an edge in mm.
pub fn io_array_area(proto: &IoProtocolModel, edge_mm: f64) -> (f64, usize) {
    let ch = proto.channels(edge_mm * MM);
    let cell_mm2 = (proto.pitch / MM).powi(2);
    (ch as f64 * proto.bumps_per_channel * cell_mm2, ch)
}

/// Supply bandwidth, Gb/s.
pub fn supply_bandwidth(proto: &IoProtocolModel, edge_mm: f64) -> f64 {
    proto.channels(edge_mm * MM) as f64 * proto.data_wires * proto.rate_gbps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeModel {
    pub node: String,
    /// MAC units per mm².
    pub mac_density: f64,
    pub frequency_hz: f64,
    /// Bytes each MAC moves off-chiplet per cycle.
    pub bytes_per_mac: f64,
}

impl ComputeModel {
    /// Calibrated so both interfaces keep up to roughly a 10 mm edge.
    pub fn legacy() -> Self {
        Self {
            node: "legacy".into(),
            mac_density: 1125.0,
            frequency_hz: 1e9,
            bytes_per_mac: 0.002,
        }
    }

    /// Calibrated so that at a 2 mm edge DSL keeps up and AIB does not.
    pub fn advanced() -> Self {
        Self {
            node: "advanced".into(),
            mac_density: 19500.0,
            frequency_hz: 1e9,
            bytes_per_mac: 0.002,
        }
    }

    pub fn validate(&self) -> Result<(), ExploreError> {
        let ok = [self.mac_density, self.frequency_hz, self.bytes_per_mac]
            .iter()
            .all(|v| *v >= 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ExploreError::Invalid("compute model fields must be non-negative".into()))
        }
    }

    /// Demand per mm² of compute area, Gb/s.
    pub fn gbps_per_mm2(&self) -> f64 {
        self.mac_density * self.frequency_hz * self.bytes_per_mac * 8.0 / 1e9
    }
}

/// Peak compute data demand, Gb/s, for the die area left after `io_mm2`.
pub fn compute_demand(cm: &ComputeModel, edge_mm: f64, io_mm2: f64) -> Result<f64, ExploreError> {
    let die = edge_mm * edge_mm;
    if io_mm2 >= die {
        return Err(ExploreError::IoExceedsDie {
            io_mm2,
            die_mm2: die,
        });
    }
    Ok(cm.mac_density * (die - io_mm2) * cm.frequency_hz * cm.bytes_per_mac * 8.0 / 1e9)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPoint {
    pub protocol: Protocol,
    pub channels: usize,
    pub area_mm2: f64,
    pub supply_gbps: f64,
    pub supported: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreResult {
    pub edge_mm: f64,
    pub protocols: Vec<ProtocolPoint>,
    /// Demand of the array left by the smallest I/O footprint among the
    /// compared protocols, i.e. the most demanding case.
    pub demand_gbps: f64,
}

/// Closed edge intervals `[lo, hi]` (mm) over which a protocol is supported.
pub type Intervals = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub points: Vec<ExploreResult>,
    /// Per protocol, in input order.
    pub supported: Vec<(Protocol, Intervals)>,
}

pub fn explore_edge(
    protos: &[IoProtocolModel],
    cm: &ComputeModel,
    edge_mm: f64,
) -> Result<ExploreResult, ExploreError> {
    let areas: Vec<(f64, usize)> = protos.iter().map(|p| io_array_area(p, edge_mm)).collect();
    let min_io = areas.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let demand = compute_demand(cm, edge_mm, if min_io.is_finite() { min_io } else { 0.0 })?;
    let protocols = protos
        .iter()
        .zip(&areas)
        .map(|(p, &(area, channels))| {
            let supply = supply_bandwidth(p, edge_mm);
            ProtocolPoint {
                protocol: p.name,
                channels,
                area_mm2: area,
                supply_gbps: supply,
                supported: supply >= demand,
            }
        })
        .collect();
    Ok(ExploreResult {
        edge_mm,
        protocols,
        demand_gbps: demand,
    })
}

/// Sweeps `edges_mm` and collects the supported intervals per protocol.
pub fn supported_range(
    protos: &[IoProtocolModel],
    cm: &ComputeModel,
    edges_mm: &[f64],
) -> Result<Exploration, ExploreError> {
    if edges_mm.is_empty() {
        return Err(ExploreError::Invalid("edge grid is empty".into()));
    }
    for p in protos {
        p.validate()?;
    }
    cm.validate()?;
    let points = edges_mm
        .iter()
        .map(|&e| explore_edge(protos, cm, e))
        .collect::<Result<Vec<_>, _>>()?;
    let supported = protos
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut runs: Intervals = Vec::new();
            let mut open: Option<f64> = None;
            let mut last = 0.0;
            for pt in &points {
                match (pt.protocols[i].supported, open) {
                    (true, None) => open = Some(pt.edge_mm),
                    (false, Some(lo)) => {
                        runs.push((lo, last));
                        open = None;
                    }
                    _ => {}
                }
                last = pt.edge_mm;
            }
            if let Some(lo) = open {
                runs.push((lo, last));
            }
            (p.name, runs)
        })
        .collect();
    Ok(Exploration { points, supported })
}

/// Evenly spaced grid `[lo, hi]` with `n` points.
pub fn edge_grid(lo_mm: f64, hi_mm: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo_mm],
        _ => (0..n)
            .map(|k| lo_mm + (hi_mm - lo_mm) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Minimum total clamp area (μm²) per pad for a generation at a CDM target.
/// Micro-bump generations use the published channel row when one exists;
/// anything else goes through the compact models.
pub fn esd_area_per_pad(
    tech: &TechGeneration,
    target_v: f64,
    params: &ExtractionParams,
    opts: &SizingOptions,
) -> Result<f64, ExploreError> {
    let bench = match tech.kind {
        InterfaceKind::MicroBump => esd::published_bench(tech.index, target_v),
        InterfaceKind::HybridBond => None,
    };
    let bench = match bench {
        Some(b) => b,
        None => CdmBench::new(target_v, extract_channel(tech, params, None)?),
    };
    Ok(esd::min_diode_area(&bench, opts)?.area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aib_saturates_at_four_mm() {
        let aib = IoProtocolModel::aib();
        assert!((aib.saturation_edge().unwrap() - 4.0 * MM).abs() < 1e-12);
        assert_eq!(aib.channels(4.0 * MM), 24);
        assert_eq!(io_array_area(&aib, 6.0), io_array_area(&aib, 8.0));
        assert_eq!(supply_bandwidth(&aib, 6.0), supply_bandwidth(&aib, 8.0));
        assert!(supply_bandwidth(&aib, 3.0) < supply_bandwidth(&aib, 4.0));
    }

    #[test]
    fn zero_edge_is_empty() {
        for p in [IoProtocolModel::aib(), IoProtocolModel::dsl()] {
            assert_eq!(io_array_area(&p, 0.0), (0.0, 0));
            assert_eq!(supply_bandwidth(&p, 0.0), 0.0);
        }
    }

    #[test]
    fn dsl_bandwidth_is_linear() {
        let dsl = IoProtocolModel::dsl();
        for e in [0.3, 1.0, 2.7, 5.0] {
            let (a, b) = (supply_bandwidth(&dsl, e), supply_bandwidth(&dsl, 2.0 * e));
            let one_channel = dsl.data_wires * dsl.rate_gbps;
            assert!((b - 2.0 * a).abs() <= 2.0 * one_channel, "{e}: {a} {b}");
        }
    }

    #[test]
    fn demand_arithmetic() {
        let cm = ComputeModel {
            node: "hand".into(),
            mac_density: 1000.0,
            frequency_hz: 2e9,
            bytes_per_mac: 0.01,
        };
        // 1000 MAC/mm² · (9 − 1) mm² · 2e9 Hz · 0.01 B · 8 b/B = 1.28e12 b/s
        assert!((compute_demand(&cm, 3.0, 1.0).unwrap() - 1280.0).abs() < 1e-9);
        let d1 = compute_demand(&cm, 2.0, 0.0).unwrap();
        let d2 = compute_demand(&cm, 4.0, 0.0).unwrap();
        assert!((d2 / d1 - 4.0).abs() < 1e-12);
        let idle = ComputeModel {
            mac_density: 0.0,
            ..cm.clone()
        };
        assert_eq!(compute_demand(&idle, 3.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            compute_demand(&cm, 1.0, 1.0),
            Err(ExploreError::IoExceedsDie { .. })
        ));
    }

    #[test]
    fn intervals_from_flags() {
        let protos = [IoProtocolModel::aib(), IoProtocolModel::dsl()];
        let idle = ComputeModel {
            mac_density: 0.0,
            ..ComputeModel::legacy()
        };
        let ex = supported_range(&protos, &idle, &edge_grid(0.5, 12.0, 47)).unwrap();
        for (_, runs) in &ex.supported {
            assert_eq!(runs, &vec![(0.5, 12.0)]);
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = edge_grid(0.5, 2.0, 4);
        assert_eq!(g, vec![0.5, 1.0, 1.5, 2.0]);
        assert!(edge_grid(1.0, 2.0, 0).is_empty());
    }
}
