//! Layered run configuration.
//!
//! Sources merge as `defaults ← preset ← user file ← --set overrides`; each
//! source is checked against the schema on its own so errors point at the
//! offending file and line. Physical quantities carry their unit in the key.

use chiplet_dse::dsl::{AggressorMode, DslConfig};
use chiplet_dse::esd::{self, CdmBench, Polarity, SizingOptions};
use chiplet_dse::explorer::{ComputeModel, IoProtocolModel, Protocol};
use chiplet_dse::extraction::{ChannelParasitics, ExtractionParams};
use chiplet_dse::mna::DiodeModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Presets shipped with the binary.
pub const PRESETS: &[(&str, &str)] = &[
    ("legacy", include_str!("../presets/legacy.toml")),
    ("advanced", include_str!("../presets/advanced.toml")),
    ("jedec-legacy", include_str!("../presets/jedec-legacy.toml")),
    ("jedec-scaled", include_str!("../presets/jedec-scaled.toml")),
    ("jedec-hybrid", include_str!("../presets/jedec-hybrid.toml")),
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub extraction: ExtractionSection,
    pub esd: EsdSection,
    pub dsl: DslSection,
    pub explore: ExploreSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionSection {
    pub rho_wire_ohm_m: f64,
    pub rho_bump_ohm_m: f64,
    pub eps_eff: f64,
    pub k_d: f64,
    pub k_h: f64,
    pub k_h_hybrid: f64,
    pub kappa_pad_f_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsdSection {
    pub target_v: f64,
    pub targets_v: Vec<f64>,
    pub v_bd_v: f64,
    pub r_gate_ohm: f64,
    pub c_gate_ff: f64,
    pub diode_js_a_per_um2: f64,
    pub diode_n: f64,
    pub diode_vt_v: f64,
    pub diode_rs_ohm_um2: f64,
    pub area_hi_um2: f64,
    pub tol_um2: f64,
    pub polarity: String,
    /// Area the reference cell is calibrated to with `--calibrate`.
    pub calibration_area_um2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DslSection {
    pub channels: usize,
    /// 0 picks the length-based default.
    pub n_seg: usize,
    pub bit_rate_gbps: f64,
    pub vdd_v: f64,
    pub r_drv_ohm: f64,
    pub t_transition_ps: f64,
    pub c_rx_ff: f64,
    pub seed: u8,
    pub aggressor_seeds: Vec<u8>,
    pub aggressor_mode: String,
    pub bits: usize,
    pub warmup_bits: usize,
    pub steps_per_ui: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreSection {
    pub node: String,
    pub edge_min_mm: f64,
    pub edge_max_mm: f64,
    pub edge_points: usize,
    pub mac_density_per_mm2: f64,
    pub frequency_ghz: f64,
    pub bytes_per_mac: f64,
    pub aib: ProtocolSection,
    pub dsl: ProtocolSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub bumps_per_channel: f64,
    pub data_wires: f64,
    pub rate_gbps: f64,
    /// 0 = unlimited.
    pub max_channels: usize,
    pub pitch_um: f64,
    pub footprint_um: f64,
    pub edges: usize,
}

impl Default for ExtractionSection {
    fn default() -> Self {
        let p = ExtractionParams::default();
        Self {
            rho_wire_ohm_m: p.rho_wire,
            rho_bump_ohm_m: p.rho_bump,
            eps_eff: p.eps_eff,
            k_d: p.k_d,
            k_h: p.k_h,
            k_h_hybrid: p.k_h_hybrid,
            kappa_pad_f_per_m: p.kappa_pad,
        }
    }
}

impl Default for EsdSection {
    fn default() -> Self {
        let m = esd::calibrated_model();
        let o = SizingOptions::default();
        Self {
            target_v: esd::JEDEC_SCALED_V,
            targets_v: esd::TABLE_TARGETS.to_vec(),
            v_bd_v: esd::DEFAULT_V_BD,
            r_gate_ohm: esd::DEFAULT_R_GATE,
            c_gate_ff: esd::DEFAULT_C_GATE * 1e15,
            diode_js_a_per_um2: m.js,
            diode_n: m.n,
            diode_vt_v: m.vt,
            diode_rs_ohm_um2: m.rs,
            area_hi_um2: o.area_hi,
            tol_um2: o.tol,
            polarity: "both".into(),
            calibration_area_um2: esd::PUBLISHED_AREAS[3][0],
        }
    }
}

impl Default for DslSection {
    fn default() -> Self {
        let d = DslConfig::default();
        Self {
            channels: d.channels,
            n_seg: 0,
            bit_rate_gbps: d.bit_rate / 1e9,
            vdd_v: d.vdd,
            r_drv_ohm: d.r_drv,
            t_transition_ps: d.t_transition * 1e12,
            c_rx_ff: d.c_rx * 1e15,
            seed: d.seed,
            aggressor_seeds: d.aggressor_seeds,
            aggressor_mode: "opposite".into(),
            bits: d.bits,
            warmup_bits: d.warmup_bits,
            steps_per_ui: d.steps_per_ui,
        }
    }
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self::from_model(&IoProtocolModel::aib())
    }
}

impl ProtocolSection {
    fn from_model(m: &IoProtocolModel) -> Self {
        Self {
            bumps_per_channel: m.bumps_per_channel,
            data_wires: m.data_wires,
            rate_gbps: m.rate_gbps,
            max_channels: m.max_channels.unwrap_or(0),
            pitch_um: m.pitch * 1e6,
            footprint_um: m.channel_footprint * 1e6,
            edges: m.edges,
        }
    }

    pub fn to_model(&self, name: Protocol) -> IoProtocolModel {
        IoProtocolModel {
            name,
            bumps_per_channel: self.bumps_per_channel,
            data_wires: self.data_wires,
            rate_gbps: self.rate_gbps,
            max_channels: (self.max_channels > 0).then_some(self.max_channels),
            pitch: self.pitch_um * 1e-6,
            channel_footprint: self.footprint_um * 1e-6,
            edges: self.edges,
        }
    }
}

impl Default for ExploreSection {
    fn default() -> Self {
        let cm = ComputeModel::legacy();
        Self {
            node: cm.node,
            edge_min_mm: 0.5,
            edge_max_mm: 12.0,
            edge_points: 47,
            mac_density_per_mm2: cm.mac_density,
            frequency_ghz: cm.frequency_hz / 1e9,
            bytes_per_mac: cm.bytes_per_mac,
            aib: ProtocolSection::from_model(&IoProtocolModel::aib()),
            dsl: ProtocolSection::from_model(&IoProtocolModel::dsl()),
        }
    }
}

/// Parses one source, checking it against the schema.
pub fn load_fragment(origin: &str, text: &str) -> Result<toml::Table, CliError> {
    let bad = |e: toml::de::Error| CliError::Config(format!("{origin}: {e}"));
    toml::from_str::<Config>(text).map_err(bad)?;
    toml::from_str::<toml::Table>(text).map_err(bad)
}

pub fn load_file(path: &std::path::Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
    load_fragment(&path.display().to_string(), &text)
}

pub fn preset(name: &str) -> Result<toml::Table, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
        CliError::Usage(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })?;
    load_fragment(&format!("preset {name}"), text)
}

/// Turns `section.key=value` into a fragment. Bare words are taken as strings.
pub fn override_fragment(assign: &str) -> Result<toml::Table, CliError> {
    let (path, value) = assign
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{assign}` is not key=value")))?;
    let (path, value) = (path.trim(), value.trim());
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Usage(format!("bad override key `{path}`")));
    }
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut table = toml::Table::new();
    table.insert(keys[keys.len() - 1].to_string(), parsed);
    for k in keys[..keys.len() - 1].iter().rev() {
        let mut outer = toml::Table::new();
        outer.insert(k.to_string(), toml::Value::Table(table));
        table = outer;
    }
    let text = toml::to_string(&table).map_err(|e| CliError::Usage(e.to_string()))?;
    load_fragment(&format!("--set {assign}"), &text)
}

/// Deep merge; scalar and array values in `top` replace those in `base`.
pub fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn resolve(layers: Vec<toml::Table>) -> Result<Config, CliError> {
    // start from the full defaults so partial nested tables keep their own defaults
    let mut merged: toml::Table = toml::from_str(&Config::default().to_toml()).expect("defaults parse");
    for l in layers {
        merge(&mut merged, l);
    }
    let cfg: Config = toml::Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl Config {
    pub fn validate(&self) -> Result<(), CliError> {
        let mut bad = Vec::new();
        let mut positive = |key: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{key} must be positive (got {v})"));
            }
        };
        let x = &self.extraction;
        positive("extraction.rho_wire_ohm_m", x.rho_wire_ohm_m);
        positive("extraction.rho_bump_ohm_m", x.rho_bump_ohm_m);
        positive("extraction.eps_eff", x.eps_eff);
        positive("extraction.kappa_pad_f_per_m", x.kappa_pad_f_per_m);
        let e = &self.esd;
        positive("esd.target_v", e.target_v);
        positive("esd.v_bd_v", e.v_bd_v);
        positive("esd.r_gate_ohm", e.r_gate_ohm);
        positive("esd.c_gate_ff", e.c_gate_ff);
        positive("esd.diode_js_a_per_um2", e.diode_js_a_per_um2);
        positive("esd.diode_rs_ohm_um2", e.diode_rs_ohm_um2);
        positive("esd.area_hi_um2", e.area_hi_um2);
        positive("esd.tol_um2", e.tol_um2);
        positive("esd.calibration_area_um2", e.calibration_area_um2);
        for t in &e.targets_v {
            positive("esd.targets_v[]", *t);
        }
        let d = &self.dsl;
        positive("dsl.bit_rate_gbps", d.bit_rate_gbps);
        positive("dsl.vdd_v", d.vdd_v);
        positive("dsl.r_drv_ohm", d.r_drv_ohm);
        positive("dsl.t_transition_ps", d.t_transition_ps);
        let p = &self.explore;
        positive("explore.edge_min_mm", p.edge_min_mm);
        positive("explore.frequency_ghz", p.frequency_ghz);
        for (name, s) in [("aib", &p.aib), ("dsl", &p.dsl)] {
            positive(&format!("explore.{name}.pitch_um"), s.pitch_um);
            positive(&format!("explore.{name}.footprint_um"), s.footprint_um);
        }
        if p.edge_max_mm < p.edge_min_mm || p.edge_points == 0 {
            bad.push("explore edge grid needs edge_min_mm ≤ edge_max_mm and edge_points ≥ 1".into());
        }
        if self.dsl.c_rx_ff < 0.0 {
            bad.push("dsl.c_rx_ff must be non-negative".into());
        }
        if let Err(err) = self.esd.polarity.parse::<Polarity>() {
            bad.push(err.to_string());
        }
        if let Err(err) = self.aggressor_mode() {
            bad.push(err.to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(bad.join("; ")))
        }
    }

    pub fn extraction_params(&self) -> ExtractionParams {
        let x = &self.extraction;
        ExtractionParams {
            rho_wire: x.rho_wire_ohm_m,
            rho_bump: x.rho_bump_ohm_m,
            eps_eff: x.eps_eff,
            k_d: x.k_d,
            k_h: x.k_h,
            k_h_hybrid: x.k_h_hybrid,
            kappa_pad: x.kappa_pad_f_per_m,
        }
    }

    pub fn diode_model(&self) -> DiodeModel {
        DiodeModel {
            js: self.esd.diode_js_a_per_um2,
            n: self.esd.diode_n,
            vt: self.esd.diode_vt_v,
            rs: self.esd.diode_rs_ohm_um2,
        }
    }

    pub fn sizing_options(&self) -> SizingOptions {
        SizingOptions {
            area_lo: 0.0,
            area_hi: self.esd.area_hi_um2,
            tol: self.esd.tol_um2,
        }
    }

    pub fn cdm_bench(&self, v_esd: f64, parasitics: ChannelParasitics) -> CdmBench {
        let e = &self.esd;
        CdmBench {
            model: self.diode_model(),
            c_gate: e.c_gate_ff * 1e-15,
            r_gate: e.r_gate_ohm,
            v_bd: e.v_bd_v,
            polarity: e.polarity.parse().unwrap_or(Polarity::Both),
            ..CdmBench::new(v_esd, parasitics)
        }
    }

    fn aggressor_mode(&self) -> Result<AggressorMode, CliError> {
        match self.dsl.aggressor_mode.as_str() {
            "opposite" => Ok(AggressorMode::Opposite),
            "random" => Ok(AggressorMode::Random),
            m => Err(CliError::Config(format!(
                "dsl.aggressor_mode `{m}` is not `opposite` or `random`"
            ))),
        }
    }

    pub fn dsl_config(&self) -> DslConfig {
        let d = &self.dsl;
        DslConfig {
            channels: d.channels,
            n_seg: (d.n_seg > 0).then_some(d.n_seg),
            bit_rate: d.bit_rate_gbps * 1e9,
            vdd: d.vdd_v,
            r_drv: d.r_drv_ohm,
            t_transition: d.t_transition_ps * 1e-12,
            c_rx: d.c_rx_ff * 1e-15,
            seed: d.seed,
            aggressor_seeds: d.aggressor_seeds.clone(),
            aggressor_mode: self.aggressor_mode().unwrap_or(AggressorMode::Opposite),
            bits: d.bits,
            warmup_bits: d.warmup_bits,
            steps_per_ui: d.steps_per_ui,
        }
    }

    pub fn compute_model(&self) -> ComputeModel {
        let p = &self.explore;
        ComputeModel {
            node: p.node.clone(),
            mac_density: p.mac_density_per_mm2,
            frequency_hz: p.frequency_ghz * 1e9,
            bytes_per_mac: p.bytes_per_mac,
        }
    }

    pub fn protocols(&self) -> [IoProtocolModel; 2] {
        [
            self.explore.aib.to_model(Protocol::Aib),
            self.explore.dsl.to_model(Protocol::Dsl),
        ]
    }

    /// Fully resolved configuration as loadable TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Everything needed to reproduce a run: the command line and the resolved
/// configuration. The body is itself a valid config file.
pub fn manifest(argv: &[String], layers: &[String], cfg: &Config) -> String {
    let mut out = format!(
        "# chiplet-dse {} run manifest\n# command: {}\n",
        env!("CARGO_PKG_VERSION"),
        argv.join(" ")
    );
    for src in layers {
        out.push_str(&format!("# layer: {src}\n"));
    }
    out.push('\n');
    out.push_str(&cfg.to_toml());
    out
}
