//! Charged-device-model ESD bench and protection-diode sizing.
//!
//! The bench is a precharged package capacitance discharging through the
//! channel into a receiver gate:
//!
//! ```text
//! cap ──R_pkg── mid ──L_pkg── pad ──R_pad── clamp ──R_gate── gate
//!  │                           │              │                │
//! C_pkg (±V_esd)             C_pad      D↑ D↓ (A/2 each)     C_gate
//!  │                           │              │                │
//! ─┴───────────────────────────┴──────────────┴────────────────┴─ 0
//! ```
//!
//! Sizing bisects the total clamp area: a larger clamp never raises the
//! gate peak, so the smallest area keeping the gate below the oxide
//! breakdown voltage is well defined.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::extraction::{deviation_pct, published_micro_bump, ChannelParasitics};
use crate::mna::{transient, Circuit, DiodeModel, NodeId, SolverError, TransientConfig, Waveform};

/// Specific series resistance (Ω·μm²) that puts the micro-bump Gen 0, 125 V
/// clamp at 51.8 μm² on the default bench. Output of [`calibrate_rs`].
pub const CALIBRATED_RS: f64 = 52.3743;

/// Gate-oxide breakdown at the 28 nm node.
pub const DEFAULT_V_BD: f64 = 3.8;
pub const DEFAULT_R_GATE: f64 = 50.0;
pub const DEFAULT_C_GATE: f64 = 15e-15;

/// JEDEC-style CDM targets.
pub const JEDEC_LEGACY_V: f64 = 250.0;
pub const JEDEC_SCALED_V: f64 = 125.0;
pub const JEDEC_HYBRID_V: f64 = 5.0;

/// Row voltages of the published sizing table.
pub const TABLE_TARGETS: [f64; 4] = [10.0, 30.0, 50.0, 125.0];

/// Published total diode areas (μm²), rows = [`TABLE_TARGETS`], columns =
/// micro-bump generations 0..=5.
pub const PUBLISHED_AREAS: [[f64; 6]; 4] = [
    [6.46, 6.11, 6.38, 6.15, 6.15, 6.02],
    [20.4, 18.2, 20.1, 18.7, 18.7, 17.9],
    [34.3, 30.5, 34.2, 31.2, 31.2, 29.8],
    [51.8, 46.6, 51.6, 47.9, 47.9, 45.4],
];

/// Run length floor and ceiling in LC periods.
const MIN_PERIODS: f64 = 5.0;
const MAX_PERIODS: f64 = 80.0;
const STEPS_PER_PERIOD: f64 = 200.0;
/// Run is long enough once stored energy moves less than this fraction of
/// the initial energy over the final period.
const SETTLE_FRACTION: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum EsdError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid bench: {0}")]
    Invalid(String),
    #[error(
        "gate peak {peak:.3} V at the upper area bound {area_hi} µm² still exceeds {v_bd} V; \
         raise the bound or lower V_esd ({v_esd} V)"
    )]
    Infeasible {
        v_esd: f64,
        area_hi: f64,
        peak: f64,
        v_bd: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Positive,
    Negative,
    Both,
}

impl Polarity {
    pub fn signs(self) -> &'static [f64] {
        match self {
            Polarity::Positive => &[1.0],
            Polarity::Negative => &[-1.0],
            Polarity::Both => &[1.0, -1.0],
        }
    }
}

impl std::str::FromStr for Polarity {
    type Err = EsdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" | "positive" | "pos" => Ok(Polarity::Positive),
            "-" | "negative" | "neg" => Ok(Polarity::Negative),
            "both" | "+-" | "±" => Ok(Polarity::Both),
            _ => Err(EsdError::Invalid(format!("unknown polarity `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdmBench {
    pub v_esd: f64,
    pub parasitics: ChannelParasitics,
    /// Total clamp area in μm², split equally over the two diodes.
    pub diode_area: f64,
    pub model: DiodeModel,
    pub c_gate: f64,
    pub r_gate: f64,
    pub v_bd: f64,
    pub polarity: Polarity,
}

impl CdmBench {
    /// Unprotected bench with the calibrated clamp model.
    pub fn new(v_esd: f64, parasitics: ChannelParasitics) -> Self {
        Self {
            v_esd,
            parasitics,
            diode_area: 0.0,
            model: calibrated_model(),
            c_gate: DEFAULT_C_GATE,
            r_gate: DEFAULT_R_GATE,
            v_bd: DEFAULT_V_BD,
            polarity: Polarity::Both,
        }
    }

    pub fn with_area(mut self, area: f64) -> Self {
        self.diode_area = area;
        self
    }

    pub fn validate(&self) -> Result<(), EsdError> {
        let bad = |m: &str| Err(EsdError::Invalid(m.to_string()));
        if !(self.v_esd >= 0.0 && self.v_esd.is_finite()) {
            return bad("V_esd must be non-negative");
        }
        if !(self.diode_area >= 0.0 && self.diode_area.is_finite()) {
            return bad("diode area must be non-negative");
        }
        if !(self.c_gate > 0.0) || !(self.r_gate > 0.0) || !(self.v_bd > 0.0) {
            return bad("C_gate, R_gate and V_bd must be positive");
        }
        if !self.parasitics.is_valid() {
            return bad("parasitics must be non-negative");
        }
        if !(self.parasitics.c_pkg > 0.0) {
            return bad("C_pkg must be positive");
        }
        if !self.model.is_valid() {
            return bad("diode model parameters must be positive");
        }
        Ok(())
    }

    /// LC ringing period of the package, or the gate RC when L_pkg is zero.
    pub fn period(&self) -> f64 {
        let p = &self.parasitics;
        let lc = 2.0 * std::f64::consts::PI * (p.l_pkg * p.c_pkg).sqrt();
        if lc > 0.0 {
            lc
        } else {
            let rc = (p.r_pkg + p.r_pad + self.r_gate) * self.c_gate.min(p.c_pkg);
            2.0 * std::f64::consts::PI * rc
        }
    }

    /// Fixed step: period/200, well inside the period/50 ringing bound.
    pub fn timestep(&self) -> f64 {
        self.period() / STEPS_PER_PERIOD
    }
}

pub fn calibrated_model() -> DiodeModel {
    DiodeModel {
        rs: CALIBRATED_RS,
        ..DiodeModel::default()
    }
}

/// Bench circuit for one polarity (`sign` = ±1).
pub fn build_cdm_circuit(b: &CdmBench, sign: f64) -> Circuit {
    let p = &b.parasitics;
    let mut c = Circuit::new();
    let g = NodeId::GROUND;
    let cap = c.node("cap");
    // R or L of exactly zero collapses onto the previous node.
    let mid = if p.r_pkg > 0.0 {
        let n = c.node("mid");
        c.resistor("Rpkg", cap, n, p.r_pkg);
        n
    } else {
        cap
    };
    let pad = if p.l_pkg > 0.0 {
        let n = c.node("pad");
        c.inductor("Lpkg", mid, n, p.l_pkg, Some(0.0));
        n
    } else {
        mid
    };
    let clamp = if p.r_pad > 0.0 {
        let n = c.node("clamp");
        c.resistor("Rpad", pad, n, p.r_pad);
        n
    } else {
        pad
    };
    let gate = c.node("gate");
    c.capacitor("Cpkg", cap, g, p.c_pkg, Some(sign * b.v_esd));
    if p.c_pad > 0.0 {
        c.capacitor("Cpad", pad, g, p.c_pad, Some(0.0));
    }
    if b.diode_area > 0.0 {
        c.add_model("dclamp", b.model);
        c.diode("Dup", clamp, g, "dclamp", b.diode_area / 2.0);
        c.diode("Ddn", g, clamp, "dclamp", b.diode_area / 2.0);
    }
    c.resistor("Rgate", clamp, gate, b.r_gate);
    c.capacitor("Cgate", gate, g, b.c_gate, Some(0.0));
    c
}

/// One circuit per polarity the bench asks for.
pub fn build_cdm_circuits(b: &CdmBench) -> Vec<(f64, Circuit)> {
    b.polarity
        .signs()
        .iter()
        .map(|&s| (s, build_cdm_circuit(b, s)))
        .collect()
}

/// Full recorded transient for one polarity. Runs at least five LC periods,
/// doubling until stored energy has settled.
pub fn simulate_polarity(b: &CdmBench, sign: f64) -> Result<Waveform, EsdError> {
    b.validate()?;
    let c = build_cdm_circuit(b, sign);
    let period = b.period();
    let dt = b.timestep();
    let mut periods = MIN_PERIODS;
    loop {
        let w = transient(&c, &TransientConfig::new(periods * period, dt))?;
        if periods >= MAX_PERIODS || settled(&w, &c, period)? {
            return Ok(w);
        }
        periods = (2.0 * periods).min(MAX_PERIODS);
    }
}

fn settled(w: &Waveform, c: &Circuit, period: f64) -> Result<bool, EsdError> {
    let e0 = w.stored_energy(c, 0).map_err(SolverError::from)?;
    if e0 == 0.0 {
        return Ok(true);
    }
    let last = w.len() - 1;
    let back = last.saturating_sub((period / w.dt).round() as usize);
    let e_end = w.stored_energy(c, last).map_err(SolverError::from)?;
    let e_back = w.stored_energy(c, back).map_err(SolverError::from)?;
    Ok((e_back - e_end).abs() < SETTLE_FRACTION * e0)
}

/// Worst-polarity peak |v(gate)|.
pub fn peak_gate_voltage(b: &CdmBench) -> Result<f64, EsdError> {
    b.validate()?;
    if b.v_esd == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for &s in b.polarity.signs() {
        let w = simulate_polarity(b, s)?;
        let peak = crate::mna::peak_abs(&w, "gate").map_err(SolverError::from)?;
        worst = worst.max(peak);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizingOptions {
    pub area_lo: f64,
    pub area_hi: f64,
    pub tol: f64,
}

impl Default for SizingOptions {
    fn default() -> Self {
        Self {
            area_lo: 0.0,
            area_hi: 1e4,
            tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiodeSizingResult {
    /// Smallest feasible total area, μm².
    pub area: f64,
    /// Every simulated `(area, peak)` pair in evaluation order.
    pub trace: Vec<(f64, f64)>,
    pub peak: f64,
    pub no_protection_required: bool,
}

/// Bisects the smallest total clamp area keeping the gate below `V_bd`.
pub fn min_diode_area(b: &CdmBench, opts: &SizingOptions) -> Result<DiodeSizingResult, EsdError> {
    b.validate()?;
    if !(opts.tol > 0.0) || !(opts.area_hi > opts.area_lo) || opts.area_lo < 0.0 {
        return Err(EsdError::Invalid("need 0 ≤ area_lo < area_hi and tol > 0".into()));
    }
    let mut trace = Vec::new();
    let mut eval = |area: f64| -> Result<f64, EsdError> {
        let peak = peak_gate_voltage(&b.with_area(area))?;
        trace.push((area, peak));
        Ok(peak)
    };

    let peak_lo = eval(opts.area_lo)?;
    if peak_lo < b.v_bd {
        return Ok(DiodeSizingResult {
            area: opts.area_lo,
            peak: peak_lo,
            no_protection_required: opts.area_lo == 0.0,
            trace,
        });
    }
    let mut peak_hi = eval(opts.area_hi)?;
    if peak_hi >= b.v_bd {
        return Err(EsdError::Infeasible {
            v_esd: b.v_esd,
            area_hi: opts.area_hi,
            peak: peak_hi,
            v_bd: b.v_bd,
        });
    }
    let (mut lo, mut hi) = (opts.area_lo, opts.area_hi);
    while hi - lo > opts.tol {
        // Geometric midpoint while the bracket spans decades, then linear.
        let mid = if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else if lo == 0.0 && hi > 1e3 * opts.tol {
            hi / 32.0
        } else {
            0.5 * (lo + hi)
        };
        let peak = eval(mid)?;
        if peak < b.v_bd {
            hi = mid;
            peak_hi = peak;
        } else {
            lo = mid;
        }
    }
    Ok(DiodeSizingResult {
        area: hi,
        peak: peak_hi,
        no_protection_required: false,
        trace,
    })
}

/// Solves the clamp series resistance so that `bench` sizes to
/// `target_area`. Returns the calibrated model.
pub fn calibrate_rs(
    bench: &CdmBench,
    target_area: f64,
    opts: &SizingOptions,
    rs_bounds: (f64, f64),
) -> Result<DiodeModel, EsdError> {
    let area_for = |rs: f64| -> Result<f64, EsdError> {
        let mut b = *bench;
        b.model.rs = rs;
        Ok(min_diode_area(&b, opts)?.area)
    };
    let (mut lo, mut hi) = rs_bounds;
    if area_for(lo)? > target_area || area_for(hi)? < target_area {
        return Err(EsdError::Invalid(format!(
            "target area {target_area} µm² is not bracketed by r_s ∈ [{lo}, {hi}]"
        )));
    }
    // Area is non-decreasing in r_s.
    while (hi - lo) > 1e-3 * lo {
        let mid = 0.5 * (lo + hi);
        if area_for(mid)? < target_area {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DiodeModel {
        rs: 0.5 * (lo + hi),
        ..bench.model
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingCell {
    pub generation: usize,
    pub target_v: f64,
    pub area: f64,
    pub peak: f64,
    pub published: Option<f64>,
    pub deviation_pct: Option<f64>,
    /// Sign of the change from the previous generation at the same target:
    /// `Some(-1)` smaller, `Some(1)` larger, `Some(0)` equal.
    pub direction: Option<i8>,
}

/// Bench for a published micro-bump row.
pub fn published_bench(generation: usize, v_esd: f64) -> Option<CdmBench> {
    published_micro_bump(generation).map(|p| CdmBench::new(v_esd, p))
}

/// Recomputes the sizing grid over `generations × targets`; rows are
/// ordered target-major, generation-minor regardless of scheduling.
pub fn sizing_table(
    benches: &[(usize, CdmBench)],
    targets: &[f64],
    opts: &SizingOptions,
) -> Result<Vec<SizingCell>, EsdError> {
    let jobs: Vec<(usize, f64, CdmBench)> = targets
        .iter()
        .flat_map(|&t| {
            benches.iter().map(move |(g, b)| {
                let mut b = *b;
                b.v_esd = t;
                (*g, t, b)
            })
        })
        .collect();
    let results: Vec<Result<DiodeSizingResult, EsdError>> = jobs
        .par_iter()
        .map(|(_, _, b)| min_diode_area(b, opts))
        .collect();
    let mut cells = Vec::with_capacity(jobs.len());
    for ((g, t, _), r) in jobs.iter().zip(results) {
        let r = r?;
        let published = TABLE_TARGETS
            .iter()
            .position(|x| x == t)
            .and_then(|row| PUBLISHED_AREAS[row].get(*g).copied());
        let direction = cells
            .last()
            .filter(|c: &&SizingCell| c.target_v == *t && c.generation + 1 == *g)
            .map(|c| (r.area - c.area).partial_cmp(&0.0).map_or(0, |o| o as i8));
        cells.push(SizingCell {
            generation: *g,
            target_v: *t,
            area: r.area,
            peak: r.peak,
            published,
            deviation_pct: published.map(|p| deviation_pct(r.area, p)),
            direction,
        });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{extract_channel, ExtractionParams};
    use crate::mna::ElementKind;
    use crate::techlib::{builtin_generation, InterfaceKind};

    fn gen0(v: f64) -> CdmBench {
        published_bench(0, v).unwrap()
    }

    fn hybrid4(v: f64) -> CdmBench {
        let g = builtin_generation(InterfaceKind::HybridBond, 4).unwrap();
        let p = extract_channel(&g, &ExtractionParams::default(), None).unwrap();
        CdmBench::new(v, p)
    }

    #[test]
    fn unprotected_circuit_has_no_diodes() {
        let c = build_cdm_circuit(&gen0(125.0), 1.0);
        assert!(!c.has_diodes());
        assert!(build_cdm_circuit(&gen0(125.0).with_area(10.0), 1.0).has_diodes());
    }

    #[test]
    fn gen0_elements_are_table_row() {
        let c = build_cdm_circuit(&gen0(125.0), 1.0);
        let value = |n: &str| match c.element(n).unwrap().kind {
            ElementKind::Resistor { ohms } => ohms,
            ElementKind::Capacitor { farads, .. } => farads,
            ElementKind::Inductor { henries, .. } => henries,
            _ => unreachable!(),
        };
        assert!((value("Cpkg") - 1141.04e-15).abs() < 1e-27);
        assert!((value("Rpkg") - 7.04).abs() < 1e-12);
        assert!((value("Lpkg") - 5.978e-9).abs() < 1e-21);
        assert!((value("Cpad") - 5.911e-15).abs() < 1e-27);
        assert!((value("Rpad") - 4.574e-3).abs() < 1e-15);
    }

    #[test]
    fn polarities_differ_only_in_precharge_sign() {
        let circuits = build_cdm_circuits(&gen0(125.0).with_area(20.0));
        assert_eq!(circuits.len(), 2);
        let (a, b) = (&circuits[0].1, &circuits[1].1);
        for (x, y) in a.elements.iter().zip(&b.elements) {
            match (&x.kind, &y.kind) {
                (
                    ElementKind::Capacitor { initial: Some(u), farads: f1 },
                    ElementKind::Capacitor { initial: Some(v), farads: f2 },
                ) => {
                    assert_eq!(u, &-v);
                    assert_eq!(f1, f2);
                }
                _ => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn zero_target_gives_zero_peak() {
        assert_eq!(peak_gate_voltage(&gen0(0.0).with_area(5.0)).unwrap(), 0.0);
    }

    #[test]
    fn unprotected_peak_is_linear_in_target() {
        let p1 = peak_gate_voltage(&gen0(1.0)).unwrap();
        for v in [3.0, 10.0] {
            let p = peak_gate_voltage(&gen0(v)).unwrap();
            assert!((p / p1 - v).abs() < 1e-9 * v, "{p} {p1}");
        }
    }

    #[test]
    fn polarity_symmetry() {
        let b = gen0(50.0).with_area(30.0);
        let pos = peak_gate_voltage(&CdmBench { polarity: Polarity::Positive, ..b }).unwrap();
        let neg = peak_gate_voltage(&CdmBench { polarity: Polarity::Negative, ..b }).unwrap();
        assert!((pos - neg).abs() < 1e-6 * pos, "{pos} {neg}");
    }

    #[test]
    fn hybrid_gen4_needs_no_clamp_at_10v() {
        let r = min_diode_area(&hybrid4(10.0), &SizingOptions::default()).unwrap();
        assert!(r.no_protection_required);
        assert_eq!(r.area, 0.0);
        assert!(r.peak < DEFAULT_V_BD, "{}", r.peak);
    }

    #[test]
    fn infeasible_upper_bound_is_an_error() {
        let opts = SizingOptions {
            area_hi: 0.5,
            ..SizingOptions::default()
        };
        let err = min_diode_area(&gen0(125.0), &opts).unwrap_err();
        assert!(matches!(err, EsdError::Infeasible { .. }), "{err}");
    }

    #[test]
    fn bisection_result_is_tight() {
        let opts = SizingOptions::default();
        let b = gen0(30.0);
        let r = min_diode_area(&b, &opts).unwrap();
        assert!(r.peak < b.v_bd);
        let below = peak_gate_voltage(&b.with_area(r.area - 2.0 * opts.tol)).unwrap();
        assert!(below >= b.v_bd, "{below}");
    }
}
