//! Direct-signaling-link crosstalk bench and eye metrics.
//!
//! Each channel is a behavioural driver (PWL source behind `R_drv`), a pad,
//! an `N_seg`-cell lumped ladder, a far pad and the receiver gate. Adjacent
//! ladders couple through capacitors at the segment midpoints. The victim
//! is the centre channel; every other channel is an aggressor.

use serde::{Deserialize, Serialize};

use crate::extraction::ChannelParasitics;
use crate::mna::{transient_probed, Circuit, NodeId, Pwl, SolverError, TransientConfig, Waveform};

/// Half-width of the eye-mask band around the threshold, as a fraction of VDD.
pub const MASK_BAND: f64 = 0.05;
/// Fewest folded traces `eye_metrics` accepts.
pub const MIN_TRACES: usize = 8;
/// Segment length targeted by the automatic ladder refinement.
pub const SEGMENT_LENGTH: f64 = 50e-6;

#[derive(Debug, thiserror::Error)]
pub enum DslError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid DSL configuration: {0}")]
    Config(String),
    #[error("PRBS seed must be a nonzero 7-bit value (got {0})")]
    ZeroSeed(u8),
    #[error("eye needs at least {needed} traces of each logic level (got {ones} ones, {zeros} zeros)")]
    TooFewTraces {
        needed: usize,
        ones: usize,
        zeros: usize,
    },
}

/// Maximal-length PRBS-7 (x⁷ + x⁶ + 1), `n_bits` long.
pub fn prbs7(seed: u8, n_bits: usize) -> Result<Vec<bool>, DslError> {
    let mut state = seed & 0x7f;
    if state == 0 {
        return Err(DslError::ZeroSeed(seed));
    }
    Ok((0..n_bits)
        .map(|_| {
            let bit = ((state >> 6) ^ (state >> 5)) & 1;
            state = ((state << 1) | bit) & 0x7f;
            bit == 1
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggressorMode {
    /// Aggressors carry the complement of the victim pattern.
    Opposite,
    /// Aggressors carry independently seeded PRBS.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DslConfig {
    pub channels: usize,
    /// `None` picks `max(10, ⌈L/50 µm⌉)`.
    pub n_seg: Option<usize>,
    pub bit_rate: f64,
    pub vdd: f64,
    pub r_drv: f64,
    pub t_transition: f64,
    pub c_rx: f64,
    pub seed: u8,
    pub aggressor_seeds: Vec<u8>,
    pub aggressor_mode: AggressorMode,
    pub bits: usize,
    pub warmup_bits: usize,
    /// Solver steps per unit interval.
    pub steps_per_ui: usize,
}

impl Default for DslConfig {
    fn default() -> Self {
        Self {
            channels: 3,
            n_seg: None,
            bit_rate: 1e9,
            vdd: 0.9,
            r_drv: 150.0,
            t_transition: 50e-12,
            c_rx: 5e-15,
            seed: 0x5b,
            aggressor_seeds: vec![0x2d, 0x71, 0x13, 0x4e],
            aggressor_mode: AggressorMode::Opposite,
            bits: 256,
            warmup_bits: 8,
            steps_per_ui: 200,
        }
    }
}

impl DslConfig {
    pub fn ui(&self) -> f64 {
        1.0 / self.bit_rate
    }

    pub fn validate(&self) -> Result<(), DslError> {
        let bad = |m: &str| Err(DslError::Config(m.to_string()));
        if self.channels == 0 || self.channels.is_multiple_of(2) {
            return bad("channel count must be odd and at least 1");
        }
        if self.n_seg == Some(0) {
            return bad("N_seg must be at least 1");
        }
        if !(self.bit_rate > 0.0 && self.vdd > 0.0 && self.r_drv > 0.0 && self.c_rx > 0.0) {
            return bad("bit rate, VDD, R_drv and C_rx must be positive");
        }
        if !(self.t_transition > 0.0 && self.t_transition < self.ui()) {
            return bad("transition time must lie in (0, UI)");
        }
        if self.steps_per_ui < 2 {
            return bad("need at least 2 steps per UI");
        }
        if self.bits < self.warmup_bits + 4 {
            return bad("too few bits after warm-up");
        }
        if self.aggressor_mode == AggressorMode::Random
            && self.aggressor_seeds.len() < self.channels - 1
        {
            return bad("need one aggressor seed per aggressor channel");
        }
        Ok(())
    }

    pub fn segments_for(&self, length: f64) -> usize {
        self.n_seg
            .unwrap_or_else(|| ((length / SEGMENT_LENGTH).ceil() as usize).max(10))
    }

    pub fn victim(&self) -> usize {
        self.channels / 2
    }

    /// Bit pattern per channel.
    pub fn patterns(&self) -> Result<Vec<Vec<bool>>, DslError> {
        let victim = prbs7(self.seed, self.bits)?;
        let mut seeds = self.aggressor_seeds.iter();
        (0..self.channels)
            .map(|ch| {
                if ch == self.victim() {
                    Ok(victim.clone())
                } else {
                    match self.aggressor_mode {
                        AggressorMode::Opposite => Ok(victim.iter().map(|b| !b).collect()),
                        AggressorMode::Random => {
                            prbs7(*seeds.next().expect("validated seed count"), self.bits)
                        }
                    }
                }
            })
            .collect()
    }
}

/// Trapezoidal-edge drive waveform for a bit pattern. Every bit boundary
/// carries a breakpoint pair whether or not the level changes, so the
/// solver's step schedule does not depend on the data.
pub fn drive_waveform(bits: &[bool], ui: f64, t_transition: f64, vdd: f64) -> Pwl {
    let level = |b: bool| if b { vdd } else { 0.0 };
    let mut pts = vec![(0.0, level(bits[0]))];
    for j in 1..bits.len() {
        let t = j as f64 * ui;
        pts.push((t, level(bits[j - 1])));
        pts.push((t + t_transition, level(bits[j])));
    }
    Pwl::new(pts).expect("edges are time ordered")
}

/// Probe points of a built bench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DslNodes {
    pub victim_rx: String,
    pub victim_tx: String,
    pub aggressor_rx: Vec<String>,
}

/// Builds the coupled-ladder bench. `length` sets the automatic segment
/// count; the parasitics already carry the length.
pub fn build_dsl_circuit(
    par: &ChannelParasitics,
    length: f64,
    cfg: &DslConfig,
) -> Result<(Circuit, DslNodes), DslError> {
    cfg.validate()?;
    if !par.is_valid() {
        return Err(DslError::Config("parasitics must be non-negative".into()));
    }
    let patterns = cfg.patterns()?;
    let n = cfg.segments_for(length);
    let nf = n as f64;
    let (r_seg, l_seg) = (par.r_pkg / nf, par.l_pkg / nf);
    let c_seg = (par.c_pkg - par.c_couple) / nf;
    let c_cpl = par.c_couple / nf;
    let g = NodeId::GROUND;
    let mut c = Circuit::new();
    let chans = 0..cfg.channels;

    // Elements are emitted segment-major across channels so MNA unknowns of
    // neighbouring channels stay close and the matrix stays banded.
    let mut tx = Vec::new();
    for ch in chans.clone() {
        let src = c.node(&format!("src{ch}"));
        let node = c.node(&format!("tx{ch}"));
        let wave = drive_waveform(&patterns[ch], cfg.ui(), cfg.t_transition, cfg.vdd);
        c.voltage_source(format!("Vdrv{ch}"), src, g, wave);
        c.resistor(format!("Rdrv{ch}"), src, node, cfg.r_drv);
        if par.c_pad > 0.0 {
            c.capacitor(format!("Cpadtx{ch}"), node, g, par.c_pad, None);
        }
        tx.push(node);
    }
    let mut head: Vec<NodeId> = tx.clone();
    for ch in chans.clone() {
        if par.r_pad > 0.0 {
            let next = c.node(&format!("l{ch}_0"));
            c.resistor(format!("Rpadtx{ch}"), head[ch], next, par.r_pad);
            head[ch] = next;
        }
    }
    for k in 0..n {
        let mut mids = Vec::with_capacity(cfg.channels);
        for ch in chans.clone() {
            let weight = if k == 0 { 0.5 } else { 1.0 };
            if c_seg > 0.0 {
                c.capacitor(format!("C{ch}_{k}"), head[ch], g, weight * c_seg, None);
            }
            let mid = if r_seg > 0.0 {
                let m = c.node(&format!("m{ch}_{k}"));
                c.resistor(format!("R{ch}_{k}"), head[ch], m, r_seg);
                m
            } else {
                head[ch]
            };
            mids.push(mid);
            head[ch] = if l_seg > 0.0 {
                let next = c.node(&format!("l{ch}_{}", k + 1));
                c.inductor(format!("L{ch}_{k}"), mid, next, l_seg, None);
                next
            } else {
                mid
            };
        }
        if c_cpl > 0.0 {
            for ch in 1..cfg.channels {
                c.capacitor(format!("Cc{ch}_{k}"), mids[ch - 1], mids[ch], c_cpl, None);
            }
        }
    }
    let mut rx = Vec::new();
    for ch in chans.clone() {
        if c_seg > 0.0 {
            c.capacitor(format!("C{ch}_{n}"), head[ch], g, 0.5 * c_seg, None);
        }
        let node = if par.r_pad > 0.0 {
            let r = c.node(&format!("rx{ch}"));
            c.resistor(format!("Rpadrx{ch}"), head[ch], r, par.r_pad);
            r
        } else {
            head[ch]
        };
        if par.c_pad > 0.0 {
            c.capacitor(format!("Cpadrx{ch}"), node, g, par.c_pad, None);
        }
        c.capacitor(format!("Crx{ch}"), node, g, cfg.c_rx, None);
        rx.push(node);
    }
    let v = cfg.victim();
    let nodes = DslNodes {
        victim_rx: c.node_name(rx[v]).to_string(),
        victim_tx: c.node_name(tx[v]).to_string(),
        aggressor_rx: chans
            .filter(|ch| *ch != v)
            .map(|ch| c.node_name(rx[ch]).to_string())
            .collect(),
    };
    Ok((c, nodes))
}

/// Runs the bench, recording the victim ends and the aggressor far ends.
pub fn simulate_bench(
    par: &ChannelParasitics,
    length: f64,
    cfg: &DslConfig,
) -> Result<(Waveform, DslNodes), DslError> {
    let (c, nodes) = build_dsl_circuit(par, length, cfg)?;
    let mut probes = vec![&nodes.victim_rx, &nodes.victim_tx];
    probes.extend(nodes.aggressor_rx.iter());
    let ids: Vec<NodeId> = probes
        .iter()
        .map(|n| c.find_node(n).expect("probe node exists"))
        .collect();
    let ui = cfg.ui();
    let tcfg = TransientConfig::new(cfg.bits as f64 * ui, ui / cfg.steps_per_ui as f64);
    let w = transient_probed(&c, &tcfg, &ids)?;
    Ok((w, nodes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeDiagram {
    pub ui: f64,
    pub dt: f64,
    pub vdd: f64,
    pub threshold: f64,
    /// Each trace spans exactly 2·UI: half a UI before the centre bit, the
    /// bit itself, and half a UI after. The centre sample is at UI.
    pub traces: Vec<Vec<f64>>,
    /// Logic level of each trace's centre bit.
    pub levels: Vec<bool>,
}

impl EyeDiagram {
    pub fn samples_per_ui(&self) -> usize {
        (self.ui / self.dt).round() as usize
    }

    /// Folded traces as CSV: `t_ui,trace0,trace1,…`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("t_ui");
        for k in 0..self.traces.len() {
            let _ = write!(out, ",trace{k}");
        }
        out.push('\n');
        let spu = self.samples_per_ui() as f64;
        for i in 0..self.traces.first().map_or(0, Vec::len) {
            let _ = write!(out, "{:e}", i as f64 / spu);
            for t in &self.traces {
                let _ = write!(out, ",{:e}", t[i]);
            }
            out.push('\n');
        }
        out
    }
}

/// Folds a receiver waveform into 2·UI traces centred on each bit after
/// warm-up. The fold phase is the mean threshold-crossing phase; the whole-UI
/// part of the channel delay is the bit offset whose centre samples best
/// agree with the pattern. A slow channel therefore shifts the window rather
/// than closing the eye.
pub fn fold_eye(v: &[f64], bits: &[bool], cfg: &DslConfig) -> EyeDiagram {
    let spu = cfg.steps_per_ui;
    let ui = cfg.ui();
    let dt = ui / spu as f64;
    let threshold = 0.5 * cfg.vdd;
    let phase = crossing_phase(v, spu, threshold).unwrap_or(cfg.t_transition / 2.0 / dt);
    let phase = phase.round() as usize % spu;
    let centre = |j: usize, lag: usize| (j + lag) * spu + phase + spu / 2;
    let lag = (0..4)
        .max_by_key(|&lag| {
            bits.iter()
                .enumerate()
                .filter(|&(j, &b)| v.get(centre(j, lag)).is_some_and(|x| (*x > threshold) == b))
                .count()
        })
        .unwrap_or(0);
    let mut traces = Vec::new();
    let mut levels = Vec::new();
    for (j, &bit) in bits.iter().enumerate().skip(cfg.warmup_bits) {
        let Some(start) = centre(j, lag).checked_sub(spu) else {
            continue;
        };
        let end = start + 2 * spu;
        if end >= v.len() {
            break;
        }
        traces.push(v[start..=end].to_vec());
        levels.push(bit);
    }
    EyeDiagram {
        ui,
        dt,
        vdd: cfg.vdd,
        threshold,
        traces,
        levels,
    }
}

/// Circular mean, in samples within one UI, of the threshold crossings.
fn crossing_phase(v: &[f64], spu: usize, th: f64) -> Option<f64> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for k in 1..v.len() {
        let (a, b) = (v[k - 1] - th, v[k] - th);
        if (a < 0.0) != (b < 0.0) {
            let t = (k - 1) as f64 + a / (a - b);
            let ang = 2.0 * std::f64::consts::PI * (t % spu as f64) / spu as f64;
            sx += ang.cos();
            sy += ang.sin();
            n += 1;
        }
    }
    if n == 0 || (sx * sx + sy * sy).sqrt() < 1e-9 * n as f64 {
        return None;
    }
    let mean = sy.atan2(sx).rem_euclid(2.0 * std::f64::consts::PI);
    Some(mean / (2.0 * std::f64::consts::PI) * spu as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeMetrics {
    pub height: f64,
    pub width: f64,
    pub jitter: f64,
}

pub fn eye_metrics(eye: &EyeDiagram) -> Result<EyeMetrics, DslError> {
    let ones = eye.levels.iter().filter(|b| **b).count();
    let zeros = eye.levels.len() - ones;
    if eye.traces.len() < MIN_TRACES || ones == 0 || zeros == 0 {
        return Err(DslError::TooFewTraces {
            needed: MIN_TRACES,
            ones,
            zeros,
        });
    }
    let spu = eye.samples_per_ui();
    let len = 2 * spu + 1;
    if eye.traces.iter().any(|t| t.len() != len) {
        return Err(DslError::Config("every trace must span exactly 2·UI".into()));
    }
    let band = MASK_BAND * eye.vdd;
    let (hi, lo) = (eye.threshold + band, eye.threshold - band);
    let bounds = |i: usize| {
        let mut min1 = f64::INFINITY;
        let mut max0 = f64::NEG_INFINITY;
        for (t, &b) in eye.traces.iter().zip(&eye.levels) {
            if b {
                min1 = min1.min(t[i]);
            } else {
                max0 = max0.max(t[i]);
            }
        }
        (min1, max0)
    };
    let open = |i: usize| {
        let (min1, max0) = bounds(i);
        min1 > hi && max0 < lo
    };

    let c = spu;
    let (min1, max0) = bounds(c);
    let height = (min1 - max0).clamp(0.0, eye.vdd);

    let width = if open(c) {
        let mut l = c;
        while l > 0 && open(l - 1) {
            l -= 1;
        }
        let mut r = c;
        while r + 1 < len && open(r + 1) {
            r += 1;
        }
        ((r - l) as f64 * eye.dt).min(eye.ui)
    } else {
        0.0
    };

    // Crossings of the leading edge of the centre bit, i.e. within ±UI/2
    // of the window's UI/2 mark.
    let mut first = f64::INFINITY;
    let mut last = f64::NEG_INFINITY;
    for t in &eye.traces {
        for i in 1..=spu {
            let (a, b) = (t[i - 1] - eye.threshold, t[i] - eye.threshold);
            if (a < 0.0) != (b < 0.0) {
                let x = ((i - 1) as f64 + a / (a - b)) * eye.dt;
                first = first.min(x);
                last = last.max(x);
            }
        }
    }
    let jitter = if last >= first { last - first } else { 0.0 };
    Ok(EyeMetrics {
        height,
        width,
        jitter,
    })
}

/// Simulates the bench and folds the victim far end.
pub fn simulate_eye(
    par: &ChannelParasitics,
    length: f64,
    cfg: &DslConfig,
) -> Result<EyeDiagram, DslError> {
    let (w, nodes) = simulate_bench(par, length, cfg)?;
    let v = w.voltage(&nodes.victim_rx).map_err(SolverError::from)?;
    let bits = prbs7(cfg.seed, cfg.bits)?;
    Ok(fold_eye(&v, &bits, cfg))
}
