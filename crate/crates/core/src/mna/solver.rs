//! MNA assembly, DC operating point and fixed-step transient analysis.

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, DiodeModel, ElementKind, NodeId};
use super::lu::{DenseMatrix, LuFactors};
use super::waveform::Waveform;
use super::SolverError;

/// Conductance from every node to ground.
const GMIN: f64 = 1e-12;
/// Conductance used to pin `.ic` nodes during the DC solve.
const IC_PIN: f64 = 1e9;
/// Start-up solve at t = 0 uses a backward-Euler step of `dt * START_FRACTION`.
const START_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientConfig {
    pub stop: f64,
    pub dt: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub max_iter: usize,
}

impl TransientConfig {
    pub fn new(stop: f64, dt: f64) -> Self {
        Self {
            stop,
            dt,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::Config(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.stop >= self.dt) {
            return Err(SolverError::Config(format!(
                "stop time {} must be at least dt {}",
                self.stop, self.dt
            )));
        }
        if self.max_iter == 0 || self.abstol <= 0.0 || self.reltol < 0.0 {
            return Err(SolverError::Config("invalid Newton tolerances".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.stop / self.dt).round() as usize).max(1)
    }
}

impl Default for TransientConfig {
    fn default() -> Self {
        Self {
            stop: 1e-9,
            dt: 1e-12,
            abstol: 1e-6,
            reltol: 1e-6,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Dc,
    BackwardEuler(f64),
    Trapezoidal(f64),
}

#[derive(Debug, Clone)]
enum Stamp {
    Conductance {
        p: Option<usize>,
        n: Option<usize>,
        g: f64,
    },
    Capacitor {
        p: Option<usize>,
        n: Option<usize>,
        c: f64,
        state: usize,
    },
    Inductor {
        p: Option<usize>,
        n: Option<usize>,
        b: usize,
        l: f64,
        state: usize,
    },
    Source {
        p: Option<usize>,
        n: Option<usize>,
        b: usize,
        element: usize,
    },
    Junction {
        a: Option<usize>,
        k: Option<usize>,
        area: f64,
        model: DiodeModel,
        vcrit: f64,
    },
}

/// Index layout and stamps for one circuit. Unknowns are numbered in element
/// order so that locally connected structures stay banded.
struct System<'c> {
    circuit: &'c Circuit,
    size: usize,
    node_index: Vec<Option<usize>>,
    // unknown index -> display name
    labels: Vec<String>,
    // which unknowns are voltages (nodes and internal diode nodes)
    is_voltage: Vec<bool>,
    stamps: Vec<Stamp>,
    capacitors: Vec<usize>,
    inductors: Vec<usize>,
    branch_of: Vec<Option<usize>>,
    junctions: usize,
}

impl<'c> System<'c> {
    fn new(circuit: &'c Circuit) -> Result<Self, SolverError> {
        circuit.validate()?;
        let mut node_index = vec![None; circuit.node_count()];
        let mut labels = Vec::new();
        let mut is_voltage = Vec::new();
        let mut stamps = Vec::new();
        let mut capacitors = Vec::new();
        let mut inductors = Vec::new();
        let mut branch_of = vec![None; circuit.elements.len()];
        let mut junctions = 0;

        let alloc = |labels: &mut Vec<String>, is_voltage: &mut Vec<bool>, name: String, v: bool| {
            labels.push(name);
            is_voltage.push(v);
            labels.len() - 1
        };

        for (ei, e) in circuit.elements.iter().enumerate() {
            for node in [e.pos, e.neg] {
                if !node.is_ground() && node_index[node.0].is_none() {
                    let idx = alloc(
                        &mut labels,
                        &mut is_voltage,
                        circuit.node_name(node).to_string(),
                        true,
                    );
                    node_index[node.0] = Some(idx);
                }
            }
            let p = node_index[e.pos.0];
            let n = node_index[e.neg.0];
            match &e.kind {
                ElementKind::Resistor { ohms } => stamps.push(Stamp::Conductance { p, n, g: 1.0 / ohms }),
                ElementKind::Capacitor { farads, .. } => {
                    capacitors.push(ei);
                    stamps.push(Stamp::Capacitor {
                        p,
                        n,
                        c: *farads,
                        state: capacitors.len() - 1,
                    });
                }
                ElementKind::Inductor { henries, .. } => {
                    let b = alloc(&mut labels, &mut is_voltage, format!("i({})", e.name), false);
                    branch_of[ei] = Some(b);
                    inductors.push(ei);
                    stamps.push(Stamp::Inductor {
                        p,
                        n,
                        b,
                        l: *henries,
                        state: inductors.len() - 1,
                    });
                }
                ElementKind::VoltageSource { .. } => {
                    let b = alloc(&mut labels, &mut is_voltage, format!("i({})", e.name), false);
                    branch_of[ei] = Some(b);
                    stamps.push(Stamp::Source { p, n, b, element: ei });
                }
                ElementKind::Diode { model, area } => {
                    let m = circuit.models[model];
                    let internal = alloc(
                        &mut labels,
                        &mut is_voltage,
                        format!("{}#junction", e.name),
                        true,
                    );
                    stamps.push(Stamp::Conductance {
                        p,
                        n: Some(internal),
                        g: 1.0 / m.series_resistance(*area),
                    });
                    let nvt = m.n * m.vt;
                    let is = m.js * area;
                    stamps.push(Stamp::Junction {
                        a: Some(internal),
                        k: n,
                        area: *area,
                        model: m,
                        vcrit: nvt * (nvt / (std::f64::consts::SQRT_2 * is)).ln(),
                    });
                    junctions += 1;
                }
            }
        }
        Ok(Self {
            circuit,
            size: labels.len(),
            node_index,
            labels,
            is_voltage,
            stamps,
            capacitors,
            inductors,
            branch_of,
            junctions,
        })
    }

    fn voltage(x: &[f64], p: Option<usize>, n: Option<usize>) -> f64 {
        p.map_or(0.0, |i| x[i]) - n.map_or(0.0, |i| x[i])
    }

    fn base_matrix(&self, mode: Mode) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.size);
        for (i, v) in self.is_voltage.iter().enumerate() {
            if *v {
                a.add(i, i, GMIN);
            }
        }
        for s in &self.stamps {
            match *s {
                Stamp::Conductance { p, n, g } => stamp_g(&mut a, p, n, g),
                Stamp::Capacitor { p, n, c, .. } => match mode {
                    Mode::Dc => {}
                    Mode::BackwardEuler(h) => stamp_g(&mut a, p, n, c / h),
                    Mode::Trapezoidal(h) => stamp_g(&mut a, p, n, 2.0 * c / h),
                },
                Stamp::Inductor { p, n, b, l, .. } => {
                    stamp_branch(&mut a, p, n, b);
                    let z = match mode {
                        Mode::Dc => 0.0,
                        Mode::BackwardEuler(h) => l / h,
                        Mode::Trapezoidal(h) => 2.0 * l / h,
                    };
                    a.add(b, b, -z);
                }
                Stamp::Source { p, n, b, .. } => stamp_branch(&mut a, p, n, b),
                Stamp::Junction { .. } => {}
            }
        }
        if mode == Mode::Dc {
            for id in self.circuit.node_ics.keys() {
                if let Some(i) = self.node_index[id.0] {
                    a.add(i, i, IC_PIN);
                }
            }
        }
        a
    }

    fn base_rhs(&self, mode: Mode, t: f64, state: &State) -> Vec<f64> {
        let mut rhs = vec![0.0; self.size];
        for s in &self.stamps {
            match *s {
                Stamp::Capacitor { p, n, c, state: k } => {
                    let inj = match mode {
                        Mode::Dc => 0.0,
                        Mode::BackwardEuler(h) => c / h * state.cap_v[k],
                        Mode::Trapezoidal(h) => 2.0 * c / h * state.cap_v[k] + state.cap_i[k],
                    };
                    inject(&mut rhs, p, n, inj);
                }
                Stamp::Inductor { b, l, state: k, .. } => {
                    rhs[b] = match mode {
                        Mode::Dc => 0.0,
                        Mode::BackwardEuler(h) => -l / h * state.ind_i[k],
                        Mode::Trapezoidal(h) => -2.0 * l / h * state.ind_i[k] - state.ind_v[k],
                    };
                }
                Stamp::Source { b, element, .. } => {
                    if let ElementKind::VoltageSource { wave } = &self.circuit.elements[element].kind {
                        rhs[b] = wave.value(t);
                    }
                }
                _ => {}
            }
        }
        if mode == Mode::Dc {
            for (id, v) in &self.circuit.node_ics {
                if let Some(i) = self.node_index[id.0] {
                    rhs[i] += IC_PIN * v;
                }
            }
        }
        rhs
    }
}

fn stamp_g(a: &mut DenseMatrix, p: Option<usize>, n: Option<usize>, g: f64) {
    if let Some(i) = p {
        a.add(i, i, g);
    }
    if let Some(j) = n {
        a.add(j, j, g);
    }
    if let (Some(i), Some(j)) = (p, n) {
        a.add(i, j, -g);
        a.add(j, i, -g);
    }
}

fn stamp_branch(a: &mut DenseMatrix, p: Option<usize>, n: Option<usize>, b: usize) {
    if let Some(i) = p {
        a.add(i, b, 1.0);
        a.add(b, i, 1.0);
    }
    if let Some(j) = n {
        a.add(j, b, -1.0);
        a.add(b, j, -1.0);
    }
}

// Current `i` injected into `p` and drawn from `n`.
fn inject(rhs: &mut [f64], p: Option<usize>, n: Option<usize>, i: f64) {
    if let Some(k) = p {
        rhs[k] += i;
    }
    if let Some(k) = n {
        rhs[k] -= i;
    }
}

/// SPICE `pnjlim`: compresses large forward excursions of the junction
/// voltage logarithmically above the critical voltage.
pub(crate) fn limit_junction(vnew: f64, vold: f64, nvt: f64, vcrit: f64) -> (f64, bool) {
    if vnew > vcrit && (vnew - vold).abs() > 2.0 * nvt {
        if vold > 0.0 {
            let arg = 1.0 + (vnew - vold) / nvt;
            if arg > 0.0 {
                (vold + nvt * arg.ln(), true)
            } else {
                (vcrit, true)
            }
        } else {
            (nvt * (vnew / nvt).ln(), true)
        }
    } else {
        (vnew, false)
    }
}

#[derive(Debug, Clone, Default)]
struct State {
    cap_v: Vec<f64>,
    cap_i: Vec<f64>,
    ind_i: Vec<f64>,
    ind_v: Vec<f64>,
}

struct Engine<'c> {
    sys: System<'c>,
    cfg: TransientConfig,
    cached: Vec<(Mode, LuFactors)>,
    junction_v: Vec<f64>,
}

impl<'c> Engine<'c> {
    fn new(sys: System<'c>, cfg: TransientConfig) -> Self {
        let junction_v = vec![0.0; sys.junctions];
        Self {
            sys,
            cfg,
            cached: Vec::new(),
            junction_v,
        }
    }

    fn linear_factors(&mut self, mode: Mode, time: Option<f64>) -> Result<&LuFactors, SolverError> {
        if let Some(pos) = self.cached.iter().position(|(m, _)| *m == mode) {
            return Ok(&self.cached[pos].1);
        }
        let a = self.sys.base_matrix(mode);
        let lu = LuFactors::factor(&a).map_err(|e| SolverError::Singular {
            time,
            column: e.column,
        })?;
        self.cached.push((mode, lu));
        Ok(&self.cached.last().expect("just pushed").1)
    }

    fn sync_junctions(&mut self, x: &[f64]) {
        let mut j = 0;
        for s in &self.sys.stamps {
            if let Stamp::Junction { a, k, .. } = *s {
                self.junction_v[j] = System::voltage(x, a, k);
                j += 1;
            }
        }
    }

    /// Solves one operating point (DC or one time step) starting from `guess`.
    fn solve(
        &mut self,
        mode: Mode,
        t: f64,
        state: &State,
        guess: &[f64],
        time: Option<f64>,
    ) -> Result<Vec<f64>, SolverError> {
        let rhs = self.sys.base_rhs(mode, t, state);
        if self.sys.junctions == 0 {
            let lu = self.linear_factors(mode, time)?;
            return Ok(lu.solve(&rhs));
        }

        let base = self.sys.base_matrix(mode);
        let mut a = base.clone();
        let mut x = guess.to_vec();
        self.sync_junctions(&x);
        let mut worst = (0usize, f64::INFINITY);
        for iter in 0..self.cfg.max_iter {
            a.copy_from(&base);
            let mut b = rhs.clone();
            let mut limited = false;
            let mut j = 0;
            for s in &self.sys.stamps {
                if let Stamp::Junction {
                    a: an,
                    k,
                    area,
                    model,
                    vcrit,
                } = *s
                {
                    let nvt = model.n * model.vt;
                    let vnew = System::voltage(&x, an, k);
                    let (v, lim) = limit_junction(vnew, self.junction_v[j], nvt, vcrit);
                    limited |= lim;
                    self.junction_v[j] = v;
                    let is = model.js * area;
                    let e = (v / nvt).exp();
                    let g = is * e / nvt + GMIN;
                    let i = is * (e - 1.0);
                    stamp_g(&mut a, an, k, g);
                    inject(&mut b, an, k, -(i - g * v));
                    j += 1;
                }
            }
            let lu = LuFactors::factor(&a).map_err(|e| SolverError::Singular {
                time,
                column: e.column,
            })?;
            let xn = lu.solve(&b);
            worst = (0, 0.0);
            let mut converged = !limited && iter > 0;
            for (i, (new, old)) in xn.iter().zip(&x).enumerate() {
                if !self.sys.is_voltage[i] {
                    continue;
                }
                let d = (new - old).abs();
                if d > worst.1 {
                    worst = (i, d);
                }
                if d > self.cfg.abstol + self.cfg.reltol * new.abs().max(old.abs()) {
                    converged = false;
                }
            }
            x = xn;
            if converged {
                return Ok(x);
            }
        }
        Err(SolverError::NonConvergence {
            time,
            iterations: self.cfg.max_iter,
            node: self.sys.labels[worst.0].clone(),
            residual: worst.1,
        })
    }

    fn update_state(&self, mode: Mode, state: &mut State, x: &[f64]) {
        for s in &self.sys.stamps {
            match *s {
                Stamp::Capacitor { p, n, c, state: k } => {
                    let v = System::voltage(x, p, n);
                    state.cap_i[k] = match mode {
                        Mode::Dc => 0.0,
                        Mode::BackwardEuler(h) => c / h * (v - state.cap_v[k]),
                        Mode::Trapezoidal(h) => 2.0 * c / h * (v - state.cap_v[k]) - state.cap_i[k],
                    };
                    state.cap_v[k] = v;
                }
                Stamp::Inductor { p, n, b, state: k, .. } => {
                    state.ind_i[k] = x[b];
                    state.ind_v[k] = System::voltage(x, p, n);
                }
                _ => {}
            }
        }
    }
}

/// Converged DC operating point.
#[derive(Debug, Clone)]
pub struct DcSolution {
    /// Voltage per circuit node (index by `NodeId.0`; ground is 0).
    pub node_voltages: Vec<f64>,
    /// Branch current per element (voltage sources and inductors), by
    /// element order; `None` for elements without a branch.
    pub branch_currents: Vec<Option<f64>>,
}

impl DcSolution {
    pub fn voltage(&self, node: NodeId) -> f64 {
        self.node_voltages[node.0]
    }
}

fn node_voltages(sys: &System<'_>, x: &[f64]) -> Vec<f64> {
    sys.node_index
        .iter()
        .map(|i| i.map_or(0.0, |i| x[i]))
        .collect()
}

/// DC operating point: capacitors open, inductors shorted, `.ic` nodes pinned.
pub fn dc_operating_point(c: &Circuit) -> Result<DcSolution, SolverError> {
    dc_with(c, &TransientConfig::default())
}

fn dc_with(c: &Circuit, cfg: &TransientConfig) -> Result<DcSolution, SolverError> {
    let sys = System::new(c)?;
    let mut engine = Engine::new(sys, *cfg);
    let state = State {
        cap_v: vec![0.0; engine.sys.capacitors.len()],
        cap_i: vec![0.0; engine.sys.capacitors.len()],
        ind_i: vec![0.0; engine.sys.inductors.len()],
        ind_v: vec![0.0; engine.sys.inductors.len()],
    };
    let guess = vec![0.0; engine.sys.size];
    let x = engine.solve(Mode::Dc, 0.0, &state, &guess, None)?;
    Ok(DcSolution {
        node_voltages: node_voltages(&engine.sys, &x),
        branch_currents: engine.sys.branch_of.iter().map(|b| b.map(|b| x[b])).collect(),
    })
}

/// Transient analysis recording every node and every branch current.
pub fn transient(c: &Circuit, cfg: &TransientConfig) -> Result<Waveform, SolverError> {
    let nodes: Vec<NodeId> = (1..c.node_count()).map(NodeId).collect();
    let branches: Vec<usize> = c
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.has_branch())
        .map(|(i, _)| i)
        .collect();
    run_transient(c, cfg, &nodes, &branches)
}

/// Transient analysis recording only `nodes` and the voltage-source currents.
pub fn transient_probed(
    c: &Circuit,
    cfg: &TransientConfig,
    nodes: &[NodeId],
) -> Result<Waveform, SolverError> {
    let branches: Vec<usize> = c
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.kind, ElementKind::VoltageSource { .. }))
        .map(|(i, _)| i)
        .collect();
    run_transient(c, cfg, nodes, &branches)
}

fn run_transient(
    c: &Circuit,
    cfg: &TransientConfig,
    nodes: &[NodeId],
    branches: &[usize],
) -> Result<Waveform, SolverError> {
    cfg.validate()?;
    for n in nodes {
        if n.0 >= c.node_count() {
            return Err(SolverError::Circuit(super::CircuitError::UnknownNode(format!(
                "#{}",
                n.0
            ))));
        }
    }
    let uic = c.has_initial_conditions();
    let x0_dc = if uic { None } else { Some(dc_with(c, cfg)?) };

    let sys = System::new(c)?;
    let mut engine = Engine::new(sys, *cfg);
    let ncap = engine.sys.capacitors.len();
    let nind = engine.sys.inductors.len();
    let mut state = State {
        cap_v: vec![0.0; ncap],
        cap_i: vec![0.0; ncap],
        ind_i: vec![0.0; nind],
        ind_v: vec![0.0; nind],
    };

    let size = engine.sys.size;
    let mut x = vec![0.0; size];
    let dt = cfg.dt;

    match &x0_dc {
        Some(dc) => {
            for (node, idx) in engine.sys.node_index.iter().enumerate() {
                if let Some(i) = idx {
                    x[*i] = dc.node_voltages[node];
                }
            }
            for (ei, b) in engine.sys.branch_of.iter().enumerate() {
                if let Some(b) = b {
                    x[*b] = dc.branch_currents[ei].unwrap_or(0.0);
                }
            }
            // diode internal nodes: rerun DC through the engine for a full vector
            if engine.sys.junctions > 0 {
                let guess = x.clone();
                x = engine.solve(Mode::Dc, 0.0, &state, &guess, None)?;
            }
            engine.update_state(Mode::Dc, &mut state, &x);
            for v in state.cap_i.iter_mut() {
                *v = 0.0;
            }
        }
        None => {
            for (id, v) in &c.node_ics {
                if let Some(i) = engine.sys.node_index[id.0] {
                    x[i] = *v;
                }
            }
            let mut ci = 0;
            let mut li = 0;
            for e in &c.elements {
                match &e.kind {
                    ElementKind::Capacitor { initial, .. } => {
                        let p = engine.sys.node_index[e.pos.0];
                        let n = engine.sys.node_index[e.neg.0];
                        state.cap_v[ci] = initial.unwrap_or_else(|| System::voltage(&x, p, n));
                        ci += 1;
                    }
                    ElementKind::Inductor { initial, .. } => {
                        state.ind_i[li] = initial.unwrap_or(0.0);
                        li += 1;
                    }
                    _ => {}
                }
            }
            let guess = x.clone();
            let h0 = dt * START_FRACTION;
            x = engine.solve(Mode::BackwardEuler(h0), 0.0, &state, &guess, Some(0.0))?;
        }
    }

    let steps = cfg.steps();
    let mut wf = Waveform::with_capacity(
        dt,
        steps + 1,
        nodes.iter().map(|n| c.node_name(*n).to_string()).collect(),
        branches.iter().map(|b| c.elements[*b].name.clone()).collect(),
    );
    let node_slots: Vec<Option<usize>> = nodes.iter().map(|n| engine.sys.node_index[n.0]).collect();
    let branch_slots: Vec<usize> = branches
        .iter()
        .map(|b| engine.sys.branch_of[*b].expect("branch element"))
        .collect();
    let record = |wf: &mut Waveform, k: usize, x: &[f64]| {
        let t = k as f64 * dt;
        wf.push_sample(
            t,
            node_slots.iter().map(|s| s.map_or(0.0, |i| x[i])),
            branch_slots.iter().map(|&b| x[b]),
        );
    };
    record(&mut wf, 0, &x);

    // Steps that start on (or straddle) a source breakpoint drop to backward
    // Euler, as SPICE does: it damps the parasitic undamped mode trapezoidal
    // integration leaves behind on under-resolved stiff poles.
    let mut breakpoints: Vec<f64> = c
        .elements
        .iter()
        .filter_map(|e| match &e.kind {
            ElementKind::VoltageSource { wave } if !wave.is_dc() => Some(wave.points()),
            _ => None,
        })
        .flat_map(|pts| pts.iter().map(|p| p.0))
        .filter(|t| *t > 0.0)
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let mut next_bp = 0;

    for k in 1..=steps {
        let t = k as f64 * dt;
        let t_prev = (k - 1) as f64 * dt;
        let slack = 1e-9 * dt;
        let mut at_breakpoint = false;
        while next_bp < breakpoints.len() && breakpoints[next_bp] < t - slack {
            at_breakpoint |= breakpoints[next_bp] >= t_prev - slack;
            next_bp += 1;
        }
        let mode = if k == 1 || at_breakpoint {
            Mode::BackwardEuler(dt)
        } else {
            Mode::Trapezoidal(dt)
        };
        let guess = x;
        x = engine.solve(mode, t, &state, &guess, Some(t))?;
        engine.update_state(mode, &mut state, &x);
        record(&mut wf, k, &x);
    }
    Ok(wf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mna::circuit::Pwl;

    #[test]
    fn limiting_compresses_large_steps() {
        let nvt = 0.02585;
        let (v, lim) = limit_junction(5.0, 0.6, nvt, 0.7);
        assert!(lim);
        assert!(v < 0.9 && v > 0.6);
        let (v, lim) = limit_junction(0.65, 0.64, nvt, 0.7);
        assert!(!lim);
        assert_eq!(v, 0.65);
    }

    #[test]
    fn divider_midpoint() {
        let mut c = Circuit::new();
        let a = c.node("a");
        let m = c.node("m");
        c.voltage_source("V1", a, NodeId::GROUND, Pwl::dc(1.0));
        c.resistor("R1", a, m, 1e3);
        c.resistor("R2", m, NodeId::GROUND, 1e3);
        let dc = dc_operating_point(&c).unwrap();
        assert!((dc.voltage(m) - 0.5).abs() < 1e-9);
        // source current flows into the + terminal: -1 V / 2 kΩ
        assert!((dc.branch_currents[0].unwrap() + 0.5e-3).abs() < 1e-9);
    }

    #[test]
    fn capacitors_only_float_to_zero() {
        let mut c = Circuit::new();
        let a = c.node("a");
        let b = c.node("b");
        c.capacitor("C1", a, NodeId::GROUND, 1e-12, None);
        c.capacitor("C2", a, b, 1e-12, None);
        c.capacitor("C3", b, NodeId::GROUND, 1e-12, None);
        let dc = dc_operating_point(&c).unwrap();
        assert!(dc.node_voltages.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bad_config_rejected() {
        let mut c = Circuit::new();
        let a = c.node("a");
        c.resistor("R1", a, NodeId::GROUND, 1.0);
        assert!(transient(&c, &TransientConfig::new(1e-9, 0.0)).is_err());
        assert!(transient(&c, &TransientConfig::new(1e-12, 1e-9)).is_err());
    }
}
