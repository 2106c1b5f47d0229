//! Circuit graph: named nodes, two-terminal elements and diode models.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::CircuitError;

/// Node handle; index 0 is ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn is_ground(self) -> bool {
        self.0 == 0
    }
}

/// Shockley junction with area-scaled saturation current and an
/// area-specific series resistance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeModel {
    /// saturation current density, A/μm²
    pub js: f64,
    /// ideality factor
    pub n: f64,
    /// thermal voltage, V
    pub vt: f64,
    /// specific series resistance, Ω·μm²
    pub rs: f64,
}

impl Default for DiodeModel {
    fn default() -> Self {
        Self {
            js: 1e-12,
            n: 1.0,
            vt: 0.02585,
            rs: 90.0,
        }
    }
}

impl DiodeModel {
    pub fn is_valid(&self) -> bool {
        [self.js, self.n, self.vt, self.rs]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite())
    }

    /// Junction current for a diode of `area` μm² at junction voltage `v`.
    pub fn junction_current(&self, area: f64, v: f64) -> f64 {
        area * self.js * (v / (self.n * self.vt)).exp_m1()
    }

    pub fn series_resistance(&self, area: f64) -> f64 {
        self.rs / area
    }
}

/// Piecewise-linear waveform; held flat before the first and after the last
/// breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pwl {
    points: Vec<(f64, f64)>,
}

impl Pwl {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CircuitError> {
        if points.is_empty() {
            return Err(CircuitError::Invalid("PWL needs at least one point".into()));
        }
        if points.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(CircuitError::Invalid(
                "PWL times must be non-decreasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn dc(v: f64) -> Self {
        Self {
            points: vec![(0.0, v)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_dc(&self) -> bool {
        self.points.len() == 1
    }

    pub fn value(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        // last breakpoint at or before t
        let idx = pts.partition_point(|p| p.0 <= t);
        if idx >= pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (t0, v0) = pts[idx - 1];
        let (t1, v1) = pts[idx];
        if t1 == t0 {
            v1
        } else {
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ElementKind {
    Resistor { ohms: f64 },
    Capacitor { farads: f64, initial: Option<f64> },
    Inductor { henries: f64, initial: Option<f64> },
    VoltageSource { wave: Pwl },
    /// `area` in μm²
    Diode { model: String, area: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    pub pos: NodeId,
    pub neg: NodeId,
    pub kind: ElementKind,
}

impl Element {
    /// True for elements that carry a branch-current unknown.
    pub fn has_branch(&self) -> bool {
        matches!(
            self.kind,
            ElementKind::Inductor { .. } | ElementKind::VoltageSource { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    node_names: Vec<String>,
    #[serde(skip)]
    node_lookup: HashMap<String, NodeId>,
    pub elements: Vec<Element>,
    pub models: BTreeMap<String, DiodeModel>,
    /// `.ic V(node)=…` overrides.
    pub node_ics: BTreeMap<NodeId, f64>,
}

fn normalize(name: &str) -> String {
    let lower = name.to_ascii_lowercase();
    if lower == "gnd" {
        "0".to_string()
    } else {
        lower
    }
}

impl Circuit {
    pub fn new() -> Self {
        let mut c = Self::default();
        c.node_names.push("0".into());
        c.node_lookup.insert("0".into(), NodeId::GROUND);
        c
    }

    /// Interns `name` (case-insensitive; `0` and `gnd` are ground).
    pub fn node(&mut self, name: &str) -> NodeId {
        let key = normalize(name);
        if let Some(id) = self.node_lookup.get(&key) {
            return *id;
        }
        let id = NodeId(self.node_names.len());
        self.node_names.push(key.clone());
        self.node_lookup.insert(key, id);
        id
    }

    pub fn find_node(&self, name: &str) -> Option<NodeId> {
        self.node_lookup.get(&normalize(name)).copied()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.node_names[id.0]
    }

    /// Node count including ground.
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn push(&mut self, name: impl Into<String>, pos: NodeId, neg: NodeId, kind: ElementKind) {
        self.elements.push(Element {
            name: name.into(),
            pos,
            neg,
            kind,
        });
    }

    pub fn resistor(&mut self, name: impl Into<String>, a: NodeId, b: NodeId, ohms: f64) {
        self.push(name, a, b, ElementKind::Resistor { ohms });
    }

    pub fn capacitor(
        &mut self,
        name: impl Into<String>,
        a: NodeId,
        b: NodeId,
        farads: f64,
        initial: Option<f64>,
    ) {
        self.push(name, a, b, ElementKind::Capacitor { farads, initial });
    }

    pub fn inductor(
        &mut self,
        name: impl Into<String>,
        a: NodeId,
        b: NodeId,
        henries: f64,
        initial: Option<f64>,
    ) {
        self.push(name, a, b, ElementKind::Inductor { henries, initial });
    }

    pub fn voltage_source(&mut self, name: impl Into<String>, a: NodeId, b: NodeId, wave: Pwl) {
        self.push(name, a, b, ElementKind::VoltageSource { wave });
    }

    pub fn diode(
        &mut self,
        name: impl Into<String>,
        anode: NodeId,
        cathode: NodeId,
        model: impl Into<String>,
        area: f64,
    ) {
        self.push(
            name,
            anode,
            cathode,
            ElementKind::Diode {
                model: model.into().to_ascii_lowercase(),
                area,
            },
        );
    }

    pub fn add_model(&mut self, name: &str, model: DiodeModel) {
        self.models.insert(name.to_ascii_lowercase(), model);
    }

    pub fn has_diodes(&self) -> bool {
        self.elements
            .iter()
            .any(|e| matches!(e.kind, ElementKind::Diode { .. }))
    }

    /// True when any element or node carries an explicit initial condition.
    pub fn has_initial_conditions(&self) -> bool {
        !self.node_ics.is_empty()
            || self.elements.iter().any(|e| {
                matches!(
                    e.kind,
                    ElementKind::Capacitor {
                        initial: Some(_),
                        ..
                    } | ElementKind::Inductor {
                        initial: Some(_),
                        ..
                    }
                )
            })
    }

    /// Structural checks: node indices, element values, model references,
    /// unique names and connectivity to ground.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let n = self.node_count();
        let mut names = HashSet::new();
        for e in &self.elements {
            if !names.insert(e.name.to_ascii_lowercase()) {
                return Err(CircuitError::Invalid(format!(
                    "duplicate element name `{}`",
                    e.name
                )));
            }
            if e.pos.0 >= n || e.neg.0 >= n {
                return Err(CircuitError::Invalid(format!(
                    "element `{}` references a node index >= {n}",
                    e.name
                )));
            }
            let positive = |what: &str, v: f64| {
                if v > 0.0 && v.is_finite() {
                    Ok(())
                } else {
                    Err(CircuitError::Invalid(format!(
                        "element `{}`: {what} must be positive (got {v})",
                        e.name
                    )))
                }
            };
            match &e.kind {
                ElementKind::Resistor { ohms } => positive("resistance", *ohms)?,
                ElementKind::Capacitor { farads, .. } => positive("capacitance", *farads)?,
                ElementKind::Inductor { henries, .. } => positive("inductance", *henries)?,
                ElementKind::VoltageSource { .. } => {}
                ElementKind::Diode { model, area } => {
                    positive("area", *area)?;
                    match self.models.get(model) {
                        None => return Err(CircuitError::UnknownModel(model.clone())),
                        Some(m) if !m.is_valid() => {
                            return Err(CircuitError::Invalid(format!(
                                "diode model `{model}` has non-positive parameters"
                            )))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        for id in self.node_ics.keys() {
            if id.0 >= n {
                return Err(CircuitError::Invalid(format!(
                    ".ic references node index {} >= {n}",
                    id.0
                )));
            }
        }
        self.check_connectivity()
    }

    fn check_connectivity(&self) -> Result<(), CircuitError> {
        let n = self.node_count();
        let mut adj = vec![Vec::new(); n];
        for e in &self.elements {
            adj[e.pos.0].push(e.neg.0);
            adj[e.neg.0].push(e.pos.0);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(CircuitError::DanglingNode(self.node_names[i].clone())),
            None => Ok(()),
        }
    }

    /// Rebuilds the name index after deserialisation.
    pub fn reindex(&mut self) {
        self.node_lookup = self
            .node_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeId(i)))
            .collect();
    }

    /// Structural equality ignoring the lookup cache.
    pub fn same_as(&self, other: &Circuit) -> bool {
        self.node_names == other.node_names
            && self.elements == other.elements
            && self.models == other.models
            && self.node_ics == other.node_ics
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pwl_interpolates_and_holds() {
        let w = Pwl::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 2.0), (4.0, 0.0)]).unwrap();
        assert_eq!(w.value(-1.0), 0.0);
        assert_eq!(w.value(0.5), 1.0);
        assert_eq!(w.value(2.0), 2.0);
        assert_eq!(w.value(3.5), 1.0);
        assert_eq!(w.value(10.0), 0.0);
        assert!(Pwl::new(vec![(1.0, 0.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn ground_aliases() {
        let mut c = Circuit::new();
        assert_eq!(c.node("gnd"), NodeId::GROUND);
        assert_eq!(c.node("GND"), NodeId::GROUND);
        assert_eq!(c.node("0"), NodeId::GROUND);
        let a = c.node("In");
        assert_eq!(c.node("in"), a);
    }

    #[test]
    fn floating_subcircuit_rejected() {
        let mut c = Circuit::new();
        let a = c.node("a");
        let b = c.node("b");
        c.resistor("R1", a, b, 1.0);
        assert!(matches!(c.validate(), Err(CircuitError::DanglingNode(_))));
        c.resistor("R2", b, NodeId::GROUND, 1.0);
        c.validate().unwrap();
    }

    #[test]
    fn missing_model_rejected() {
        let mut c = Circuit::new();
        let a = c.node("pad");
        c.diode("D1", a, NodeId::GROUND, "dclamp", 51.8);
        match c.validate() {
            Err(CircuitError::UnknownModel(m)) => assert_eq!(m, "dclamp"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonpositive_values_rejected() {
        let mut c = Circuit::new();
        let a = c.node("a");
        c.resistor("R1", a, NodeId::GROUND, 0.0);
        assert!(c.validate().is_err());
    }
}
