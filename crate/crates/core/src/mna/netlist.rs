//! Minimal SPICE-like deck reader and writer.
//!
//! ```text
//! * comment
//! R1 in out 7.04
//! C1 out 0 1141f ic=125
//! L1 a b 5.978n ic=0
//! D1 pad 0 dclamp area=51.8
//! V1 in 0 PWL(0 0 1n 1)
//! .model dclamp D(js=1e-12 n=1 rs=90)
//! .ic V(out)=0
//! .tran 1p 10n
//! .end
//! ```
//!
//! Everything is case-insensitive; `0` and `gnd` are ground. Numbers accept
//! the suffixes `f p n u m k meg g t`.

use std::fmt::Write as _;

use super::circuit::{Circuit, DiodeModel, ElementKind, Pwl};
use super::solver::TransientConfig;
use super::CircuitError;
use crate::units::parse_si;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// A parsed deck: the circuit plus the `.tran` request, if any.
#[derive(Debug, Clone)]
pub struct Deck {
    pub circuit: Circuit,
    pub tran: Option<TransientConfig>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Open,
    Close,
    Eq,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    col: usize,
}

fn lex(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b',' | b'\r' => i += 1,
            b'(' => {
                out.push(Token { tok: Tok::Open, col: i + 1 });
                i += 1;
            }
            b')' => {
                out.push(Token { tok: Tok::Close, col: i + 1 });
                i += 1;
            }
            b'=' => {
                out.push(Token { tok: Tok::Eq, col: i + 1 });
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b' ' | b'\t' | b',' | b'\r' | b'(' | b')' | b'=') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Word(&line[start..i]),
                    col: start + 1,
                });
            }
        }
    }
    out
}

struct LineCursor<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    eol_col: usize,
}

impl<'a> LineCursor<'a> {
    fn err<T>(&self, col: usize, message: impl Into<String>) -> Result<T, NetlistError> {
        Err(NetlistError::Syntax {
            line: self.line,
            column: col,
            message: message.into(),
        })
    }

    fn col(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.eol_col, |t| t.col)
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn word(&mut self, what: &str) -> Result<&'a str, NetlistError> {
        match self.tokens.get(self.pos) {
            Some(Token { tok: Tok::Word(w), .. }) => {
                let w = *w;
                self.pos += 1;
                Ok(w)
            }
            _ => self.err(self.col(), format!("expected {what}")),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, NetlistError> {
        let col = self.col();
        let w = self.word(what)?;
        match parse_si(w) {
            Some(v) => Ok(v),
            None => self.err(col, format!("invalid number `{w}` for {what}")),
        }
    }

    fn expect(&mut self, tok: Tok<'_>, what: &str) -> Result<(), NetlistError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(self.col(), format!("expected {what}"))
        }
    }

    /// `key=value` pairs until end of line or a closing paren.
    fn params(&mut self) -> Result<Vec<(String, f64, usize)>, NetlistError> {
        let mut out = Vec::new();
        while let Some(Tok::Word(_)) = self.peek() {
            let col = self.col();
            let key = self.word("parameter name")?.to_ascii_lowercase();
            self.expect(Tok::Eq, "`=` after parameter name")?;
            let v = self.number(&key)?;
            out.push((key, v, col));
        }
        Ok(out)
    }

    fn finish(&self) -> Result<(), NetlistError> {
        if self.done() {
            Ok(())
        } else {
            self.err(self.col(), "unexpected trailing tokens")
        }
    }
}

/// Parses a deck into a validated circuit and optional `.tran` request.
pub fn parse_netlist(text: &str) -> Result<Deck, NetlistError> {
    let mut circuit = Circuit::new();
    let mut tran = None;
    // (model name, line, column) for referential checks after all lines
    let mut model_refs: Vec<(String, usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let mut cur = LineCursor {
            line: line_no,
            tokens: lex(raw),
            pos: 0,
            eol_col: raw.len() + 1,
        };
        let head_col = cur.col();
        let head = cur.word("element or directive")?;
        let lower = head.to_ascii_lowercase();
        if lower == ".end" {
            break;
        }
        if let Some(directive) = lower.strip_prefix('.') {
            match directive {
                "model" => {
                    let name = cur.word("model name")?.to_ascii_lowercase();
                    let kind_col = cur.col();
                    let kind = cur.word("model type")?;
                    if !kind.eq_ignore_ascii_case("d") {
                        return cur.err(kind_col, format!("unsupported model type `{kind}`"));
                    }
                    let mut m = DiodeModel::default();
                    let paren = cur.peek() == Some(&Tok::Open);
                    if paren {
                        cur.pos += 1;
                    }
                    for (key, v, col) in cur.params()? {
                        match key.as_str() {
                            "js" | "is" => m.js = v,
                            "n" => m.n = v,
                            "rs" => m.rs = v,
                            "vt" => m.vt = v,
                            _ => return cur.err(col, format!("unknown diode parameter `{key}`")),
                        }
                    }
                    if paren {
                        cur.expect(Tok::Close, "`)` closing model parameters")?;
                    }
                    cur.finish()?;
                    circuit.add_model(&name, m);
                }
                "ic" => {
                    while !cur.done() {
                        let col = cur.col();
                        let v = cur.word("V(node)=value")?;
                        if !v.eq_ignore_ascii_case("v") {
                            return cur.err(col, "expected V(node)=value");
                        }
                        cur.expect(Tok::Open, "`(`")?;
                        let node = cur.word("node name")?;
                        cur.expect(Tok::Close, "`)`")?;
                        cur.expect(Tok::Eq, "`=`")?;
                        let val = cur.number("initial voltage")?;
                        let id = circuit.node(node);
                        circuit.node_ics.insert(id, val);
                    }
                }
                "tran" => {
                    let dt = cur.number("timestep")?;
                    let stop = cur.number("stop time")?;
                    cur.finish()?;
                    tran = Some(TransientConfig::new(stop, dt));
                }
                _ => return cur.err(head_col, format!("unknown directive `{head}`")),
            }
            continue;
        }

        let prefix = lower.chars().next().expect("non-empty word");
        let a = cur.word("first node")?;
        let b = cur.word("second node")?;
        let (a, b) = (circuit.node(a), circuit.node(b));
        match prefix {
            'r' => {
                let v = cur.number("resistance")?;
                cur.finish()?;
                circuit.resistor(head, a, b, v);
            }
            'c' | 'l' => {
                let v = cur.number(if prefix == 'c' { "capacitance" } else { "inductance" })?;
                let mut initial = None;
                for (key, val, col) in cur.params()? {
                    match key.as_str() {
                        "ic" => initial = Some(val),
                        _ => return cur.err(col, format!("unknown parameter `{key}`")),
                    }
                }
                cur.finish()?;
                if prefix == 'c' {
                    circuit.capacitor(head, a, b, v, initial);
                } else {
                    circuit.inductor(head, a, b, v, initial);
                }
            }
            'd' => {
                let col = cur.col();
                let model = cur.word("model name")?.to_ascii_lowercase();
                let mut area = 1.0;
                for (key, val, col) in cur.params()? {
                    match key.as_str() {
                        "area" => area = val,
                        _ => return cur.err(col, format!("unknown parameter `{key}`")),
                    }
                }
                cur.finish()?;
                model_refs.push((model.clone(), line_no, col));
                circuit.diode(head, a, b, model, area);
            }
            'v' => {
                let col = cur.col();
                let w = cur.word("source value")?;
                let wave = if w.eq_ignore_ascii_case("pwl") {
                    cur.expect(Tok::Open, "`(` after PWL")?;
                    let mut pts = Vec::new();
                    while let Some(Tok::Word(_)) = cur.peek() {
                        let t = cur.number("PWL time")?;
                        let v = cur.number("PWL value")?;
                        pts.push((t, v));
                    }
                    cur.expect(Tok::Close, "`)` closing PWL")?;
                    match Pwl::new(pts) {
                        Ok(p) => p,
                        Err(e) => return cur.err(col, e.to_string()),
                    }
                } else if w.eq_ignore_ascii_case("dc") {
                    Pwl::dc(cur.number("DC value")?)
                } else {
                    match parse_si(w) {
                        Some(v) => Pwl::dc(v),
                        None => return cur.err(col, format!("invalid source value `{w}`")),
                    }
                };
                cur.finish()?;
                circuit.voltage_source(head, a, b, wave);
            }
            _ => return cur.err(head_col, format!("unknown element type `{head}`")),
        }
    }

    for (model, line, column) in model_refs {
        if !circuit.models.contains_key(&model) {
            return Err(NetlistError::Syntax {
                line,
                column,
                message: format!("unknown diode model `{model}` (no matching .model)"),
            });
        }
    }
    circuit.validate()?;
    Ok(Deck { circuit, tran })
}

/// Writes a deck that parses back to the same circuit.
pub fn unparse_netlist(c: &Circuit, tran: Option<&TransientConfig>) -> String {
    let mut out = String::new();
    for (name, m) in &c.models {
        let _ = writeln!(
            out,
            ".model {name} D(js={:e} n={:e} rs={:e} vt={:e})",
            m.js, m.n, m.rs, m.vt
        );
    }
    for e in &c.elements {
        let a = c.node_name(e.pos);
        let b = c.node_name(e.neg);
        let _ = match &e.kind {
            ElementKind::Resistor { ohms } => writeln!(out, "{} {a} {b} {ohms:e}", e.name),
            ElementKind::Capacitor { farads, initial } => match initial {
                Some(ic) => writeln!(out, "{} {a} {b} {farads:e} ic={ic:e}", e.name),
                None => writeln!(out, "{} {a} {b} {farads:e}", e.name),
            },
            ElementKind::Inductor { henries, initial } => match initial {
                Some(ic) => writeln!(out, "{} {a} {b} {henries:e} ic={ic:e}", e.name),
                None => writeln!(out, "{} {a} {b} {henries:e}", e.name),
            },
            ElementKind::VoltageSource { wave } => {
                let pts: Vec<String> = wave
                    .points()
                    .iter()
                    .map(|(t, v)| format!("{t:e} {v:e}"))
                    .collect();
                writeln!(out, "{} {a} {b} PWL({})", e.name, pts.join(" "))
            }
            ElementKind::Diode { model, area } => {
                writeln!(out, "{} {a} {b} {model} area={area:e}", e.name)
            }
        };
    }
    if !c.node_ics.is_empty() {
        out.push_str(".ic");
        for (id, v) in &c.node_ics {
            let _ = write!(out, " V({})={v:e}", c.node_name(*id));
        }
        out.push('\n');
    }
    if let Some(t) = tran {
        let _ = writeln!(out, ".tran {:e} {:e}", t.dt, t.stop);
    }
    out.push_str(".end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rc_deck() {
        let deck = parse_netlist("R1 in out 7.04\nC1 out 0 1141f\n.tran 1p 10n").unwrap();
        assert_eq!(deck.circuit.elements.len(), 2);
        let tran = deck.tran.unwrap();
        assert_eq!(tran.dt, 1e-12);
        assert_eq!(tran.stop, 10e-9);
        match deck.circuit.elements[1].kind {
            ElementKind::Capacitor { farads, .. } => assert_eq!(farads, 1141e-15),
            _ => panic!(),
        }
    }

    #[test]
    fn missing_model_named() {
        let err = parse_netlist("R1 pad 0 1\nD1 pad 0 dclamp area=51.8\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dclamp"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn suffix_value() {
        let deck = parse_netlist("L1 a 0 5.978n\nR1 a 0 1").unwrap();
        match deck.circuit.elements[0].kind {
            ElementKind::Inductor { henries, .. } => assert_eq!(henries, 5.978e-9),
            _ => panic!(),
        }
    }

    #[test]
    fn full_grammar() {
        let text = "* bench\n\
            .MODEL dclamp D(js=1e-12 n=1 rs=90)\n\
            Vin src gnd PWL(0 0 1n 1 2n 1)\n\
            R1 src cap 7.04\n\
            C1 cap 0 1p IC=125\n\
            L1 cap pad 2n\n\
            D1 pad 0 DCLAMP area=25.9\n\
            D2 0 pad dclamp area=25.9\n\
            .ic V(pad)=0\n\
            .tran 1p 1n\n\
            .end\n\
            garbage after end";
        let deck = parse_netlist(text).unwrap();
        let c = &deck.circuit;
        assert_eq!(c.elements.len(), 6);
        assert_eq!(c.models["dclamp"].rs, 90.0);
        assert_eq!(c.node_ics.len(), 1);
        match &c.elements[0].kind {
            ElementKind::VoltageSource { wave } => assert_eq!(wave.value(0.5e-9), 0.5),
            _ => panic!(),
        }
    }

    #[test]
    fn errors_carry_line_and_column() {
        match parse_netlist("R1 a 0 1\nR2 a 0 xyz\n").unwrap_err() {
            NetlistError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 8);
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_netlist("Q1 a b c\n"),
            Err(NetlistError::Syntax { line: 1, column: 1, .. })
        ));
        assert!(matches!(
            parse_netlist("R1 a b 1\n"),
            Err(NetlistError::Circuit(CircuitError::DanglingNode(_)))
        ));
        assert!(parse_netlist(".foo 1\n").is_err());
        assert!(parse_netlist("R1 a 0 1 2\n").is_err());
    }

    #[test]
    fn round_trip() {
        let text = ".model dm D(js=2e-12 n=1.1 rs=45)\n\
            V1 in 0 PWL(0 0 5e-11 0.9)\n\
            R1 in a 150\n\
            L1 a b 1.3n ic=1m\n\
            C1 b 0 33f ic=0.2\n\
            D1 b 0 dm area=3.3\n\
            .ic V(a)=0.1\n.tran 1p 2n\n";
        let deck = parse_netlist(text).unwrap();
        let again = parse_netlist(&unparse_netlist(&deck.circuit, deck.tran.as_ref())).unwrap();
        assert!(again.circuit.same_as(&deck.circuit));
        assert_eq!(again.tran, deck.tran);
    }
}
