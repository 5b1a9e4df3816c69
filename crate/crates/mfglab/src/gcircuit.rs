//! Generalized circuits and approximate satisfaction checks.
//!
//! Circuit files hold one gate per line:
//!
//! ```text
//! nodes: a, b, c          # optional; otherwise nodes are taken in order of appearance
//! ASSIGN a = 1
//! AFF b = 0.5*a           # one or two weighted inputs, weights in [-1, 1]
//! AFF d = 0.5*a - 0.25*b
//! CMP c = b < a
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::u_clamp;

/// Slack added to every tolerance check to absorb rounding.
pub const CHECK_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Output fixed to 0 or 1.
    Assign { value: bool, out: usize },
    /// Output is `u_1(a p(in1) + b p(in2))`; a missing input contributes 0.
    Affine { a: f64, b: f64, in1: Option<usize>, in2: Option<usize>, out: usize },
    /// Output is 1 when `p(in1) < p(in2)` and 0 when `p(in1) > p(in2)`,
    /// outside a band of width `eps` around equality.
    Compare { in1: usize, in2: usize, out: usize },
}

impl Gate {
    pub fn out(&self) -> usize {
        match *self {
            Gate::Assign { out, .. } | Gate::Affine { out, .. } | Gate::Compare { out, .. } => out,
        }
    }

    fn inputs(&self) -> Vec<usize> {
        match *self {
            Gate::Assign { .. } => vec![],
            Gate::Affine { in1, in2, .. } => in1.into_iter().chain(in2).collect(),
            Gate::Compare { in1, in2, .. } => vec![in1, in2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GCircuit {
    nodes: Vec<String>,
    gates: Vec<Gate>,
}

/// Node values by name.
pub type Assignment = BTreeMap<String, f64>;

impl GCircuit {
    /// Validates node references, weights and output uniqueness.
    pub fn new(nodes: Vec<String>, gates: Vec<Gate>) -> Result<Self> {
        let mut seen = vec![false; nodes.len()];
        for (i, g) in gates.iter().enumerate() {
            for v in g.inputs().into_iter().chain([g.out()]) {
                if v >= nodes.len() {
                    return Err(Error::Shape(format!("gate {i} references node index {v}")));
                }
            }
            if let Gate::Affine { a, b, .. } = g {
                if !(-1.0..=1.0).contains(a) || !(-1.0..=1.0).contains(b) {
                    return Err(Error::Domain(format!("gate {i}: weights must lie in [-1, 1]")));
                }
            }
            if std::mem::replace(&mut seen[g.out()], true) {
                return Err(Error::Shape(format!("node `{}` is the output of two gates", nodes[g.out()])));
            }
        }
        Ok(GCircuit { nodes, gates })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Gate outputs in gate order.
    pub fn outputs(&self) -> Vec<usize> {
        self.gates.iter().map(Gate::out).collect()
    }

    pub fn is_output(&self, v: usize) -> bool {
        self.gates.iter().any(|g| g.out() == v)
    }

    /// Parses the circuit text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes: Vec<String> = Vec::new();
        let mut declared = false;
        let mut pending = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("nodes:") {
                for n in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                    if !is_ident(n) || nodes.iter().any(|m| m == n) {
                        return Err(Error::File { line: ln, msg: format!("bad or duplicate node `{n}`") });
                    }
                    nodes.push(n.to_string());
                }
                declared = true;
                continue;
            }
            pending.push((ln, line.to_string()));
        }
        let intern = |name: &str, ln: usize, nodes: &mut Vec<String>| -> Result<usize> {
            if !is_ident(name) {
                return Err(Error::File { line: ln, msg: format!("invalid node name `{name}`") });
            }
            if let Some(i) = nodes.iter().position(|n| n == name) {
                return Ok(i);
            }
            if declared {
                return Err(Error::File { line: ln, msg: format!("undeclared node `{name}`") });
            }
            nodes.push(name.to_string());
            Ok(nodes.len() - 1)
        };
        let mut gates = Vec::new();
        for (ln, line) in pending {
            let err = |msg: &str| Error::File { line: ln, msg: msg.to_string() };
            let (kind, rest) = line.split_once(char::is_whitespace).ok_or_else(|| err("expected a gate"))?;
            let (lhs, rhs) = rest.split_once('=').ok_or_else(|| err("expected `=`"))?;
            let out = intern(lhs.trim(), ln, &mut nodes)?;
            let rhs = rhs.trim();
            let gate = match kind {
                "ASSIGN" => match rhs {
                    "0" => Gate::Assign { value: false, out },
                    "1" => Gate::Assign { value: true, out },
                    _ => return Err(err("ASSIGN takes 0 or 1")),
                },
                "AFF" => {
                    let terms = parse_affine(rhs).map_err(|m| err(&m))?;
                    let mut it = terms.into_iter();
                    let (a, n1) = it.next().ok_or_else(|| err("AFF needs at least one term"))?;
                    let in1 = Some(intern(&n1, ln, &mut nodes)?);
                    let (b, in2) = match it.next() {
                        Some((b, n2)) => (b, Some(intern(&n2, ln, &mut nodes)?)),
                        None => (0.0, None),
                    };
                    if it.next().is_some() {
                        return Err(err("AFF takes at most two terms"));
                    }
                    Gate::Affine { a, b, in1, in2, out }
                }
                "CMP" => {
                    let (l, r) = rhs.split_once('<').ok_or_else(|| err("CMP expects `v1 < v2`"))?;
                    Gate::Compare {
                        in1: intern(l.trim(), ln, &mut nodes)?,
                        in2: intern(r.trim(), ln, &mut nodes)?,
                        out,
                    }
                }
                other => return Err(err(&format!("unknown gate `{other}`"))),
            };
            gates.push(gate);
        }
        GCircuit::new(nodes, gates)
    }

    /// Renders the circuit in the text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes: {}\n", self.nodes.join(", "));
        let n = |i: usize| &self.nodes[i];
        for g in &self.gates {
            let _ = match *g {
                Gate::Assign { value, out: o } => writeln!(out, "ASSIGN {} = {}", n(o), u8::from(value)),
                Gate::Affine { a, b, in1, in2, out: o } => {
                    let mut terms = Vec::new();
                    if let Some(i) = in1 {
                        terms.push(format!("{a:?}*{}", n(i)));
                    }
                    if let Some(i) = in2 {
                        terms.push(format!("{b:?}*{}", n(i)));
                    }
                    writeln!(out, "AFF {} = {}", n(o), terms.join(" + "))
                }
                Gate::Compare { in1, in2, out: o } => writeln!(out, "CMP {} = {} < {}", n(o), n(in1), n(in2)),
            };
        }
        out
    }
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(x) if x.is_ascii_alphabetic() || x == '_')
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_')
}

/// Parses `c1*v1 (+|-) c2*v2`, with optional signs on the coefficients.
fn parse_affine(text: &str) -> std::result::Result<Vec<(f64, String)>, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = 1.0;
        if !terms.is_empty() {
            match bytes[i] {
                b'+' => {}
                b'-' => sign = -1.0,
                _ => return Err(format!("expected `+` or `-` in `{text}`")),
            }
            i += 1;
        }
        let star = s[i..].find('*').ok_or_else(|| format!("expected `<weight>*<node>` in `{text}`"))? + i;
        let coef: f64 = s[i..star].parse().map_err(|_| format!("bad weight `{}`", &s[i..star]))?;
        let rest = &s[star + 1..];
        let len = rest.find(['+', '-']).unwrap_or(rest.len());
        terms.push((sign * coef, rest[..len].to_string()));
        i = star + 1 + len;
    }
    Ok(terms)
}

/// Outcome of checking one gate.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GateVerdict {
    pub gate: usize,
    pub description: String,
    pub satisfied: bool,
    /// Distance of the output from the allowed interval; 0 when satisfied.
    pub violation: f64,
}

fn lookup(c: &GCircuit, p: &Assignment, v: usize) -> Result<f64> {
    p.get(&c.nodes[v]).copied().ok_or_else(|| Error::MissingNodeValue(c.nodes[v].clone()))
}

/// Checks every gate against tolerance `eps`.
pub fn check_assignment(c: &GCircuit, p: &Assignment, eps: f64) -> Result<Vec<GateVerdict>> {
    if eps <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut out = Vec::with_capacity(c.gates.len());
    for (i, g) in c.gates.iter().enumerate() {
        let pv = lookup(c, p, g.out())?;
        let name = &c.nodes[g.out()];
        let (target, description) = match *g {
            Gate::Assign { value, .. } => {
                let z = f64::from(u8::from(value));
                (Some(z), format!("ASSIGN {name} = {z}"))
            }
            Gate::Affine { a, b, in1, in2, .. } => {
                let x1 = in1.map(|v| lookup(c, p, v)).transpose()?.unwrap_or(0.0);
                let x2 = in2.map(|v| lookup(c, p, v)).transpose()?.unwrap_or(0.0);
                let t = u_clamp(1.0, a * x1 + b * x2);
                (Some(t), format!("AFF {name}: target {t}"))
            }
            Gate::Compare { in1, in2, .. } => {
                let (x1, x2) = (lookup(c, p, in1)?, lookup(c, p, in2)?);
                if x1 <= x2 - eps + CHECK_SLACK {
                    (Some(1.0), format!("CMP {name}: {x1} < {x2}, target 1"))
                } else if x1 >= x2 + eps - CHECK_SLACK {
                    (Some(0.0), format!("CMP {name}: {x1} > {x2}, target 0"))
                } else {
                    (None, format!("CMP {name}: inputs within the brittle band"))
                }
            }
        };
        let violation = target.map_or(0.0, |t| ((pv - t).abs() - eps - CHECK_SLACK).max(0.0));
        out.push(GateVerdict { gate: i, description, satisfied: violation == 0.0, violation });
    }
    Ok(out)
}

/// True when every gate is satisfied.
pub fn satisfies(c: &GCircuit, p: &Assignment, eps: f64) -> Result<bool> {
    Ok(check_assignment(c, p, eps)?.iter().all(|v| v.satisfied))
}

/// Three-gate chain: `a := 1`, `b := a / 2`, `c := [b < a]`.
pub fn reference_circuit() -> GCircuit {
    let nodes = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let gates = vec![
        Gate::Assign { value: true, out: 0 },
        Gate::Affine { a: 0.5, b: 0.0, in1: Some(0), in2: None, out: 1 },
        Gate::Compare { in1: 1, in2: 0, out: 2 },
    ];
    GCircuit::new(nodes, gates).expect("valid circuit")
}

/// Parses `name = value` lines.
pub fn parse_assignment(text: &str) -> Result<Assignment> {
    let mut out = Assignment::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::File { line: i + 1, msg };
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected `node = value`".into()))?;
        let v: f64 = v.trim().parse().map_err(|_| err(format!("bad value `{}`", v.trim())))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

pub fn write_assignment(p: &Assignment) -> String {
    p.iter().map(|(k, v)| format!("{k} = {v:?}\n")).collect()
}
