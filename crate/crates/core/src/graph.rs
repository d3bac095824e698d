//! Metric-graph data model and the JSON graph-description format.
//!
//! A [`Graph`] is a plain value: vertices carrying a [`VertexCoupling`],
//! bonds of positive length between distinct vertices, and optional
//! semi-infinite leads. It can be built in code (possibly invalid) and checked
//! with [`validate`], or parsed from JSON with [`parse_graph`], which only ever
//! returns graphs that pass validation.
//!
//! ```json
//! { "vertices": [ { "id": 0, "coupling": { "kind": "dirichlet" } },
//!                 { "id": 1, "coupling": { "kind": "delta", "gamma": 0.5 } } ],
//!   "bonds":    [ { "from": 0, "to": 1, "length": 1.0 } ],
//!   "leads":    [] }
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = i64;

/// Matching condition at a vertex.
///
/// `Kirchhoff` is continuity plus vanishing sum of outgoing derivatives,
/// `Delta(gamma)` sets that sum to `gamma` times the vertex value, and
/// `Dirichlet` is the `gamma -> infinity` limit, kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoupling", into = "RawCoupling")]
pub enum VertexCoupling {
    Kirchhoff,
    Dirichlet,
    Delta(f64),
}

impl VertexCoupling {
    /// Coupling strength, `None` for Dirichlet.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            VertexCoupling::Kirchhoff => Some(0.0),
            VertexCoupling::Dirichlet => None,
            VertexCoupling::Delta(g) => Some(g),
        }
    }

    /// Whether the vertex scattering matrix is independent of `k`.
    pub fn is_scale_free(&self) -> bool {
        !matches!(self, VertexCoupling::Delta(g) if *g != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CouplingKind {
    Kirchhoff,
    Dirichlet,
    Delta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    kind: CouplingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

impl TryFrom<RawCoupling> for VertexCoupling {
    type Error = String;

    fn try_from(raw: RawCoupling) -> std::result::Result<Self, String> {
        match (raw.kind, raw.gamma) {
            (CouplingKind::Kirchhoff, None) => Ok(VertexCoupling::Kirchhoff),
            (CouplingKind::Dirichlet, None) => Ok(VertexCoupling::Dirichlet),
            (CouplingKind::Delta, Some(g)) => Ok(VertexCoupling::Delta(g)),
            (CouplingKind::Delta, None) => Err("missing field `gamma` for delta coupling".into()),
            (_, Some(_)) => Err("field `gamma` is only allowed for delta coupling".into()),
        }
    }
}

impl From<VertexCoupling> for RawCoupling {
    fn from(c: VertexCoupling) -> Self {
        match c {
            VertexCoupling::Kirchhoff => RawCoupling {
                kind: CouplingKind::Kirchhoff,
                gamma: None,
            },
            VertexCoupling::Dirichlet => RawCoupling {
                kind: CouplingKind::Dirichlet,
                gamma: None,
            },
            VertexCoupling::Delta(g) => RawCoupling {
                kind: CouplingKind::Delta,
                gamma: Some(g),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: VertexId,
    pub coupling: VertexCoupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bond {
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
    /// Magnetic vector potential on the bond. Stored, but every computation
    /// in this crate requires it to be zero.
    #[serde(default)]
    pub potential: f64,
}

impl Bond {
    pub fn new(from: VertexId, to: VertexId, length: f64) -> Self {
        Bond {
            from,
            to,
            length,
            potential: 0.0,
        }
    }
}

/// A semi-infinite lead attached at `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lead {
    pub vertex: VertexId,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Graph {
    pub vertices: Vec<Vertex>,
    pub bonds: Vec<Bond>,
    pub leads: Vec<Lead>,
}

/// One violated graph invariant, e.g. `bond 0: unknown vertex 7`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

impl Graph {
    /// A single bond of length `length` with the same coupling at both ends.
    pub fn interval(length: f64, ends: VertexCoupling) -> Self {
        Graph {
            vertices: vec![
                Vertex {
                    id: 0,
                    coupling: ends,
                },
                Vertex {
                    id: 1,
                    coupling: ends,
                },
            ],
            bonds: vec![Bond::new(0, 1, length)],
            leads: vec![],
        }
    }

    /// Compact star: a center vertex `0` joined to `arms` tips, all bonds of
    /// length `length`.
    pub fn star(arms: usize, length: f64, center: VertexCoupling, tips: VertexCoupling) -> Self {
        let mut vertices = vec![Vertex {
            id: 0,
            coupling: center,
        }];
        let mut bonds = Vec::with_capacity(arms);
        for i in 1..=arms as VertexId {
            vertices.push(Vertex {
                id: i,
                coupling: tips,
            });
            bonds.push(Bond::new(0, i, length));
        }
        Graph {
            vertices,
            bonds,
            leads: vec![],
        }
    }

    /// Open star: one vertex carrying `leads` semi-infinite leads.
    pub fn open_star(leads: usize, coupling: VertexCoupling) -> Self {
        Graph {
            vertices: vec![Vertex { id: 0, coupling }],
            bonds: vec![],
            leads: vec![Lead { vertex: 0 }; leads],
        }
    }

    /// Copy with every bond length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut g = self.clone();
        for b in &mut g.bonds {
            b.length *= factor;
        }
        g
    }

    pub fn vertex_index(&self, id: VertexId) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    /// Number of bonds plus leads meeting vertex `id`.
    pub fn valency(&self, id: VertexId) -> usize {
        let bonds = self
            .bonds
            .iter()
            .map(|b| (b.from == id) as usize + (b.to == id) as usize)
            .sum::<usize>();
        bonds + self.leads.iter().filter(|l| l.vertex == id).count()
    }

    pub fn total_length(&self) -> f64 {
        self.bonds.iter().map(|b| b.length).sum()
    }

    pub fn is_compact(&self) -> bool {
        self.leads.is_empty()
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }

    /// Errors unless every bond carries zero magnetic potential.
    pub fn require_zero_potential(&self) -> Result<()> {
        match self.bonds.iter().position(|b| b.potential != 0.0) {
            Some(i) => Err(Error::Unsupported(format!(
                "bond {i}: nonzero magnetic potential"
            ))),
            None => Ok(()),
        }
    }

    /// Serialize back to the graph-description format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization is infallible")
    }
}

/// Parse and validate a graph-description document.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let graph: Graph = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let diagnostics = validate(&graph);
    if diagnostics.is_empty() {
        Ok(graph)
    } else {
        Err(Error::InvalidGraph(
            diagnostics.iter().map(ToString::to_string).collect(),
        ))
    }
}

/// Check every graph invariant. Empty iff the graph is valid.
pub fn validate(g: &Graph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if g.vertices.is_empty() {
        out.push(Diagnostic::new("graph", "no vertices"));
    }

    let mut seen = HashSet::new();
    for v in &g.vertices {
        let subject = format!("vertex {}", v.id);
        if !seen.insert(v.id) {
            out.push(Diagnostic::new(&subject, "duplicate id"));
        }
        if let VertexCoupling::Delta(gamma) = v.coupling {
            if !gamma.is_finite() {
                out.push(Diagnostic::new(
                    &subject,
                    "delta coupling gamma must be finite",
                ));
            }
        }
    }

    let mut pairs: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for (i, b) in g.bonds.iter().enumerate() {
        let subject = format!("bond {i}");
        for end in [b.from, b.to] {
            if !seen.contains(&end) {
                out.push(Diagnostic::new(&subject, format!("unknown vertex {end}")));
            }
        }
        if b.from == b.to {
            out.push(Diagnostic::new(&subject, "loops unsupported"));
        } else {
            let key = (b.from.min(b.to), b.from.max(b.to));
            if let Some(first) = pairs.insert(key, i) {
                out.push(Diagnostic::new(
                    &subject,
                    format!(
                        "multi-edge between vertices {} and {} unsupported (duplicates bond {first})",
                        key.0, key.1
                    ),
                ));
            }
        }
        if b.length.is_nan() || b.length <= 0.0 {
            out.push(Diagnostic::new(&subject, "non-positive length"));
        } else if !b.length.is_finite() {
            out.push(Diagnostic::new(&subject, "non-finite length"));
        }
        if !b.potential.is_finite() {
            out.push(Diagnostic::new(&subject, "non-finite potential"));
        }
    }

    for (i, l) in g.leads.iter().enumerate() {
        if !seen.contains(&l.vertex) {
            out.push(Diagnostic::new(
                format!("lead {i}"),
                format!("unknown vertex {}", l.vertex),
            ));
        }
    }

    for v in &g.vertices {
        if g.valency(v.id) == 0 {
            out.push(Diagnostic::new(
                format!("vertex {}", v.id),
                "isolated vertex (valency 0)",
            ));
        }
    }
    out
}

pub fn total_length(g: &Graph) -> f64 {
    g.total_length()
}
