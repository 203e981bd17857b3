//! The tubular-group data model.
//!
//! A [`TubularGroup`] is a connected directed multigraph. Each vertex carries
//! a rank 2 lattice in Q² (its vertex group) and each edge `e` carries the
//! pair of images `(u_e, v_e)` of a generator of its infinite cyclic edge
//! group, one in each endpoint lattice. The stable letter `t_e` satisfies
//!
//! ```text
//! t_e · u_e · t_e⁻¹ = v_e,   u_e ∈ G_{-e},  v_e ∈ G_{+e}.
//! ```
//!
//! Flipping the sign of both images describes the same group, so edges are
//! stored with the first nonzero coordinate of `u_e` positive.

mod doc;
mod etuple;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exactlat::{Lattice2, QVec2, Rat};

pub use doc::{EdgeDoc, GroupDoc, VertexDoc};
pub use etuple::ETuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: String,
    pub lattice: Lattice2,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    pub minus: String,
    pub plus: String,
    pub u: QVec2,
    pub v: QVec2,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        minus: impl Into<String>,
        plus: impl Into<String>,
        u: QVec2,
        v: QVec2,
    ) -> Self {
        let (u, v) = if u.leading_sign_negative() || (u.is_zero() && v.leading_sign_negative()) {
            (-u, -v)
        } else {
            (u, v)
        };
        Edge {
            id: id.into(),
            minus: minus.into(),
            plus: plus.into(),
            u,
            v,
        }
    }

    pub fn image(&self, side: Side) -> &QVec2 {
        match side {
            Side::Minus => &self.u,
            Side::Plus => &self.v,
        }
    }

    pub fn endpoint(&self, side: Side) -> &str {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }
}

/// A violated structural invariant of a [`TubularGroup`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyGraph,
    DuplicateVertex { vertex: String },
    DuplicateEdge { edge: String },
    VertexRank { vertex: String, rank: usize },
    UnknownVertex { edge: String, vertex: String },
    ZeroImage { edge: String, side: Side },
    ImageOutsideLattice { edge: String, side: Side },
    Disconnected { unreachable: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "the graph has no vertices"),
            Violation::DuplicateVertex { vertex } => write!(f, "duplicate vertex id {vertex:?}"),
            Violation::DuplicateEdge { edge } => write!(f, "duplicate edge id {edge:?}"),
            Violation::VertexRank { vertex, rank } => {
                write!(
                    f,
                    "vertex {vertex:?} has a rank {rank} lattice, expected rank 2"
                )
            }
            Violation::UnknownVertex { edge, vertex } => {
                write!(f, "edge {edge:?} refers to unknown vertex {vertex:?}")
            }
            Violation::ZeroImage { edge, side } => {
                write!(f, "edge {edge:?} has a zero {side} image")
            }
            Violation::ImageOutsideLattice { edge, side } => {
                write!(
                    f,
                    "the {side} image of edge {edge:?} is not in its vertex lattice"
                )
            }
            Violation::Disconnected { unreachable } => {
                write!(
                    f,
                    "graph is disconnected; unreachable vertices {unreachable:?}"
                )
            }
        }
    }
}

fn join_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("scaling by zero")]
    ZeroScalar,
    #[error("empty edge selection")]
    EmptySelection,
    #[error("selected edges do not span a connected subgraph")]
    DisconnectedSubgraph,
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {}", join_violations(.0))]
    Semantic(Vec<Violation>),
    #[error("invalid tubular group: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("edge tuple entry for {edge:?} must be a positive integer")]
    NonPositiveEntry { edge: String },
}

/// A graph of groups with Z² vertex groups and Z edge groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TubularGroup {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl TubularGroup {
    /// Builds a group without checking invariants; see [`TubularGroup::validate`].
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Self {
        let edges = edges
            .into_iter()
            .map(|e| Edge::new(e.id, e.minus, e.plus, e.u, e.v))
            .collect();
        TubularGroup { vertices, edges }
    }

    /// Builds a group and rejects it if any invariant fails.
    pub fn checked(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, ModelError> {
        let g = TubularGroup::new(vertices, edges);
        g.ensure_valid()?;
        Ok(g)
    }

    /// A single vertex `v` with lattice Z² and the given loops
    /// `(id, u_e, v_e)`.
    pub fn single_vertex(lattice: Lattice2, loops: &[(&str, QVec2, QVec2)]) -> Self {
        let edges = loops
            .iter()
            .map(|(id, u, v)| Edge::new(*id, "v", "v", u.clone(), v.clone()))
            .collect();
        TubularGroup::new(
            vec![Vertex {
                id: "v".into(),
                lattice,
            }],
            edges,
        )
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    /// Lattice of vertex `id`. Panics on an unknown id; only call on
    /// validated groups.
    pub fn lattice(&self, id: &str) -> &Lattice2 {
        &self
            .vertex(id)
            .unwrap_or_else(|| panic!("unknown vertex {id:?}"))
            .lattice
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &str> {
        self.edges.iter().map(|e| e.id.as_str())
    }

    pub fn is_single_vertex(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Every edge image is primitive in its vertex lattice.
    pub fn is_primitive(&self) -> bool {
        self.edges.iter().all(|e| {
            [Side::Minus, Side::Plus].into_iter().all(|s| {
                self.lattice(e.endpoint(s))
                    .is_primitive_in(e.image(s))
                    .unwrap_or(false)
            })
        })
    }

    /// Every violated invariant, in a deterministic order.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.vertices.is_empty() {
            out.push(Violation::EmptyGraph);
        }
        let mut seen = HashSet::new();
        for v in &self.vertices {
            if !seen.insert(v.id.as_str()) {
                out.push(Violation::DuplicateVertex {
                    vertex: v.id.clone(),
                });
            }
            if v.lattice.rank() != 2 {
                out.push(Violation::VertexRank {
                    vertex: v.id.clone(),
                    rank: v.lattice.rank(),
                });
            }
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            if !seen.insert(e.id.as_str()) {
                out.push(Violation::DuplicateEdge { edge: e.id.clone() });
            }
            for side in [Side::Minus, Side::Plus] {
                let image = e.image(side);
                if image.is_zero() {
                    out.push(Violation::ZeroImage {
                        edge: e.id.clone(),
                        side,
                    });
                }
                match self.vertex(e.endpoint(side)) {
                    None => out.push(Violation::UnknownVertex {
                        edge: e.id.clone(),
                        vertex: e.endpoint(side).to_string(),
                    }),
                    Some(vx) => {
                        if !image.is_zero() && !vx.lattice.contains(image) {
                            out.push(Violation::ImageOutsideLattice {
                                edge: e.id.clone(),
                                side,
                            });
                        }
                    }
                }
            }
        }
        if let Some(first) = self.vertices.first() {
            let reached = self.reachable_from(&first.id, self.edges.iter());
            let unreachable: Vec<String> = self
                .vertices
                .iter()
                .filter(|v| !reached.contains(v.id.as_str()))
                .map(|v| v.id.clone())
                .collect();
            if !unreachable.is_empty() {
                out.push(Violation::Disconnected { unreachable });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    fn reachable_from<'a>(
        &'a self,
        start: &'a str,
        edges: impl Iterator<Item = &'a Edge> + Clone,
    ) -> HashSet<&'a str> {
        let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
        for e in edges {
            adj.entry(&e.minus).or_default().push(&e.plus);
            adj.entry(&e.plus).or_default().push(&e.minus);
        }
        let mut reached = HashSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in adj.get(x).into_iter().flatten() {
                if reached.insert(y) {
                    stack.push(y);
                }
            }
        }
        reached
    }

    /// The group `αG`: every lattice and edge image multiplied by `alpha`.
    pub fn scale(&self, alpha: &Rat) -> Result<TubularGroup, ModelError> {
        if alpha.is_zero() {
            return Err(ModelError::ZeroScalar);
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id.clone(),
                lattice: v.lattice.scale(alpha),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Edge::new(
                    e.id.clone(),
                    e.minus.clone(),
                    e.plus.clone(),
                    e.u.scale(alpha),
                    e.v.scale(alpha),
                )
            })
            .collect();
        Ok(TubularGroup::new(vertices, edges))
    }

    /// The subtubular group on the selected edges and their endpoints,
    /// keeping the original vertex and edge order.
    pub fn subtubular<S: AsRef<str>>(&self, selection: &[S]) -> Result<TubularGroup, ModelError> {
        if selection.is_empty() {
            return Err(ModelError::EmptySelection);
        }
        let wanted: BTreeSet<&str> = selection.iter().map(AsRef::as_ref).collect();
        for id in &wanted {
            if self.edge(id).is_none() {
                return Err(ModelError::UnknownEdge(id.to_string()));
            }
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| wanted.contains(e.id.as_str()))
            .cloned()
            .collect();
        let used: HashSet<&str> = edges
            .iter()
            .flat_map(|e| [e.minus.as_str(), e.plus.as_str()])
            .collect();
        let reached = self.reachable_from(&edges[0].minus, edges.iter());
        if reached.len() != used.len() {
            return Err(ModelError::DisconnectedSubgraph);
        }
        let vertices = self
            .vertices
            .iter()
            .filter(|v| used.contains(v.id.as_str()))
            .cloned()
            .collect();
        Ok(TubularGroup { vertices, edges })
    }

    /// All nonempty edge subsets spanning a connected subgraph, as edge id
    /// lists in document order, smallest subsets first.
    pub fn connected_edge_subsets(&self) -> Vec<Vec<String>> {
        let n = self.edges.len();
        assert!(n < 32, "edge subset enumeration is limited to small graphs");
        let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks
            .into_iter()
            .map(|m| {
                (0..n)
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| self.edges[i].id.clone())
                    .collect::<Vec<_>>()
            })
            .filter(|sel| self.subtubular(sel).is_ok())
            .collect()
    }

    /// Canonical JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GroupDoc::from(self)).expect("group documents always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&GroupDoc::from(self))
            .expect("group documents always serialize")
    }

    /// Parses a document and validates the result.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let g = Self::from_json_unchecked(text)?;
        let violations = g.validate();
        if violations.is_empty() {
            Ok(g)
        } else {
            Err(ModelError::Semantic(violations))
        }
    }

    /// Parses a document without validating it.
    pub fn from_json_unchecked(text: &str) -> Result<Self, ModelError> {
        let doc: GroupDoc = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(doc.into_group())
    }
}

/// The snowflake group `⟨Z², s, t | (q,0)^s = (p,1), (q,0)^t = (p,-1)⟩`.
pub fn snowflake(p: u64, q: u64) -> Result<TubularGroup, ModelError> {
    if q < 1 || p < q {
        return Err(ModelError::InvalidParameters(format!(
            "snowflake groups need p >= q >= 1, got p = {p}, q = {q}"
        )));
    }
    let (p, q) = (p as i64, q as i64);
    Ok(TubularGroup::single_vertex(
        Lattice2::z2(),
        &[
            ("s", QVec2::from_ints(q, 0), QVec2::from_ints(p, 1)),
            ("t", QVec2::from_ints(q, 0), QVec2::from_ints(p, -1)),
        ],
    ))
}
