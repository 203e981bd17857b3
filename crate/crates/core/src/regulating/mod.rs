//! Regulating E-tuples.
//!
//! An E-tuple `k` assigns a positive integer to every edge. It is
//! regulating when each scaled image `k_e·u_e`, `k_e·v_e` is primitive in
//! the sublattice `G_v^(k)` generated by all scaled images incident to its
//! vertex. A tubular group is residually finite exactly when it admits a
//! regulating tuple; for single-vertex groups [`single_vertex_decide`]
//! searches the finitely many candidates that can work.
//!
//! Only positive entries are considered: `k_e` and `-k_e` scale the edge
//! group to the same subgroup.

mod single_vertex;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::exactlat::{int_string, Lattice2, QVec2, Rat};
use crate::model::{ETuple, Edge, ModelError, Side, TubularGroup, Vertex};

pub use single_vertex::{
    ordered_factorizations, parametric_candidates, single_vertex_decide, t_sequence, NoTupleReason,
    SingleVertexVerdict, TSequence,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegulatingError {
    #[error("tuple has no entry for edge {0:?}")]
    MissingEdgeEntry(String),
    #[error("the group has more than one vertex")]
    NotSingleVertex,
    #[error("at least two edges are required")]
    TooFewEdges,
    #[error("edge {0:?} has images spanning a rank 1 subgroup")]
    RankDeficientEdge(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Coordinates of one scaled image in the basis of its `G_v^(k)`; a gcd of
/// 1 witnesses primitivity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivityWitness {
    pub edge: String,
    pub side: Side,
    #[serde(with = "int_string")]
    pub c1: BigInt,
    #[serde(with = "int_string")]
    pub c2: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleCertificate {
    pub tuple: ETuple,
    pub lattices: IndexMap<String, Lattice2>,
    pub witnesses: Vec<PrimitivityWitness>,
}

impl TupleCertificate {
    /// Re-checks the certificate against `g` from its own data.
    pub fn verify(&self, g: &TubularGroup) -> Result<(), RegulatingError> {
        let bad = |m: String| Err(RegulatingError::InvalidCertificate(m));
        let lattices = vertex_sublattices(g, &self.tuple)?;
        if lattices != self.lattices {
            return bad("vertex sublattices do not match the tuple".into());
        }
        if self.witnesses.len() != 2 * g.edges().len() {
            return bad("expected one witness per edge image".into());
        }
        for e in g.edges() {
            let k = self
                .tuple
                .get(&e.id)
                .expect("checked by vertex_sublattices");
            for side in [Side::Minus, Side::Plus] {
                let Some(w) = self
                    .witnesses
                    .iter()
                    .find(|w| w.edge == e.id && w.side == side)
                else {
                    return bad(format!("no witness for edge {:?} {side}", e.id));
                };
                let l = &self.lattices[e.endpoint(side)];
                let x = e.image(side).scale_int(k);
                if l.point(&w.c1, &w.c2) != x {
                    return bad(format!(
                        "witness for edge {:?} {side} has wrong coordinates",
                        e.id
                    ));
                }
                if !w.c1.gcd(&w.c2).is_one() {
                    return bad(format!(
                        "edge {:?} {side}: coordinates are not coprime",
                        e.id
                    ));
                }
            }
        }
        Ok(())
    }
}

fn scaled_images<'a>(
    g: &'a TubularGroup,
    k: &'a ETuple,
) -> Result<Vec<(&'a Edge, Side, QVec2)>, RegulatingError> {
    let mut out = Vec::with_capacity(2 * g.edges().len());
    for e in g.edges() {
        let ke = k
            .get(&e.id)
            .ok_or_else(|| RegulatingError::MissingEdgeEntry(e.id.clone()))?;
        for side in [Side::Minus, Side::Plus] {
            out.push((e, side, e.image(side).scale_int(ke)));
        }
    }
    Ok(out)
}

/// `G_v^(k)` for every vertex, in vertex order.
pub fn vertex_sublattices(
    g: &TubularGroup,
    k: &ETuple,
) -> Result<IndexMap<String, Lattice2>, RegulatingError> {
    let images = scaled_images(g, k)?;
    Ok(g.vertices()
        .iter()
        .map(|v| {
            let gens: Vec<&QVec2> = images
                .iter()
                .filter(|(e, side, _)| e.endpoint(*side) == v.id)
                .map(|(_, _, x)| x)
                .collect();
            (v.id.clone(), Lattice2::span(gens))
        })
        .collect())
}

/// A certificate if `k` is regulating for `g`.
pub fn is_regulating(
    g: &TubularGroup,
    k: &ETuple,
) -> Result<Option<TupleCertificate>, RegulatingError> {
    let lattices = vertex_sublattices(g, k)?;
    let mut witnesses = Vec::new();
    for (e, side, x) in scaled_images(g, k)? {
        let (c1, c2) = lattices[e.endpoint(side)]
            .coords(&x)
            .expect("generators lie in their span");
        if !c1.gcd(&c2).is_one() {
            return Ok(None);
        }
        witnesses.push(PrimitivityWitness {
            edge: e.id.clone(),
            side,
            c1,
            c2,
        });
    }
    Ok(Some(TupleCertificate {
        tuple: k.clone(),
        lattices,
        witnesses,
    }))
}

/// A primitive tubular group mapping rigidly into `g`: vertex lattices are
/// rank 2 extensions of the `G_v^(k)` inside `G_v`, edge images are the
/// scaled images.
pub fn primitive_domain(
    g: &TubularGroup,
    cert: &TupleCertificate,
) -> Result<TubularGroup, RegulatingError> {
    g.ensure_valid()?;
    cert.verify(g)?;
    let vertices = g
        .vertices()
        .iter()
        .map(|v| {
            let l = &cert.lattices[&v.id];
            let lattice = match l.rank() {
                2 => l.clone(),
                1 => {
                    // Complete the primitive root of the generator to a
                    // basis of G_v; the span keeps the generator primitive.
                    let b = &l.basis()[0];
                    let d = v.lattice.torsion_degree(b).expect("G^(k) lies in G_v");
                    let root = b.scale(&Rat::new(BigInt::one(), d));
                    let c = v.lattice.complement(&root).expect("root is primitive");
                    Lattice2::span([b.clone(), c].iter())
                }
                _ => v.lattice.clone(),
            };
            Vertex {
                id: v.id.clone(),
                lattice,
            }
        })
        .collect();
    let edges = g
        .edges()
        .iter()
        .map(|e| {
            let k = cert.tuple.get(&e.id).expect("verified");
            Edge::new(
                e.id.clone(),
                e.minus.clone(),
                e.plus.clone(),
                e.u.scale_int(k),
                e.v.scale_int(k),
            )
        })
        .collect();
    let out = TubularGroup::new(vertices, edges);
    debug_assert!(out.is_primitive());
    Ok(out)
}
