//! Expansion morphisms and expansion sequences.
//!
//! The expansion of `G` divides every edge group by its degree
//! `d_e = lcm(d_e⁻, d_e⁺)`, where `d_e^±` is the order of the torsion of
//! `G_{±e} / ⟨image⟩`, and closes each vertex lattice under the new edge
//! images. Iterating gives the expansion sequence, which either reaches a
//! primitive group (residually finite), repeats up to rigid isomorphism (not
//! residually finite), or runs past the step budget.

mod decide;
mod rigid;
mod sequence;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::exactlat::{int_string, Lattice2, Rat};
use crate::model::{Edge, ModelError, Side, TubularGroup, Vertex};

pub use decide::{
    decide, expansion_route, regulating_route, DecideError, DecideOptions, Evidence, RouteVerdict,
    Verdict, VerdictKind, DEFAULT_BUDGET,
};
pub use rigid::{
    detect_rigid_iso, EdgeImage, IsoInvariants, IsoSearch, NonIsoCertificate, RigidIso, VertexImage,
};
pub use sequence::{length_bound, run_sequence, ExpansionOutcome, SequenceStatus};

/// Torsion degrees of one edge's attaching maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDegree {
    pub edge: String,
    #[serde(with = "int_string")]
    pub d_minus: BigInt,
    #[serde(with = "int_string")]
    pub d_plus: BigInt,
    #[serde(with = "int_string")]
    pub d: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDegrees(pub Vec<EdgeDegree>);

impl EdgeDegrees {
    pub fn get(&self, edge: &str) -> Option<&EdgeDegree> {
        self.0.iter().find(|d| d.edge == edge)
    }

    /// `lcm` of all edge degrees.
    pub fn lcm(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, d| acc.lcm(&d.d))
    }

    pub fn all_one(&self) -> bool {
        self.0.iter().all(|d| d.d.is_one())
    }
}

pub fn edge_degrees(g: &TubularGroup) -> Result<EdgeDegrees, ModelError> {
    g.ensure_valid()?;
    Ok(EdgeDegrees(
        g.edges()
            .iter()
            .map(|e| {
                let deg = |side: Side| {
                    g.lattice(e.endpoint(side))
                        .torsion_degree(e.image(side))
                        .expect("validated images are nonzero lattice members")
                };
                let d_minus = deg(Side::Minus);
                let d_plus = deg(Side::Plus);
                let d = d_minus.lcm(&d_plus);
                EdgeDegree {
                    edge: e.id.clone(),
                    d_minus,
                    d_plus,
                    d,
                }
            })
            .collect(),
    ))
}

/// One expansion step. Returns the expanded group and whether the step was
/// trivial (all degrees 1, output equal to input).
pub fn expand(g: &TubularGroup) -> Result<(TubularGroup, bool), ModelError> {
    let degrees = edge_degrees(g)?;
    if degrees.all_one() {
        return Ok((g.clone(), true));
    }
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .zip(&degrees.0)
        .map(|(e, d)| {
            let s = Rat::new(BigInt::one(), d.d.clone());
            Edge::new(
                e.id.clone(),
                e.minus.clone(),
                e.plus.clone(),
                e.u.scale(&s),
                e.v.scale(&s),
            )
        })
        .collect();
    let vertices = g
        .vertices()
        .iter()
        .map(|vx| {
            let mut gens = vx.lattice.basis().to_vec();
            for e in &edges {
                if e.minus == vx.id {
                    gens.push(e.u.clone());
                }
                if e.plus == vx.id {
                    gens.push(e.v.clone());
                }
            }
            Vertex {
                id: vx.id.clone(),
                lattice: Lattice2::span(gens.iter()),
            }
        })
        .collect();
    Ok((TubularGroup::new(vertices, edges), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::QVec2;
    use crate::model::snowflake;

    fn first_example() -> TubularGroup {
        TubularGroup::single_vertex(
            Lattice2::z2(),
            &[
                ("s", QVec2::from_ints(1, 0), QVec2::from_ints(2, 2)),
                ("t", QVec2::from_ints(0, 1), QVec2::from_ints(1, 1)),
            ],
        )
    }

    fn degree_triple(d: &EdgeDegree) -> (i64, i64, i64) {
        let c = |x: &BigInt| i64::try_from(x).unwrap();
        (c(&d.d_minus), c(&d.d_plus), c(&d.d))
    }

    #[test]
    fn degrees_of_the_first_example() {
        let d = edge_degrees(&first_example()).unwrap();
        assert_eq!(degree_triple(d.get("s").unwrap()), (1, 2, 2));
        assert_eq!(degree_triple(d.get("t").unwrap()), (1, 1, 1));
        assert_eq!(d.lcm(), BigInt::from(2));
    }

    #[test]
    fn degrees_of_snowflake_3_2() {
        let d = edge_degrees(&snowflake(3, 2).unwrap()).unwrap();
        for e in ["s", "t"] {
            assert_eq!(degree_triple(d.get(e).unwrap()), (2, 1, 2));
        }
    }

    #[test]
    fn primitive_groups_have_unit_degrees_and_trivial_expansion() {
        let g = snowflake(4, 1).unwrap();
        assert!(edge_degrees(&g).unwrap().all_one());
        let (h, trivial) = expand(&g).unwrap();
        assert!(trivial);
        assert_eq!(h, g);
    }

    #[test]
    fn first_example_expands_to_primitive_target() {
        let (g1, trivial) = expand(&first_example()).unwrap();
        assert!(!trivial);
        let half = Rat::new(1, 2);
        let expected = TubularGroup::single_vertex(
            Lattice2::span(
                [
                    QVec2::new(half.clone(), Rat::zero()),
                    QVec2::from_ints(0, 1),
                ]
                .iter(),
            ),
            &[
                ("s", QVec2::new(half, Rat::zero()), QVec2::from_ints(1, 1)),
                ("t", QVec2::from_ints(0, 1), QVec2::from_ints(1, 1)),
            ],
        );
        assert_eq!(g1, expected);
        assert!(g1.is_primitive());
    }

    #[test]
    fn second_example_expands_twice() {
        let g = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[
                ("s", QVec2::from_ints(1, 0), QVec2::from_ints(2, 4)),
                ("t", QVec2::from_ints(0, 1), QVec2::from_ints(1, 2)),
            ],
        );
        let (g1, _) = expand(&g).unwrap();
        let (g2, trivial) = expand(&g1).unwrap();
        assert!(!trivial);
        let quarter = QVec2::new(Rat::new(1, 4), Rat::zero());
        let half_y = QVec2::new(Rat::zero(), Rat::new(1, 2));
        assert_eq!(
            g2.lattice("v"),
            &Lattice2::span([quarter.clone(), half_y.clone()].iter())
        );
        assert_eq!(g2.edge("s").unwrap().u, quarter);
        assert_eq!(g2.edge("t").unwrap().u, half_y);
        assert_eq!(
            g2.edge("t").unwrap().v,
            QVec2::new(Rat::new(1, 2), Rat::one())
        );
    }

    #[test]
    fn invalid_groups_are_rejected() {
        let g = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("s", QVec2::from_ints(1, 0), QVec2::zero())],
        );
        assert!(matches!(edge_degrees(&g), Err(ModelError::Invalid(_))));
        assert!(matches!(expand(&g), Err(ModelError::Invalid(_))));
    }
}
