//! Local quotients `G//G'`: the graph of finite groups obtained by dividing
//! each vertex and edge group of `G` by the image of a rigid sub-object `G'`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::WordError;
use crate::exactlat::{int_string, smith_2x2, Rat};
use crate::model::{Side, TubularGroup};

mod int_pair {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &[BigInt; 2], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(p.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[BigInt; 2], D::Error> {
        let [a, b] = <[String; 2]>::deserialize(d)?;
        let parse = |s: String| s.trim().parse::<BigInt>().map_err(serde::de::Error::custom);
        Ok([parse(a)?, parse(b)?])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteVertex {
    pub id: String,
    /// Invariant factors `d1 | d2` of `G_v / G'_v ≅ Z/d1 × Z/d2`.
    #[serde(with = "int_pair")]
    pub factors: [BigInt; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteEdge {
    pub id: String,
    #[serde(with = "int_string")]
    pub order: BigInt,
    /// Image of the edge generator in the `−e` vertex quotient, reduced
    /// modulo its invariant factors.
    #[serde(with = "int_pair")]
    pub minus: [BigInt; 2],
    #[serde(with = "int_pair")]
    pub plus: [BigInt; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGog {
    pub vertices: Vec<FiniteVertex>,
    pub edges: Vec<FiniteEdge>,
}

/// Additive order of `x` in `Z/d1 × Z/d2`.
pub(crate) fn additive_order(x: &[BigInt; 2], factors: &[BigInt; 2]) -> BigInt {
    x.iter()
        .zip(factors)
        .map(|(c, d)| {
            if d.is_one() {
                BigInt::one()
            } else {
                d / c.gcd(d)
            }
        })
        .fold(BigInt::one(), |acc, o| acc.lcm(&o))
}

impl FiniteGog {
    pub fn vertex(&self, id: &str) -> Option<&FiniteVertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    /// Every attaching map is injective: the generator's image has order
    /// equal to the edge group's order.
    pub fn attaching_maps_injective(&self, g: &TubularGroup) -> bool {
        self.edges.iter().all(|fe| {
            let e = g.edge(&fe.id).expect("same graph");
            [(Side::Minus, &fe.minus), (Side::Plus, &fe.plus)]
                .into_iter()
                .all(|(side, img)| {
                    let v = self.vertex(e.endpoint(side)).expect("same graph");
                    additive_order(img, &v.factors) == fe.order
                })
        })
    }
}

fn reduce_mod(c: [BigInt; 2], n: &BigInt) -> [BigInt; 2] {
    c.map(|x| x.mod_floor(n))
}

/// `G // nG` for a primitive `G`: vertex groups `(Z/n)²`, edge groups
/// `Z/n`, attaching images the lattice coordinates of `u_e`, `v_e` mod `n`.
pub fn local_quotient(g: &TubularGroup, n: &BigInt) -> Result<FiniteGog, WordError> {
    g.ensure_valid()?;
    if *n < BigInt::from(2) {
        return Err(WordError::BadModulus);
    }
    if !g.is_primitive() {
        return Err(WordError::NotPrimitive);
    }
    let coords = |v: &str, x| {
        let (a, b) = g.lattice(v).coords(x).expect("valid image");
        reduce_mod([a, b], n)
    };
    let out = FiniteGog {
        vertices: g
            .vertices()
            .iter()
            .map(|v| FiniteVertex {
                id: v.id.clone(),
                factors: [n.clone(), n.clone()],
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| FiniteEdge {
                id: e.id.clone(),
                order: n.clone(),
                minus: coords(&e.minus, &e.u),
                plus: coords(&e.plus, &e.v),
            })
            .collect(),
    };
    debug_assert!(out.attaching_maps_injective(g));
    Ok(out)
}

/// `G // G'` for a sub-object `G'` on the same graph (`G'_v ⊆ G_v`, each
/// `u'_e` an integer multiple of `u_e`, likewise `v'_e`). Requires the
/// intersection condition `⟨u'_e⟩ = ⟨u_e⟩ ∩ G'_v` on both sides of every
/// edge, which makes every attaching map injective.
pub fn local_quotient_general(
    g: &TubularGroup,
    sub: &TubularGroup,
) -> Result<FiniteGog, WordError> {
    g.ensure_valid()?;
    sub.ensure_valid()?;
    let violated = |edge: &str, message: String| WordError::ConditionViolated {
        edge: edge.to_string(),
        message,
    };
    let mut vertices = Vec::new();
    // Smith transform per vertex: a G_v coordinate row c maps to c·V,
    // reduced modulo (d1, d2).
    let mut transforms = Vec::new();
    for v in g.vertices() {
        let sv = sub
            .vertex(&v.id)
            .ok_or_else(|| violated("", format!("vertex {:?} missing", v.id)))?;
        let rows: Vec<[BigInt; 2]> =
            sv.lattice
                .basis()
                .iter()
                .map(|b| {
                    v.lattice.coords(b).map(|(x, y)| [x, y]).ok_or_else(|| {
                        violated("", format!("vertex {:?} is not a sublattice", v.id))
                    })
                })
                .collect::<Result<_, _>>()?;
        let a = [rows[0].clone(), rows[1].clone()];
        let s = smith_2x2(&a);
        vertices.push(FiniteVertex {
            id: v.id.clone(),
            factors: s.d.clone(),
        });
        transforms.push((v.id.clone(), s));
    }
    let image = |vid: &str, x| -> [BigInt; 2] {
        let (c1, c2) = g.lattice(vid).coords(x).expect("valid image");
        let (_, s) = transforms
            .iter()
            .find(|(id, _)| id == vid)
            .expect("all vertices");
        let y = [
            &c1 * &s.v[0][0] + &c2 * &s.v[1][0],
            &c1 * &s.v[0][1] + &c2 * &s.v[1][1],
        ];
        [y[0].mod_floor(&s.d[0]), y[1].mod_floor(&s.d[1])]
    };
    let mut edges = Vec::new();
    for e in g.edges() {
        let se = sub
            .edge(&e.id)
            .ok_or_else(|| violated(&e.id, "edge missing from the sub-object".into()))?;
        let mut order: Option<BigInt> = None;
        for side in [Side::Minus, Side::Plus] {
            if se.endpoint(side) != e.endpoint(side) {
                return Err(violated(&e.id, "endpoints differ".into()));
            }
            let gen = e.image(side);
            let m = crate::exactlat::parallel_ratio(gen, se.image(side))
                .ok()
                .flatten()
                .filter(Rat::is_integer)
                .ok_or_else(|| violated(&e.id, format!("{side} image is not a multiple")))?
                .to_integer()
                .expect("integer");
            let q = sub
                .lattice(se.endpoint(side))
                .minimal_scale(gen)
                .expect("nonzero")
                .expect("rank 2 sub-lattice");
            if q != Rat::from_int(m.abs()) {
                return Err(violated(
                    &e.id,
                    format!("{side}: edge subgroup has index {m} but meets the vertex sub-lattice in index {q}"),
                ));
            }
            match &order {
                Some(o) if *o != m.abs() => {
                    return Err(violated(&e.id, "the two sides scale differently".into()))
                }
                _ => order = Some(m.abs()),
            }
        }
        edges.push(FiniteEdge {
            id: e.id.clone(),
            order: order.expect("two sides"),
            minus: image(&e.minus, &e.u),
            plus: image(&e.plus, &e.v),
        });
    }
    let out = FiniteGog { vertices, edges };
    debug_assert!(out.attaching_maps_injective(g));
    Ok(out)
}

/// Whether `x` lies in the cyclic subgroup generated by `gen` in `(Z/n)²`,
/// by listing all multiples.
pub(crate) fn in_cyclic_mod(x: &[BigInt; 2], gen: &[BigInt; 2], n: &BigInt) -> bool {
    let target = reduce_mod(x.clone(), n);
    let mut acc = [BigInt::zero(), BigInt::zero()];
    let mut j = BigInt::zero();
    while &j < n {
        if acc == target {
            return true;
        }
        acc = reduce_mod([&acc[0] + &gen[0], &acc[1] + &gen[1]], n);
        j += 1;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::{Lattice2, QVec2};
    use crate::model::snowflake;

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn basic() -> TubularGroup {
        TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("t", QVec2::from_ints(0, 1), QVec2::from_ints(1, 1))],
        )
    }

    #[test]
    fn mod_two_structure() {
        let g = snowflake(3, 1).unwrap();
        let q = local_quotient(&g, &bi(2)).unwrap();
        assert!(q.vertices.iter().all(|v| v.factors == [bi(2), bi(2)]));
        assert!(q.edges.iter().all(|e| e.order == bi(2)));
        assert!(q.attaching_maps_injective(&g));
    }

    #[test]
    fn mod_three_images() {
        let q = local_quotient(&basic(), &bi(3)).unwrap();
        assert_eq!(q.vertices[0].factors, [bi(3), bi(3)]);
        assert_eq!(q.edges[0].order, bi(3));
        assert_eq!(q.edges[0].minus, [bi(0), bi(1)]);
        assert_eq!(q.edges[0].plus, [bi(1), bi(1)]);
    }

    #[test]
    fn non_primitive_input_is_rejected() {
        let g = snowflake(3, 2).unwrap();
        assert_eq!(local_quotient(&g, &bi(2)), Err(WordError::NotPrimitive));
        assert_eq!(local_quotient(&basic(), &bi(1)), Err(WordError::BadModulus));
    }

    #[test]
    fn general_form_agrees_on_scaled_groups() {
        let g = basic();
        for n in 2..6 {
            let sub = g.scale(&Rat::from_int(n)).unwrap();
            let general = local_quotient_general(&g, &sub).unwrap();
            let direct = local_quotient(&g, &bi(n)).unwrap();
            assert_eq!(general.vertices, direct.vertices);
            for (a, b) in general.edges.iter().zip(&direct.edges) {
                assert_eq!(a.order, b.order);
                assert_eq!(additive_order(&a.minus, &[bi(n), bi(n)]), bi(n));
                assert_eq!(additive_order(&b.minus, &[bi(n), bi(n)]), bi(n));
            }
        }
    }

    #[test]
    fn general_form_checks_the_intersection_condition() {
        // (2,0) is not primitive, so <(2,0)> ∩ 2Z² = <(2,0)> ≠ <(4,0)>
        let g = snowflake(3, 2).unwrap();
        let sub = g.scale(&Rat::from_int(2)).unwrap();
        assert!(matches!(
            local_quotient_general(&g, &sub),
            Err(WordError::ConditionViolated { .. })
        ));
    }

    #[test]
    fn cyclic_membership() {
        let n = bi(6);
        assert!(in_cyclic_mod(&[bi(4), bi(2)], &[bi(2), bi(1)], &n));
        assert!(!in_cyclic_mod(&[bi(1), bi(0)], &[bi(2), bi(1)], &n));
    }
}
