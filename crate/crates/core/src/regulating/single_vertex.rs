//! The complete regulating-tuple search for single-vertex groups.
//!
//! With edges `e_1 … e_n` in document order, let `t_i` be the least
//! positive rational with `t_i·u_i ∈ ⟨u_{i+1}, v_{i+1}⟩` (indices mod n).
//! A regulating tuple must satisfy `k_{i+1}/k_i = z_i/t_i` with integers
//! `z_i` whose product is `T = t_1⋯t_n`, so up to scaling there is one
//! candidate per ordered factorization of `T`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{is_regulating, vertex_sublattices, RegulatingError, TupleCertificate};
use crate::exactlat::{lcm_denominators, parallel_ratio, Lattice2, Rat};
use crate::model::{ETuple, TubularGroup};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TSequence {
    pub order: Vec<String>,
    pub t: Vec<Rat>,
    pub product: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoTupleReason {
    /// The two images of `edge` are parallel with `v = ratio·u`, `|ratio| ≠ 1`.
    CommensurableDistinct { edge: String, ratio: Rat },
    /// `T` is not an integer, so no factorization exists.
    NonIntegralProduct { t_sequence: TSequence },
    /// Every parametric candidate failed.
    NoCandidate {
        t_sequence: TSequence,
        candidates: Vec<ETuple>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SingleVertexVerdict {
    Regulating {
        certificate: TupleCertificate,
        /// Edges with equal image spans, set aside during the search and
        /// reattached afterwards.
        discarded: Vec<String>,
    },
    NoTuple {
        reason: NoTupleReason,
    },
}

impl SingleVertexVerdict {
    pub fn is_regulating(&self) -> bool {
        matches!(self, SingleVertexVerdict::Regulating { .. })
    }

    /// Re-checks the verdict against `g` without running the search.
    pub fn verify(&self, g: &TubularGroup) -> Result<(), RegulatingError> {
        let bad = |m: &str| Err(RegulatingError::InvalidCertificate(m.to_string()));
        match self {
            SingleVertexVerdict::Regulating { certificate, .. } => certificate.verify(g),
            SingleVertexVerdict::NoTuple { reason } => match reason {
                NoTupleReason::CommensurableDistinct { edge, ratio } => {
                    let e = g
                        .edge(edge)
                        .ok_or_else(|| RegulatingError::UnknownEdge(edge.clone()))?;
                    match parallel_ratio(&e.u, &e.v) {
                        Ok(Some(r)) if &r == ratio && r.abs() != Rat::one() => Ok(()),
                        _ => bad("edge images are not commensurable and distinct"),
                    }
                }
                NoTupleReason::NonIntegralProduct { t_sequence } => {
                    let reduced = g.subtubular(&t_sequence.order)?;
                    if &t_sequence_of(&reduced)? != t_sequence || t_sequence.product.is_integer() {
                        return bad("t-sequence does not match or has integral product");
                    }
                    check_discards(g, &t_sequence.order)
                }
                NoTupleReason::NoCandidate {
                    t_sequence,
                    candidates,
                } => {
                    let reduced = g.subtubular(&t_sequence.order)?;
                    if &t_sequence_of(&reduced)? != t_sequence
                        || &parametric_candidates(t_sequence) != candidates
                    {
                        return bad("candidate list does not match the t-sequence");
                    }
                    for k in candidates {
                        if is_regulating(&reduced, k)?.is_some() {
                            return bad("a listed candidate is regulating");
                        }
                    }
                    check_discards(g, &t_sequence.order)
                }
            },
        }
    }
}

/// The edges left out of `kept` must be exactly those with equal spans.
fn check_discards(g: &TubularGroup, kept: &[String]) -> Result<(), RegulatingError> {
    for e in g.edges() {
        let equal = equal_spans(&e.u, &e.v);
        if equal == kept.contains(&e.id) {
            return Err(RegulatingError::InvalidCertificate(format!(
                "edge {:?} was {} although its spans are {}equal",
                e.id,
                if equal { "kept" } else { "discarded" },
                if equal { "" } else { "not " }
            )));
        }
    }
    Ok(())
}

fn equal_spans(u: &crate::exactlat::QVec2, v: &crate::exactlat::QVec2) -> bool {
    matches!(parallel_ratio(u, v), Ok(Some(r)) if r.abs() == Rat::one())
}

fn t_sequence_of(g: &TubularGroup) -> Result<TSequence, RegulatingError> {
    let order: Vec<String> = g.edge_ids().map(str::to_string).collect();
    t_sequence(g, &order)
}

/// The sequence `t_i` for the edges in the given cyclic order.
pub fn t_sequence<S: AsRef<str>>(
    g: &TubularGroup,
    order: &[S],
) -> Result<TSequence, RegulatingError> {
    if !g.is_single_vertex() {
        return Err(RegulatingError::NotSingleVertex);
    }
    if order.len() < 2 {
        return Err(RegulatingError::TooFewEdges);
    }
    let edges = order
        .iter()
        .map(|id| {
            let id = id.as_ref();
            let e = g
                .edge(id)
                .ok_or_else(|| RegulatingError::UnknownEdge(id.to_string()))?;
            if e.u.det(&e.v).is_zero() {
                return Err(RegulatingError::RankDeficientEdge(id.to_string()));
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = edges.len();
    let t: Vec<Rat> = (0..n)
        .map(|i| {
            let next = edges[(i + 1) % n];
            Lattice2::span([next.u.clone(), next.v.clone()].iter())
                .minimal_scale(&edges[i].u)
                .expect("validated images are nonzero")
                .expect("rank 2 spans contain every direction")
        })
        .collect();
    let product = t.iter().fold(Rat::one(), |acc, x| &acc * x);
    Ok(TSequence {
        order: edges.iter().map(|e| e.id.clone()).collect(),
        t,
        product,
    })
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            let q = n / &d;
            if q != d {
                large.push(q);
            }
            small.push(d.clone());
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// All ordered `n`-tuples of positive integers with product `total`, in
/// lexicographic order.
pub fn ordered_factorizations(total: &BigInt, n: usize) -> Vec<Vec<BigInt>> {
    if n == 0 {
        return if total.is_one() { vec![vec![]] } else { vec![] };
    }
    if n == 1 {
        return vec![vec![total.clone()]];
    }
    let mut out = Vec::new();
    for d in divisors(total) {
        for mut rest in ordered_factorizations(&(total / &d), n - 1) {
            rest.insert(0, d.clone());
            out.push(rest);
        }
    }
    out
}

/// The normalized tuples `(m, m z_1/t_1, …, m z_1⋯z_{n−1}/t_1⋯t_{n−1})`,
/// one per ordered factorization `z` of `T`, without repeats. Empty when `T`
/// is not an integer.
pub fn parametric_candidates(ts: &TSequence) -> Vec<ETuple> {
    let Some(total) = ts.product.to_integer() else {
        return Vec::new();
    };
    let n = ts.t.len();
    let mut out: Vec<ETuple> = Vec::new();
    for z in ordered_factorizations(&total, n) {
        let mut ratios = vec![Rat::one()];
        for i in 0..n - 1 {
            let next = &ratios[i] * &(&Rat::from_int(z[i].clone()) / &ts.t[i]);
            ratios.push(next);
        }
        let m = Rat::from_int(lcm_denominators(ratios.iter()));
        let k = ETuple::new(
            ts.order
                .iter()
                .zip(&ratios)
                .map(|(e, r)| (e.clone(), (&m * r).to_integer().expect("cleared"))),
        )
        .expect("positive entries")
        .normalized();
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// Decides whether a single-vertex group has a regulating tuple.
pub fn single_vertex_decide(g: &TubularGroup) -> Result<SingleVertexVerdict, RegulatingError> {
    if !g.is_single_vertex() {
        return Err(RegulatingError::NotSingleVertex);
    }
    g.ensure_valid()?;
    for e in g.edges() {
        if let Some(ratio) = parallel_ratio(&e.u, &e.v).expect("valid images are nonzero") {
            if ratio.abs() != Rat::one() {
                return Ok(SingleVertexVerdict::NoTuple {
                    reason: NoTupleReason::CommensurableDistinct {
                        edge: e.id.clone(),
                        ratio,
                    },
                });
            }
        }
    }
    let (discarded, kept): (Vec<&str>, Vec<&str>) = g.edge_ids().partition(|id| {
        let e = g.edge(id).expect("own edge");
        equal_spans(&e.u, &e.v)
    });

    let base = if kept.len() <= 1 {
        ETuple::from_ints(kept.iter().map(|e| (*e, 1))).expect("positive")
    } else {
        let reduced = g.subtubular(&kept)?;
        let ts = t_sequence(&reduced, &kept)?;
        if !ts.product.is_integer() {
            return Ok(SingleVertexVerdict::NoTuple {
                reason: NoTupleReason::NonIntegralProduct { t_sequence: ts },
            });
        }
        let candidates = parametric_candidates(&ts);
        let mut found = None;
        for k in &candidates {
            if is_regulating(&reduced, k)?.is_some() {
                found = Some(k.clone());
                break;
            }
        }
        match found {
            Some(k) => k,
            None => {
                return Ok(SingleVertexVerdict::NoTuple {
                    reason: NoTupleReason::NoCandidate {
                        t_sequence: ts,
                        candidates,
                    },
                })
            }
        }
    };

    let k = extend_over_discarded(g, base, &kept, &discarded)?;
    let certificate = is_regulating(g, &k)?.ok_or_else(|| {
        RegulatingError::InvalidCertificate("extended tuple is not regulating".into())
    })?;
    Ok(SingleVertexVerdict::Regulating {
        certificate,
        discarded: discarded.iter().map(|s| s.to_string()).collect(),
    })
}

/// Reattaches edges whose two images span the same subgroup: scale the
/// tuple so the edge's minimal multiple inside the current sublattice gets
/// an integral entry, or use 1 when the edge meets it trivially.
fn extend_over_discarded(
    g: &TubularGroup,
    base: ETuple,
    kept: &[&str],
    discarded: &[&str],
) -> Result<ETuple, RegulatingError> {
    let mut k = base;
    let mut present: Vec<&str> = kept.to_vec();
    for &id in discarded {
        let current = if present.is_empty() {
            Lattice2::trivial()
        } else {
            let sub = g.subtubular(&present)?;
            vertex_sublattices(&sub, &k)?
                .into_values()
                .next()
                .expect("single vertex")
        };
        let e = g.edge(id).expect("own edge");
        k = match current.minimal_scale(&e.u).expect("nonzero image") {
            None => k.with(id, BigInt::one())?,
            Some(q) => {
                let m = q.denom().clone();
                k.scaled(&m)?.with(id, q.numer().clone())?
            }
        };
        present.push(id);
    }
    // Restore document order.
    let ordered = ETuple::new(g.edge_ids().map(|e| {
        (
            e.to_string(),
            k.get(e).expect("every edge assigned").clone(),
        )
    }))?;
    Ok(ordered.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::QVec2;
    use crate::model::snowflake;

    fn v(x: i64, y: i64) -> QVec2 {
        QVec2::from_ints(x, y)
    }

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn corrected_example() -> TubularGroup {
        TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("s", v(2, -4), v(-1, -2)), ("t", v(-6, 6), v(2, 2))],
        )
    }

    #[test]
    fn t_sequence_of_the_corrected_example() {
        let ts = t_sequence(&corrected_example(), &["s", "t"]).unwrap();
        assert_eq!(ts.t, vec![Rat::from_int(2), Rat::new(4, 3)]);
        assert_eq!(ts.product, Rat::new(8, 3));
    }

    #[test]
    fn corrected_example_has_no_tuple() {
        let g = corrected_example();
        let verdict = single_vertex_decide(&g).unwrap();
        match &verdict {
            SingleVertexVerdict::NoTuple {
                reason: NoTupleReason::NonIntegralProduct { t_sequence },
            } => assert_eq!(t_sequence.product, Rat::new(8, 3)),
            other => panic!("unexpected {other:?}"),
        }
        verdict.verify(&g).unwrap();
    }

    #[test]
    fn snowflake_t_sequence_is_ones() {
        for (p, q) in [(2, 1), (3, 2), (5, 3), (8, 8)] {
            let g = snowflake(p, q).unwrap();
            let ts = t_sequence(&g, &["s", "t"]).unwrap();
            assert_eq!(ts.t, vec![Rat::one(), Rat::one()]);
            assert_eq!(ts.product, Rat::one());
        }
    }

    #[test]
    fn duplicated_edge_t_sequence_is_ones() {
        let g = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("a", v(1, 0), v(0, 1)), ("b", v(1, 0), v(0, 1))],
        );
        let ts = t_sequence(&g, &["a", "b"]).unwrap();
        assert_eq!(ts.t, vec![Rat::one(), Rat::one()]);
    }

    #[test]
    fn t_sequence_preconditions() {
        let g = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("a", v(1, 0), v(2, 0)), ("b", v(1, 0), v(0, 1))],
        );
        assert_eq!(
            t_sequence(&g, &["a", "b"]),
            Err(RegulatingError::RankDeficientEdge("a".into()))
        );
        assert_eq!(t_sequence(&g, &["b"]), Err(RegulatingError::TooFewEdges));
    }

    #[test]
    fn snowflake_2_2_is_regulated_by_ones() {
        let g = snowflake(2, 2).unwrap();
        match single_vertex_decide(&g).unwrap() {
            SingleVertexVerdict::Regulating { certificate, .. } => {
                assert_eq!(certificate.tuple, ETuple::ones(&g));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn snowflake_5_3_has_no_tuple() {
        let g = snowflake(5, 3).unwrap();
        let verdict = single_vertex_decide(&g).unwrap();
        assert!(matches!(
            verdict,
            SingleVertexVerdict::NoTuple {
                reason: NoTupleReason::NoCandidate { .. }
            }
        ));
        verdict.verify(&g).unwrap();
    }

    #[test]
    fn commensurable_distinct_single_edge() {
        let g = TubularGroup::single_vertex(Lattice2::z2(), &[("s", v(1, 0), v(2, 0))]);
        let verdict = single_vertex_decide(&g).unwrap();
        assert_eq!(
            verdict,
            SingleVertexVerdict::NoTuple {
                reason: NoTupleReason::CommensurableDistinct {
                    edge: "s".into(),
                    ratio: Rat::from_int(2),
                }
            }
        );
        verdict.verify(&g).unwrap();
    }

    #[test]
    fn discarded_edges_are_reattached() {
        // b has equal spans; after the single survivor a, b is rescaled
        let g = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[
                ("a", v(2, 0), v(0, 2)),
                ("b", v(1, 0), v(-1, 0)),
                ("c", v(0, 3), v(0, 3)),
            ],
        );
        let verdict = single_vertex_decide(&g).unwrap();
        verdict.verify(&g).unwrap();
        match verdict {
            SingleVertexVerdict::Regulating {
                certificate,
                discarded,
            } => {
                assert_eq!(discarded, vec!["b".to_string(), "c".to_string()]);
                assert!(certificate.tuple.is_normalized());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn factorizations_are_complete_and_ordered() {
        let f = ordered_factorizations(&bi(12), 2);
        let pairs: Vec<(i64, i64)> = f
            .iter()
            .map(|z| (i64::try_from(&z[0]).unwrap(), i64::try_from(&z[1]).unwrap()))
            .collect();
        assert_eq!(
            pairs,
            vec![(1, 12), (2, 6), (3, 4), (4, 3), (6, 2), (12, 1)]
        );
        assert_eq!(ordered_factorizations(&bi(8), 3).len(), 10);
        assert_eq!(
            ordered_factorizations(&bi(1), 3),
            vec![vec![bi(1), bi(1), bi(1)]]
        );
    }

    #[test]
    fn candidates_follow_the_parametric_form() {
        let ts = TSequence {
            order: vec!["a".into(), "b".into()],
            t: vec![Rat::new(1, 2), Rat::from_int(4)],
            product: Rat::from_int(2),
        };
        // z = (1,2): k = (1, 2); z = (2,1): k = (1, 4)
        let c = parametric_candidates(&ts);
        assert_eq!(
            c,
            vec![
                ETuple::from_ints([("a", 1), ("b", 2)]).unwrap(),
                ETuple::from_ints([("a", 1), ("b", 4)]).unwrap(),
            ]
        );
    }

    #[test]
    fn multi_vertex_input_is_rejected() {
        use crate::model::{Edge, Vertex};
        let g = TubularGroup::checked(
            vec![
                Vertex {
                    id: "a".into(),
                    lattice: Lattice2::z2(),
                },
                Vertex {
                    id: "b".into(),
                    lattice: Lattice2::z2(),
                },
            ],
            vec![Edge::new("e", "a", "b", v(1, 0), v(0, 1))],
        )
        .unwrap();
        assert_eq!(
            single_vertex_decide(&g),
            Err(RegulatingError::NotSingleVertex)
        );
    }
}
