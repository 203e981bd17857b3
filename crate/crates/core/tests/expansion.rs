//! Expansion sequences, rigid isomorphisms and the decision procedure on
//! worked examples, with invariants recomputed independently.

use num_bigint::BigInt;
use tubular::exactlat::{Lattice2, Mat2, QVec2, Rat};
use tubular::expansion::{
    decide, detect_rigid_iso, edge_degrees, expand, length_bound, run_sequence, DecideOptions,
    Evidence, IsoSearch, RigidIso, SequenceStatus, Verdict, VerdictKind,
};
use tubular::model::{snowflake, Edge, TubularGroup, Vertex};

fn v(x: i64, y: i64) -> QVec2 {
    QVec2::from_ints(x, y)
}

fn non_recurrent() -> TubularGroup {
    TubularGroup::single_vertex(
        Lattice2::z2(),
        &[("s", v(1, 0), v(2, 0)), ("t", v(0, 1), v(1, 1))],
    )
}

/// `det(x, y) / covolume` for every pair of edge images, sorted; computed
/// from raw entries rather than through the lattice kernel.
fn normalized_intersections(g: &TubularGroup) -> Vec<Rat> {
    let l = &g.vertices()[0].lattice;
    let b = l.basis();
    let det = |x: &QVec2, y: &QVec2| &(&x.x * &y.y) - &(&x.y * &y.x);
    let covol = det(&b[0], &b[1]).abs();
    let images: Vec<&QVec2> = g.edges().iter().flat_map(|e| [&e.u, &e.v]).collect();
    let mut out = Vec::new();
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            out.push((&det(images[i], images[j]) / &covol).abs());
        }
    }
    out.sort();
    out
}

#[test]
fn non_recurrent_terms_are_pairwise_non_isomorphic() {
    let out = run_sequence(&non_recurrent(), 6).unwrap();
    assert_eq!(out.status, SequenceStatus::Exhausted { budget: 6 });
    let h = &out.history;
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            // the oracle sees a difference already in the intersection numbers
            assert_ne!(
                normalized_intersections(&h[i]),
                normalized_intersections(&h[j])
            );
            match detect_rigid_iso(&h[i], &h[j]) {
                IsoSearch::Refuted(cert) => assert_eq!(cert.invariant, "intersection_numbers"),
                other => panic!("terms {i} and {j}: {other:?}"),
            }
        }
    }
}

#[test]
fn non_recurrent_example_is_decided_through_a_subgroup() {
    let verdict = decide(&non_recurrent(), DecideOptions::default()).unwrap();
    assert_eq!(verdict.verdict, VerdictKind::NotRf);
    let (edges, outcome) = verdict.recurrence().unwrap();
    assert_eq!(edges, ["s".to_string()]);
    let SequenceStatus::Recurrent { witness, .. } = &outcome.status else {
        panic!("not recurrent");
    };
    let back = witness.inverse().unwrap();
    assert_eq!(
        back.vertices[0].matrix,
        Mat2::diag(Rat::from_int(2), Rat::one())
    );
    verdict.verify().unwrap();
}

#[test]
fn expansion_of_first_example_halves_the_x_axis() {
    let g = TubularGroup::single_vertex(
        Lattice2::z2(),
        &[("s", v(1, 0), v(2, 2)), ("t", v(0, 1), v(1, 1))],
    );
    let degrees = edge_degrees(&g).unwrap();
    assert_eq!(degrees.get("s").unwrap().d, BigInt::from(2));
    assert_eq!(degrees.get("t").unwrap().d, BigInt::from(1));
    let (h, trivial) = expand(&g).unwrap();
    assert!(!trivial);
    assert!(h.is_primitive());
    let half = QVec2::new(Rat::new(1, 2), Rat::zero());
    assert_eq!(h.edge("s").unwrap().u, half);
    assert_eq!(length_bound(&g, &h), Some(BigInt::from(3)));
    let (again, trivial) = expand(&h).unwrap();
    assert!(trivial);
    assert_eq!(again, h);
}

#[test]
fn rigid_iso_composes_with_scaling() {
    let g = snowflake(4, 3).unwrap();
    let h = g.scale(&Rat::new(-5, 7)).unwrap();
    let iso = detect_rigid_iso(&g, &h).found().unwrap();
    iso.verify(&g, &h).unwrap();
    iso.inverse().unwrap().verify(&h, &g).unwrap();
    assert_eq!(RigidIso::identity(&g).verify(&g, &g), Ok(()));
}

#[test]
fn two_vertex_group_with_a_recurrent_sequence() {
    // two copies of the second worked example's loop joined by an edge
    let z2 = Lattice2::z2();
    let g = TubularGroup::checked(
        vec![
            Vertex {
                id: "a".into(),
                lattice: z2.clone(),
            },
            Vertex {
                id: "b".into(),
                lattice: z2,
            },
        ],
        vec![
            Edge::new("s", "a", "a", v(1, 0), v(2, 4)),
            Edge::new("t", "a", "a", v(0, 1), v(1, 2)),
            Edge::new("j", "a", "b", v(1, 0), v(1, 0)),
        ],
    )
    .unwrap();
    let verdict = decide(&g, DecideOptions::default()).unwrap();
    assert_eq!(verdict.verdict, VerdictKind::NotRf);
    verdict.verify().unwrap();
    let text = serde_json::to_string(&verdict).unwrap();
    let back: Verdict = serde_json::from_str(&text).unwrap();
    assert_eq!(back, verdict);
    back.verify().unwrap();
}

#[test]
fn tampered_evidence_is_rejected() {
    let g = snowflake(5, 3).unwrap();
    let verdict = decide(&g, DecideOptions::default()).unwrap();
    assert_eq!(verdict.verdict, VerdictKind::NotRf);
    let mut forged = verdict.clone();
    forged.verdict = VerdictKind::Rf;
    assert!(forged.verify().is_err());

    let rf = decide(&snowflake(3, 1).unwrap(), DecideOptions::default()).unwrap();
    let mut swapped = rf.clone();
    swapped.group = g;
    assert!(swapped.verify().is_err());
    assert!(rf
        .evidence
        .iter()
        .any(|e| matches!(e, Evidence::RegulatingTuple { .. })));
}
