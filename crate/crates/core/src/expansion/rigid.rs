//! Rigid isomorphisms between tubular groups at the data level.
//!
//! A rigid isomorphism `A → B` is a graph isomorphism (edges may reverse
//! orientation) together with, for each vertex, a rational matrix carrying
//! the vertex lattice onto the target lattice and each edge image pair onto
//! `±` the target pair, swapped when the edge reverses.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::exactlat::{intersection_number, Lattice2, Mat2, QVec2, Rat};
use crate::model::{Side, TubularGroup};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexImage {
    pub source: String,
    pub target: String,
    pub matrix: Mat2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeImage {
    pub source: String,
    pub target: String,
    pub reversed: bool,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidIso {
    pub vertices: Vec<VertexImage>,
    pub edges: Vec<EdgeImage>,
}

impl RigidIso {
    pub fn identity(g: &TubularGroup) -> Self {
        RigidIso {
            vertices: g
                .vertices()
                .iter()
                .map(|v| VertexImage {
                    source: v.id.clone(),
                    target: v.id.clone(),
                    matrix: Mat2::identity(),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeImage {
                    source: e.id.clone(),
                    target: e.id.clone(),
                    reversed: false,
                    sign: 1,
                })
                .collect(),
        }
    }

    pub fn vertex_image(&self, source: &str) -> Option<&VertexImage> {
        self.vertices.iter().find(|v| v.source == source)
    }

    /// The common scalar when every vertex matrix is the same multiple of the
    /// identity.
    pub fn scalar(&self) -> Option<Rat> {
        let mut it = self.vertices.iter().map(|v| v.matrix.as_scalar());
        let first = it.next()??;
        it.all(|s| s.as_ref() == Some(&first)).then_some(first)
    }

    /// The inverse isomorphism `B → A`.
    pub fn inverse(&self) -> Option<RigidIso> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                Some(VertexImage {
                    source: v.target.clone(),
                    target: v.source.clone(),
                    matrix: v.matrix.inverse()?,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeImage {
                source: e.target.clone(),
                target: e.source.clone(),
                reversed: e.reversed,
                sign: e.sign,
            })
            .collect();
        Some(RigidIso { vertices, edges })
    }

    /// Checks every defining condition of a rigid isomorphism `a → b`.
    pub fn verify(&self, a: &TubularGroup, b: &TubularGroup) -> Result<(), String> {
        bijection(
            self.vertices
                .iter()
                .map(|v| (v.source.as_str(), v.target.as_str())),
            a.vertices().iter().map(|v| v.id.as_str()),
            b.vertices().iter().map(|v| v.id.as_str()),
            "vertex",
        )?;
        bijection(
            self.edges
                .iter()
                .map(|e| (e.source.as_str(), e.target.as_str())),
            a.edge_ids(),
            b.edge_ids(),
            "edge",
        )?;
        for vi in &self.vertices {
            if vi.matrix.det().is_zero() {
                return Err(format!("matrix at vertex {:?} is singular", vi.source));
            }
            let image = Lattice2::span(
                a.lattice(&vi.source)
                    .basis()
                    .iter()
                    .map(|x| vi.matrix.apply(x))
                    .collect::<Vec<_>>()
                    .iter(),
            );
            if &image != b.lattice(&vi.target) {
                return Err(format!(
                    "vertex {:?}: image lattice {:?} differs from {:?}",
                    vi.source,
                    image,
                    b.lattice(&vi.target)
                ));
            }
        }
        for ei in &self.edges {
            if ei.sign != 1 && ei.sign != -1 {
                return Err(format!("edge {:?} has sign {}", ei.source, ei.sign));
            }
            let e = a.edge(&ei.source).expect("checked bijection");
            let f = b.edge(&ei.target).expect("checked bijection");
            let (f_minus_side, f_plus_side) = if ei.reversed {
                (Side::Plus, Side::Minus)
            } else {
                (Side::Minus, Side::Plus)
            };
            let sign = Rat::from_int(ei.sign as i64);
            for (side, f_side) in [(Side::Minus, f_minus_side), (Side::Plus, f_plus_side)] {
                let vi = self
                    .vertex_image(e.endpoint(side))
                    .expect("checked vertex bijection");
                if vi.target != f.endpoint(f_side) {
                    return Err(format!(
                        "edge {:?} {side} endpoint maps to {:?}, expected {:?}",
                        e.id,
                        vi.target,
                        f.endpoint(f_side)
                    ));
                }
                let got = vi.matrix.apply(e.image(side));
                let want = f.image(f_side).scale(&sign);
                if got != want {
                    return Err(format!(
                        "edge {:?} {side} image maps to {got}, expected {want}",
                        e.id
                    ));
                }
            }
        }
        Ok(())
    }
}

fn bijection<'a>(
    pairs: impl Iterator<Item = (&'a str, &'a str)>,
    sources: impl Iterator<Item = &'a str>,
    targets: impl Iterator<Item = &'a str>,
    what: &str,
) -> Result<(), String> {
    let pairs: Vec<(&str, &str)> = pairs.collect();
    let src: HashSet<&str> = sources.collect();
    let tgt: HashSet<&str> = targets.collect();
    let mapped_src: HashSet<&str> = pairs.iter().map(|p| p.0).collect();
    let mapped_tgt: HashSet<&str> = pairs.iter().map(|p| p.1).collect();
    if pairs.len() != src.len() || mapped_src != src {
        return Err(format!(
            "{what} map is not defined exactly once on every source {what}"
        ));
    }
    if pairs.len() != tgt.len() || mapped_tgt != tgt {
        return Err(format!(
            "{what} map is not a bijection onto the target {what}s"
        ));
    }
    Ok(())
}

/// Quantities preserved by rigid isomorphisms, used as a cheap negative
/// filter. Intersection numbers are normalized by the vertex covolume, which
/// makes them invariant under any matrix carrying one lattice onto another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoInvariants {
    vertex_count: usize,
    edge_count: usize,
    /// Sorted `(loops, valence)` per vertex.
    degree_sequence: Vec<(usize, usize)>,
    /// Per vertex: sorted normalized pairwise intersection numbers of the
    /// incident edge images; the outer list is sorted too.
    intersections: Vec<Vec<Rat>>,
    /// Sorted unordered pairs of attaching-map torsion degrees.
    torsion: Vec<(num_bigint::BigInt, num_bigint::BigInt)>,
}

impl IsoInvariants {
    pub fn of(g: &TubularGroup) -> Self {
        let incident = |id: &str| -> Vec<&QVec2> {
            g.edges()
                .iter()
                .flat_map(|e| {
                    [Side::Minus, Side::Plus]
                        .into_iter()
                        .filter(move |s| e.endpoint(*s) == id)
                        .map(move |s| e.image(s))
                })
                .collect()
        };
        let mut degree_sequence: Vec<(usize, usize)> = g
            .vertices()
            .iter()
            .map(|v| {
                let loops = g
                    .edges()
                    .iter()
                    .filter(|e| e.minus == v.id && e.plus == v.id)
                    .count();
                (loops, incident(&v.id).len())
            })
            .collect();
        degree_sequence.sort();
        let mut intersections: Vec<Vec<Rat>> = g
            .vertices()
            .iter()
            .map(|v| {
                let covol = v.lattice.det().expect("vertex lattices have rank 2");
                let images = incident(&v.id);
                let mut out = Vec::new();
                for i in 0..images.len() {
                    for j in (i + 1)..images.len() {
                        out.push(&intersection_number(images[i], images[j]) / &covol);
                    }
                }
                out.sort();
                out
            })
            .collect();
        intersections.sort();
        let mut torsion: Vec<_> = g
            .edges()
            .iter()
            .map(|e| {
                let d = |s: Side| {
                    g.lattice(e.endpoint(s))
                        .torsion_degree(e.image(s))
                        .expect("valid group")
                };
                let (a, b) = (d(Side::Minus), d(Side::Plus));
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        torsion.sort();
        IsoInvariants {
            vertex_count: g.vertices().len(),
            edge_count: g.edges().len(),
            degree_sequence,
            intersections,
            torsion,
        }
    }

    /// The first invariant on which `self` and `other` differ.
    pub fn first_difference(&self, other: &IsoInvariants) -> Option<NonIsoCertificate> {
        let cert = |name: &str, a: String, b: String| NonIsoCertificate {
            invariant: name.to_string(),
            source_value: a,
            target_value: b,
        };
        if (self.vertex_count, self.edge_count) != (other.vertex_count, other.edge_count) {
            return Some(cert(
                "graph_size",
                format!("{} vertices, {} edges", self.vertex_count, self.edge_count),
                format!(
                    "{} vertices, {} edges",
                    other.vertex_count, other.edge_count
                ),
            ));
        }
        if self.degree_sequence != other.degree_sequence {
            return Some(cert(
                "degree_sequence",
                format!("{:?}", self.degree_sequence),
                format!("{:?}", other.degree_sequence),
            ));
        }
        if self.intersections != other.intersections {
            return Some(cert(
                "intersection_numbers",
                format!("{:?}", self.intersections),
                format!("{:?}", other.intersections),
            ));
        }
        if self.torsion != other.torsion {
            let show = |t: &[(num_bigint::BigInt, num_bigint::BigInt)]| {
                t.iter()
                    .map(|(a, b)| format!("({a},{b})"))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            return Some(cert(
                "torsion_degrees",
                show(&self.torsion),
                show(&other.torsion),
            ));
        }
        None
    }
}

/// A rigid-isomorphism invariant that differs between two groups, proving
/// they are not rigidly isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonIsoCertificate {
    pub invariant: String,
    pub source_value: String,
    pub target_value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoSearch {
    Found(RigidIso),
    /// Proved non-isomorphic by an invariant.
    Refuted(NonIsoCertificate),
    /// The search found nothing; for multi-vertex groups this is not a proof.
    NotFound,
}

impl IsoSearch {
    pub fn found(self) -> Option<RigidIso> {
        match self {
            IsoSearch::Found(r) => Some(r),
            _ => None,
        }
    }
}

/// Searches for a rigid isomorphism `a → b`. Exact for single-vertex groups;
/// for several vertices only per-vertex scalar matrices are tried.
pub fn detect_rigid_iso(a: &TubularGroup, b: &TubularGroup) -> IsoSearch {
    detect_with_invariants(a, &IsoInvariants::of(a), b, &IsoInvariants::of(b))
}

pub(crate) fn detect_with_invariants(
    a: &TubularGroup,
    inv_a: &IsoInvariants,
    b: &TubularGroup,
    inv_b: &IsoInvariants,
) -> IsoSearch {
    if let Some(cert) = inv_a.first_difference(inv_b) {
        return IsoSearch::Refuted(cert);
    }
    if a == b {
        return IsoSearch::Found(RigidIso::identity(a));
    }
    let found = if a.is_single_vertex() {
        search_single_vertex(a, b)
    } else {
        search_scalar_multi_vertex(a, b)
    };
    match found {
        Some(iso) => {
            debug_assert!(iso.verify(a, b).is_ok());
            IsoSearch::Found(iso)
        }
        None if a.is_single_vertex() => IsoSearch::Refuted(NonIsoCertificate {
            invariant: "exhaustive_search".into(),
            source_value: "no candidate matrix carries the edge images and lattice".into(),
            target_value: String::new(),
        }),
        None => IsoSearch::NotFound,
    }
}

/// Positive rational square root, if it exists.
fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if !r.is_positive() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rat::new(n, d))
}

fn images(g: &TubularGroup) -> Vec<QVec2> {
    g.edges()
        .iter()
        .flat_map(|e| [e.u.clone(), e.v.clone()])
        .collect()
}

fn search_single_vertex(a: &TubularGroup, b: &TubularGroup) -> Option<RigidIso> {
    let va = &a.vertices()[0];
    let vb = &b.vertices()[0];
    let vertex_map = |m: &Mat2| vec![(va.id.clone(), vb.id.clone(), m.clone())];
    let try_matrix = |m: &Mat2| -> Option<RigidIso> {
        if m.det().is_zero() || !maps_lattice(m, &va.lattice, &vb.lattice) {
            return None;
        }
        match_edges(a, b, &vertex_map(m))
    };

    // Scalar candidates first, so pure rescalings are reported as such.
    let ratio = &vb.lattice.det()? / &va.lattice.det()?;
    if let Some(s) = rational_sqrt(&ratio) {
        for m in [Mat2::scalar(s.clone()), Mat2::scalar(-s)] {
            if let Some(iso) = try_matrix(&m) {
                return Some(iso);
            }
        }
    }

    let src = images(a);
    let x = src.first().cloned()?;
    let y = src.iter().find(|y| !x.det(y).is_zero()).cloned();
    let mut targets = Vec::new();
    for t in images(b) {
        targets.push(t.clone());
        targets.push(-t);
    }
    match y {
        Some(y) => {
            let inv = Mat2::from_columns(&x, &y).inverse()?;
            for xt in &targets {
                for yt in &targets {
                    let m = Mat2::from_columns(xt, yt).mul(&inv);
                    if let Some(iso) = try_matrix(&m) {
                        return Some(iso);
                    }
                }
            }
            None
        }
        None => {
            // All images are parallel. Any matrix sending the primitive root
            // of x to the primitive root of its target, and a completing basis
            // vector to a completing basis vector, is a candidate; the edge
            // conditions only see the direction of x.
            let dx = va.lattice.torsion_degree(&x).ok()?;
            let x0 = x.scale(&Rat::new(1, dx.clone()));
            let cx = va.lattice.complement(&x0).ok()?;
            let inv = Mat2::from_columns(&x0, &cx).inverse()?;
            for xt in &targets {
                let x0t = xt.scale(&Rat::new(1, dx.clone()));
                let Ok(cxt) = vb.lattice.complement(&x0t) else {
                    continue;
                };
                let m = Mat2::from_columns(&x0t, &cxt).mul(&inv);
                if let Some(iso) = try_matrix(&m) {
                    return Some(iso);
                }
            }
            None
        }
    }
}

fn maps_lattice(m: &Mat2, from: &Lattice2, to: &Lattice2) -> bool {
    let image: Vec<QVec2> = from.basis().iter().map(|x| m.apply(x)).collect();
    Lattice2::span(image.iter()) == *to
}

/// Backtracking search for an edge bijection compatible with the given
/// vertex map and matrices.
fn match_edges(
    a: &TubularGroup,
    b: &TubularGroup,
    vertex_map: &[(String, String, Mat2)],
) -> Option<RigidIso> {
    let lookup = |id: &str| {
        vertex_map
            .iter()
            .find(|(s, _, _)| s == id)
            .expect("total vertex map")
    };
    // Candidate (target, reversed, sign) per source edge.
    let mut options: Vec<Vec<(usize, bool, i8)>> = Vec::new();
    for e in a.edges() {
        let (_, tm, mm) = lookup(&e.minus);
        let (_, tp, mp) = lookup(&e.plus);
        let mu = mm.apply(&e.u);
        let mv = mp.apply(&e.v);
        let mut opts = Vec::new();
        for (fi, f) in b.edges().iter().enumerate() {
            for reversed in [false, true] {
                let (fm, fp, fu, fv) = if reversed {
                    (&f.plus, &f.minus, &f.v, &f.u)
                } else {
                    (&f.minus, &f.plus, &f.u, &f.v)
                };
                if fm != tm || fp != tp {
                    continue;
                }
                for sign in [1i8, -1] {
                    let s = Rat::from_int(sign as i64);
                    if mu == fu.scale(&s) && mv == fv.scale(&s) {
                        opts.push((fi, reversed, sign));
                    }
                }
            }
        }
        if opts.is_empty() {
            return None;
        }
        options.push(opts);
    }
    let mut used = vec![false; b.edges().len()];
    let mut chosen = Vec::with_capacity(options.len());
    if !assign(&options, 0, &mut used, &mut chosen) {
        return None;
    }
    Some(RigidIso {
        vertices: vertex_map
            .iter()
            .map(|(s, t, m)| VertexImage {
                source: s.clone(),
                target: t.clone(),
                matrix: m.clone(),
            })
            .collect(),
        edges: a
            .edges()
            .iter()
            .zip(chosen)
            .map(|(e, (fi, reversed, sign))| EdgeImage {
                source: e.id.clone(),
                target: b.edges()[fi].id.clone(),
                reversed,
                sign,
            })
            .collect(),
    })
}

fn assign(
    options: &[Vec<(usize, bool, i8)>],
    i: usize,
    used: &mut [bool],
    chosen: &mut Vec<(usize, bool, i8)>,
) -> bool {
    if i == options.len() {
        return true;
    }
    for &opt in &options[i] {
        if used[opt.0] {
            continue;
        }
        used[opt.0] = true;
        chosen.push(opt);
        if assign(options, i + 1, used, chosen) {
            return true;
        }
        chosen.pop();
        used[opt.0] = false;
    }
    false
}

const MAX_VERTEX_MAPS: usize = 50_000;

/// Heuristic multi-vertex search: vertex bijections respecting valence, with
/// a signed scalar matrix at every vertex.
fn search_scalar_multi_vertex(a: &TubularGroup, b: &TubularGroup) -> Option<RigidIso> {
    let n = a.vertices().len();
    let valence = |g: &TubularGroup, id: &str| {
        g.edges()
            .iter()
            .map(|e| (e.minus == id) as usize + (e.plus == id) as usize)
            .sum::<usize>()
    };
    // Candidate targets and scalar per source vertex.
    let mut cands: Vec<Vec<(usize, Rat)>> = Vec::with_capacity(n);
    for va in a.vertices() {
        let mut c = Vec::new();
        for (j, vb) in b.vertices().iter().enumerate() {
            if valence(a, &va.id) != valence(b, &vb.id) {
                continue;
            }
            let ratio = &vb.lattice.det()? / &va.lattice.det()?;
            if let Some(s) = rational_sqrt(&ratio) {
                if va.lattice.scale(&s) == vb.lattice {
                    c.push((j, s));
                }
            }
        }
        if c.is_empty() {
            return None;
        }
        cands.push(c);
    }
    let mut budget = MAX_VERTEX_MAPS;
    let mut used = vec![false; n];
    let mut chosen: Vec<(usize, Rat)> = Vec::new();
    vertex_maps(a, b, &cands, &mut used, &mut chosen, &mut budget)
}

fn vertex_maps(
    a: &TubularGroup,
    b: &TubularGroup,
    cands: &[Vec<(usize, Rat)>],
    used: &mut [bool],
    chosen: &mut Vec<(usize, Rat)>,
    budget: &mut usize,
) -> Option<RigidIso> {
    let i = chosen.len();
    if i == cands.len() {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let n = cands.len();
        for signs in 0u32..(1 << n) {
            let vm: Vec<(String, String, Mat2)> = chosen
                .iter()
                .enumerate()
                .map(|(k, (j, s))| {
                    let s = if signs & (1 << k) != 0 { -s } else { s.clone() };
                    (
                        a.vertices()[k].id.clone(),
                        b.vertices()[*j].id.clone(),
                        Mat2::scalar(s),
                    )
                })
                .collect();
            if let Some(iso) = match_edges(a, b, &vm) {
                return Some(iso);
            }
        }
        return None;
    }
    for (j, s) in &cands[i] {
        if used[*j] {
            continue;
        }
        used[*j] = true;
        chosen.push((*j, s.clone()));
        if let Some(iso) = vertex_maps(a, b, cands, used, chosen, budget) {
            return Some(iso);
        }
        chosen.pop();
        used[*j] = false;
        if *budget == 0 {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{snowflake, Edge, Vertex};

    fn v(x: i64, y: i64) -> QVec2 {
        QVec2::from_ints(x, y)
    }

    #[test]
    fn identity_verifies() {
        let g = snowflake(5, 3).unwrap();
        RigidIso::identity(&g).verify(&g, &g).unwrap();
        assert_eq!(
            detect_rigid_iso(&g, &g).found(),
            Some(RigidIso::identity(&g))
        );
    }

    #[test]
    fn finds_a_shear() {
        // conjugate every image by a unimodular shear
        let g = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("s", v(1, 0), v(0, 3)), ("t", v(1, 1), v(2, 1))],
        );
        let shear = Mat2::new(1.into(), 2.into(), 0.into(), 1.into());
        let h = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[
                ("s", shear.apply(&v(0, 3)), shear.apply(&v(1, 0))).clone(),
                ("t", shear.apply(&v(1, 1)), shear.apply(&v(2, 1))),
            ],
        );
        // edge s is reversed in h: its u is the image of g's v
        let h = TubularGroup::new(
            h.vertices().to_vec(),
            vec![
                Edge::new("x", "v", "v", shear.apply(&v(0, 3)), shear.apply(&v(1, 0))),
                Edge::new("y", "v", "v", shear.apply(&v(1, 1)), shear.apply(&v(2, 1))),
            ],
        );
        let iso = detect_rigid_iso(&g, &h).found().expect("isomorphic");
        iso.verify(&g, &h).unwrap();
        assert!(iso
            .edges
            .iter()
            .any(|e| e.source == "s" && e.target == "x" && e.reversed));
        let back = iso.inverse().unwrap();
        back.verify(&h, &g).unwrap();
    }

    #[test]
    fn verify_rejects_broken_witnesses() {
        let g = snowflake(3, 2).unwrap();
        let mut iso = RigidIso::identity(&g);
        iso.vertices[0].matrix = Mat2::scalar(Rat::from_int(2));
        assert!(iso.verify(&g, &g).is_err());
        let mut iso = RigidIso::identity(&g);
        iso.edges[0].sign = -1;
        assert!(iso.verify(&g, &g).is_err());
        let mut iso = RigidIso::identity(&g);
        iso.edges.pop();
        assert!(iso.verify(&g, &g).is_err());
    }

    #[test]
    fn intersection_invariant_separates() {
        let g = TubularGroup::single_vertex(Lattice2::z2(), &[("s", v(1, 0), v(0, 1))]);
        let h = TubularGroup::single_vertex(Lattice2::z2(), &[("s", v(1, 0), v(1, 2))]);
        match detect_rigid_iso(&g, &h) {
            IsoSearch::Refuted(c) => assert_eq!(c.invariant, "intersection_numbers"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multi_vertex_scalar_search() {
        let z = Lattice2::z2();
        let half = Rat::new(1, 2);
        let mk = |l: &Lattice2, s: &Rat| {
            TubularGroup::checked(
                vec![
                    Vertex {
                        id: "a".into(),
                        lattice: l.clone(),
                    },
                    Vertex {
                        id: "b".into(),
                        lattice: l.clone(),
                    },
                ],
                vec![
                    Edge::new("e", "a", "b", v(1, 0).scale(s), v(0, 1).scale(s)),
                    Edge::new("f", "b", "b", v(1, 1).scale(s), v(1, -1).scale(s)),
                ],
            )
            .unwrap()
        };
        let g = mk(&z, &Rat::one());
        let h = mk(&z.scale(&half), &half);
        let iso = detect_rigid_iso(&g, &h).found().unwrap();
        iso.verify(&g, &h).unwrap();
        assert_eq!(iso.scalar(), Some(half));
    }
}
