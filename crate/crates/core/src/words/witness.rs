//! Finite-quotient witnesses: for a nontrivial element `w` of a primitive
//! single-vertex group, a modulus `n` such that `w` survives in `G // nG`.
//!
//! Elliptic `w = (p, q)` (lattice coordinates) survives once
//! `n > max(|p|, |q|)`. For hyperbolic `w`, write each potential backtrack
//! `t^{±1}·h·t^{∓1}` of the reduced form in a basis `(g_e, c)` of the vertex
//! lattice, where `g_e` is the relevant edge image; with `h = a·g_e + q·c`
//! the backtrack stays reduced in the quotient once `n > |q|`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::quotient::{in_cyclic_mod, local_quotient};
use super::{britton_reduce, single_vertex, Letter, Word, WordError};
use crate::exactlat::{int_string, QVec2};
use crate::model::TubularGroup;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticCoords {
    #[serde(with = "int_string")]
    pub p: BigInt,
    #[serde(with = "int_string")]
    pub q: BigInt,
}

/// One potential backtrack `t_e^{exp}·h·t_e^{-exp}` of the reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacktrackRow {
    /// Index of the opening stable letter in the reduced word.
    pub position: usize,
    pub edge: String,
    pub exp: i8,
    pub h: QVec2,
    /// The edge image `h` would have to be a multiple of to pinch.
    pub generator: QVec2,
    pub complement: QVec2,
    /// Coordinate of `h` along `complement`.
    #[serde(with = "int_string")]
    pub q: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    #[serde(with = "int_string")]
    pub n: BigInt,
    pub reduced_word: Word,
    pub elliptic: Option<EllipticCoords>,
    pub backtrack_table: Vec<BacktrackRow>,
}

fn primitive_single_vertex(g: &TubularGroup) -> Result<(), WordError> {
    single_vertex(g)?;
    g.ensure_valid()?;
    if !g.is_primitive() {
        return Err(WordError::NotPrimitive);
    }
    Ok(())
}

fn backtracks(g: &TubularGroup, reduced: &Word) -> Vec<BacktrackRow> {
    let lattice = &g.vertices()[0].lattice;
    let covolume = lattice.det().expect("rank 2");
    let ls = reduced.letters();
    let mut rows = Vec::new();
    for i in 0..ls.len().saturating_sub(2) {
        let (Letter::Stable { edge, exp }, Letter::Vertex(h), Letter::Stable { edge: e2, exp: x2 }) =
            (&ls[i], &ls[i + 1], &ls[i + 2])
        else {
            continue;
        };
        if e2 != edge || *x2 != -exp {
            continue;
        }
        let e = g.edge(edge).expect("checked word");
        let generator = if *exp == 1 { e.u.clone() } else { e.v.clone() };
        let complement = lattice.complement(&generator).expect("primitive group");
        // det(g_e, h) = q·det(g_e, c) and det(g_e, c) is the covolume.
        let q = (&generator.det(h) / &covolume)
            .to_integer()
            .expect("h lies in the lattice");
        rows.push(BacktrackRow {
            position: i,
            edge: edge.clone(),
            exp: *exp,
            h: h.clone(),
            generator,
            complement,
            q,
        });
    }
    rows
}

/// A modulus `n` under which `w` maps nontrivially to `G // nG`, with the
/// data justifying it.
pub fn witness_modulus(g: &TubularGroup, w: &Word) -> Result<WitnessRecord, WordError> {
    primitive_single_vertex(g)?;
    let reduced = britton_reduce(g, w)?;
    if reduced.is_empty() {
        return Err(WordError::TrivialWord);
    }
    if let [Letter::Vertex(x)] = reduced.letters() {
        let (p, q) = g.vertices()[0].lattice.coords(x).expect("checked word");
        let n = p.abs().max(q.abs()) + 1;
        return Ok(WitnessRecord {
            n,
            reduced_word: reduced,
            elliptic: Some(EllipticCoords { p, q }),
            backtrack_table: Vec::new(),
        });
    }
    let table = backtracks(g, &reduced);
    let n = table
        .iter()
        .map(|r| r.q.abs() + 1)
        .max()
        .unwrap_or_else(BigInt::zero)
        .max(BigInt::from(2));
    Ok(WitnessRecord {
        n,
        reduced_word: reduced,
        elliptic: None,
        backtrack_table: table,
    })
}

/// Checks the nontriviality criterion for `w` in `G // nG` directly in the
/// finite quotient: the elliptic image is nonzero, and every potential
/// backtrack's middle element lies outside the image of the edge group.
pub fn check_modulus(g: &TubularGroup, w: &Word, n: &BigInt) -> Result<bool, WordError> {
    primitive_single_vertex(g)?;
    let quotient = local_quotient(g, n)?;
    let reduced = britton_reduce(g, w)?;
    if reduced.is_empty() {
        return Err(WordError::TrivialWord);
    }
    let lattice = &g.vertices()[0].lattice;
    let coords = |x: &QVec2| {
        let (a, b) = lattice.coords(x).expect("checked word");
        [a, b]
    };
    if let [Letter::Vertex(x)] = reduced.letters() {
        let zero = [BigInt::zero(), BigInt::zero()];
        return Ok(!in_cyclic_mod(&coords(x), &zero, n));
    }
    for row in backtracks(g, &reduced) {
        let fe = quotient
            .edges
            .iter()
            .find(|e| e.id == row.edge)
            .expect("same edges");
        let gen = if row.exp == 1 { &fe.minus } else { &fe.plus };
        if in_cyclic_mod(&coords(&row.h), gen, n) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::Lattice2;

    fn g() -> TubularGroup {
        TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("t", QVec2::from_ints(0, 1), QVec2::from_ints(1, 1))],
        )
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn elliptic_modulus() {
        let rec = witness_modulus(&g(), &w("(2,3)")).unwrap();
        assert_eq!(rec.n, BigInt::from(4));
        assert!(check_modulus(&g(), &w("(2,3)"), &rec.n).unwrap());
        assert!(!check_modulus(&g(), &w("(3,3)"), &BigInt::from(3)).unwrap());
    }

    #[test]
    fn hyperbolic_modulus() {
        let rec = witness_modulus(&g(), &w("t;(2,3);t^-1")).unwrap();
        assert_eq!(rec.n, BigInt::from(3));
        assert_eq!(rec.backtrack_table.len(), 1);
        assert_eq!(rec.backtrack_table[0].q.abs(), BigInt::from(2));
        assert!(check_modulus(&g(), &w("t;(2,3);t^-1"), &rec.n).unwrap());
        assert!(!check_modulus(&g(), &w("t;(2,3);t^-1"), &BigInt::from(2)).unwrap());
    }

    #[test]
    fn no_backtracks_needs_only_two() {
        let rec = witness_modulus(&g(), &w("t;(5,0)")).unwrap();
        assert_eq!(rec.n, BigInt::from(2));
        assert!(rec.backtrack_table.is_empty());
    }

    #[test]
    fn trivial_and_non_primitive_inputs() {
        assert_eq!(
            witness_modulus(&g(), &w("t;(0,1);t^-1;(-1,-1)")),
            Err(WordError::TrivialWord)
        );
        let np = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("t", QVec2::from_ints(0, 2), QVec2::from_ints(1, 1))],
        );
        assert_eq!(witness_modulus(&np, &w("t")), Err(WordError::NotPrimitive));
    }

    #[test]
    fn record_serializes() {
        let rec = witness_modulus(&g(), &w("t;(2,3);t^-1")).unwrap();
        let text = serde_json::to_string(&rec).unwrap();
        assert!(text.contains("\"n\":\"3\""));
        assert!(text.contains("\"reduced_word\":\"t;(2,3);t^-1\""));
        let back: WitnessRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
    }
}
