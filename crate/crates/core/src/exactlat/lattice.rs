use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rat::{lcm_denominators, Rat};
use super::vec2::QVec2;
use super::LatticeError;

type IntRow = [BigInt; 2];

/// Extended gcd with a nonnegative gcd: returns `(g, x, y)` with `a*x + b*y = g`.
pub(crate) fn egcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Row-style Hermite normal form of an integer n×2 matrix, returning only the
/// nonzero rows in the canonical shape used by [`Lattice2`].
fn integer_hnf(rows: impl IntoIterator<Item = IntRow>) -> Vec<IntRow> {
    let mut pivot: Option<IntRow> = None;
    let mut col_gcd = BigInt::zero();
    for r in rows {
        if r[0].is_zero() {
            col_gcd = col_gcd.gcd(&r[1]);
            continue;
        }
        match pivot.take() {
            None => pivot = Some(r),
            Some(p) => {
                let (g, x, y) = egcd(&p[0], &r[0]);
                let pa = &p[0] / &g;
                let ra = &r[0] / &g;
                let new_p = [&x * &p[0] + &y * &r[0], &x * &p[1] + &y * &r[1]];
                // Unimodular partner row; its first entry is zero.
                let rest = &pa * &r[1] - &ra * &p[1];
                col_gcd = col_gcd.gcd(&rest);
                pivot = Some(new_p);
            }
        }
    }
    match pivot {
        Some(mut p) => {
            if p[0].is_negative() {
                p = [-&p[0], -&p[1]];
            }
            if col_gcd.is_zero() {
                vec![p]
            } else {
                let a2 = p[1].mod_floor(&col_gcd);
                vec![[p[0].clone(), a2], [BigInt::zero(), col_gcd]]
            }
        }
        None if col_gcd.is_zero() => vec![],
        None => vec![[BigInt::zero(), col_gcd]],
    }
}

/// A finitely generated subgroup of Q² (rank 0, 1 or 2) stored in a unique
/// canonical basis.
///
/// Rank 2 bases have the shape `{(a1, a2), (0, a3)}` with `a1 > 0`, `a3 > 0`
/// and `0 <= a2 < a3`. A rank 1 basis is the generator whose first nonzero
/// coordinate is positive. Two values are equal as subgroups iff they compare
/// equal.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<QVec2>", into = "Vec<QVec2>")]
pub struct Lattice2 {
    basis: Vec<QVec2>,
}

impl Lattice2 {
    /// The subgroup generated by `gens`, in canonical form. Zero vectors are
    /// ignored and the empty set generates the trivial group.
    pub fn span<'a>(gens: impl IntoIterator<Item = &'a QVec2>) -> Self {
        let gens: Vec<&QVec2> = gens.into_iter().filter(|v| !v.is_zero()).collect();
        let scale = lcm_denominators(gens.iter().flat_map(|v| [&v.x, &v.y]));
        let scale_r = Rat::from_int(scale.clone());
        let rows = gens.iter().map(|v| {
            let w = v.scale(&scale_r);
            [
                w.x.to_integer().expect("cleared denominator"),
                w.y.to_integer().expect("cleared denominator"),
            ]
        });
        let basis = integer_hnf(rows)
            .into_iter()
            .map(|[a, b]| QVec2::new(Rat::new(a, scale.clone()), Rat::new(b, scale.clone())))
            .collect();
        Lattice2 { basis }
    }

    pub fn trivial() -> Self {
        Lattice2 { basis: vec![] }
    }

    /// The standard lattice Z².
    pub fn z2() -> Self {
        Lattice2 {
            basis: vec![QVec2::from_ints(1, 0), QVec2::from_ints(0, 1)],
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVec2] {
        &self.basis
    }

    /// Covolume of a rank 2 lattice; `None` for lower rank.
    pub fn det(&self) -> Option<Rat> {
        match self.basis.as_slice() {
            [b1, b2] => Some(b1.det(b2).abs()),
            _ => None,
        }
    }

    pub fn scale(&self, alpha: &Rat) -> Lattice2 {
        Lattice2::span(
            self.basis
                .iter()
                .map(|b| b.scale(alpha))
                .collect::<Vec<_>>()
                .iter(),
        )
    }

    /// The integer combination `c1*b1 + c2*b2` of the basis (missing basis
    /// vectors count as zero).
    pub fn point(&self, c1: &BigInt, c2: &BigInt) -> QVec2 {
        let mut out = QVec2::zero();
        for (b, c) in self.basis.iter().zip([c1, c2]) {
            out = &out + &b.scale_int(c);
        }
        out
    }

    /// Coordinates of `v` over Q in this basis, when `v` lies in the rational
    /// span. Rank 1 coordinates are padded with zero.
    pub fn rational_coords(&self, v: &QVec2) -> Option<(Rat, Rat)> {
        match self.basis.as_slice() {
            [] => v.is_zero().then(|| (Rat::zero(), Rat::zero())),
            [b] => {
                let c = if !b.x.is_zero() {
                    &v.x / &b.x
                } else {
                    &v.y / &b.y
                };
                (b.scale(&c) == *v).then_some((c, Rat::zero()))
            }
            [b1, b2] => {
                let c1 = &v.x / &b1.x;
                let c2 = (&v.y - &c1 * &b1.y) / &b2.y;
                Some((c1, c2))
            }
            _ => unreachable!("rank is at most 2"),
        }
    }

    /// Integer coordinates of `v` in this basis, or `None` if `v` is not in
    /// the lattice.
    pub fn coords(&self, v: &QVec2) -> Option<(BigInt, BigInt)> {
        let (c1, c2) = self.rational_coords(v)?;
        Some((c1.to_integer()?, c2.to_integer()?))
    }

    pub fn contains(&self, v: &QVec2) -> bool {
        self.coords(v).is_some()
    }

    pub fn is_sublattice_of(&self, sup: &Lattice2) -> bool {
        if let (Some(d_sub), Some(d_sup)) = (self.det(), sup.det()) {
            if !(&d_sub / &d_sup).is_integer() {
                return false;
            }
        }
        self.basis.iter().all(|b| sup.contains(b))
    }

    /// Whether `v` is not a proper power in this lattice.
    pub fn is_primitive_in(&self, v: &QVec2) -> Result<bool, LatticeError> {
        Ok(self.torsion_degree(v)?.is_one())
    }

    /// The largest `d` with `v/d` in the lattice: the order of the torsion of
    /// the quotient by `<v>`.
    pub fn torsion_degree(&self, v: &QVec2) -> Result<BigInt, LatticeError> {
        if v.is_zero() {
            return Err(LatticeError::ZeroVector);
        }
        let (c1, c2) = self.coords(v).ok_or(LatticeError::NotInLattice)?;
        Ok(c1.gcd(&c2))
    }

    /// The smallest positive `t` with `t*u` in the lattice, or `None` if `u`
    /// is outside its rational span.
    pub fn minimal_scale(&self, u: &QVec2) -> Result<Option<Rat>, LatticeError> {
        if u.is_zero() {
            return Err(LatticeError::ZeroVector);
        }
        let Some((c1, c2)) = self.rational_coords(u) else {
            return Ok(None);
        };
        let denom = lcm_denominators([&c1, &c2]);
        let m1 = (&c1 * &Rat::from_int(denom.clone()))
            .to_integer()
            .expect("cleared");
        let m2 = (&c2 * &Rat::from_int(denom.clone()))
            .to_integer()
            .expect("cleared");
        Ok(Some(Rat::new(denom, m1.gcd(&m2))))
    }

    /// A vector `c` of this rank 2 lattice such that `{w, c}` is a basis with
    /// positive coordinate determinant, reduced against `w`. `w` must be
    /// primitive in the lattice.
    pub fn complement(&self, w: &QVec2) -> Result<QVec2, LatticeError> {
        if self.rank() != 2 {
            return Err(LatticeError::RankDeficient);
        }
        if !self.is_primitive_in(w)? {
            return Err(LatticeError::NotPrimitive);
        }
        let (a, b) = self.coords(w).expect("checked membership");
        // a*y - b*x = 1
        let (g, s, t) = egcd(&a, &b);
        debug_assert!(g.is_one());
        let (mut x, mut y) = (-t, s);
        // Shift by multiples of (a, b) toward the shortest representative in
        // coordinate space.
        let norm = &a * &a + &b * &b;
        let dot = &x * &a + &y * &b;
        let shift = Rat::new(dot, norm);
        let j = (&shift + &Rat::new(1, 2)).floor();
        x -= &j * &a;
        y -= &j * &b;
        Ok(self.point(&x, &y))
    }
}

impl From<Vec<QVec2>> for Lattice2 {
    fn from(gens: Vec<QVec2>) -> Self {
        Lattice2::span(gens.iter())
    }
}

impl From<Lattice2> for Vec<QVec2> {
    fn from(l: Lattice2) -> Self {
        l.basis
    }
}

impl fmt::Debug for Lattice2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ">")
    }
}

/// Canonical form of the subgroup generated by `gens`.
pub fn hnf(gens: &[QVec2]) -> Lattice2 {
    Lattice2::span(gens.iter())
}

/// `q` with `v = q*u` when the two vectors are parallel.
pub fn parallel_ratio(u: &QVec2, v: &QVec2) -> Result<Option<Rat>, LatticeError> {
    if u.is_zero() || v.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    if !u.det(v).is_zero() {
        return Ok(None);
    }
    let q = if !u.x.is_zero() {
        &v.x / &u.x
    } else {
        &v.y / &u.y
    };
    Ok(Some(q))
}

/// Unsigned intersection number `|det(u, v)|`.
pub fn intersection_number(u: &QVec2, v: &QVec2) -> Rat {
    u.det(v).abs()
}

/// Invariant factors `(d1, d2)`, `d1 | d2`, of the quotient `sup/sub`. A zero
/// entry stands for an infinite cyclic factor.
pub fn smith_quotient(sup: &Lattice2, sub: &Lattice2) -> Result<(BigInt, BigInt), LatticeError> {
    if !sub.is_sublattice_of(sup) {
        return Err(LatticeError::NotSublattice);
    }
    let coords: Vec<(BigInt, BigInt)> = sub
        .basis()
        .iter()
        .map(|b| sup.coords(b).expect("checked sublattice"))
        .collect();
    let zero = BigInt::zero;
    let one = BigInt::one;
    Ok(match (sup.rank(), coords.as_slice()) {
        (0, _) => (one(), one()),
        (1, []) => (one(), zero()),
        (1, [(c, _)]) => (one(), c.abs()),
        (2, []) => (zero(), zero()),
        (2, [(a, b)]) => (a.gcd(b), zero()),
        (2, [(a, b), (c, d)]) => {
            let d1 = a.gcd(b).gcd(c).gcd(d);
            let det = (a * d - b * c).abs();
            let d2 = &det / &d1;
            (d1, d2)
        }
        _ => unreachable!("sublattice rank cannot exceed the lattice rank"),
    })
}

/// Smith form of an integer 2×2 matrix: `u * a * v = diag(d1, d2)` with
/// unimodular `u`, `v`, `d1 | d2` and `d1, d2 >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smith2 {
    pub d: [BigInt; 2],
    pub u: [[BigInt; 2]; 2],
    pub v: [[BigInt; 2]; 2],
}

pub fn smith_2x2(a: &[[BigInt; 2]; 2]) -> Smith2 {
    let one = BigInt::one;
    let zero = BigInt::zero;
    let mut m = a.clone();
    let mut u = [[one(), zero()], [zero(), one()]];
    let mut v = [[one(), zero()], [zero(), one()]];

    let swap_rows = |m: &mut [[BigInt; 2]; 2], u: &mut [[BigInt; 2]; 2]| {
        m.swap(0, 1);
        u.swap(0, 1);
    };
    let swap_cols = |m: &mut [[BigInt; 2]; 2], v: &mut [[BigInt; 2]; 2]| {
        for r in m.iter_mut().chain(v.iter_mut()) {
            r.swap(0, 1);
        }
    };

    loop {
        // Bring the smallest nonzero entry to the corner.
        let mut best: Option<(usize, usize)> = None;
        for i in 0..2 {
            for j in 0..2 {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        if bi == 1 {
            swap_rows(&mut m, &mut u);
        }
        if bj == 1 {
            swap_cols(&mut m, &mut v);
        }
        let p = m[0][0].clone();
        // row1 -= q * row0
        let q = m[1][0].div_floor(&p);
        for j in 0..2 {
            let t = &q * &m[0][j];
            m[1][j] -= t;
            let t = &q * &u[0][j];
            u[1][j] -= t;
        }
        // col1 -= q * col0
        let q = m[0][1].div_floor(&p);
        for i in 0..2 {
            let t = &q * &m[i][0];
            m[i][1] -= t;
            let t = &q * &v[i][0];
            v[i][1] -= t;
        }
        if m[1][0].is_zero() && m[0][1].is_zero() {
            if m[1][1].is_multiple_of(&m[0][0]) {
                break;
            }
            // row0 += row1 and continue reducing.
            for j in 0..2 {
                let t = m[1][j].clone();
                m[0][j] += t;
                let t = u[1][j].clone();
                u[0][j] += t;
            }
        }
    }
    for i in 0..2 {
        if m[i][i].is_negative() {
            for j in 0..2 {
                m[i][j] = -&m[i][j];
                u[i][j] = -&u[i][j];
            }
        }
    }
    Smith2 {
        d: [m[0][0].clone(), m[1][1].clone()],
        u,
        v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: i64, y: i64) -> QVec2 {
        QVec2::from_ints(x, y)
    }

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn empty_and_zero_generators_give_rank_zero() {
        assert_eq!(hnf(&[]).rank(), 0);
        assert_eq!(hnf(&[v(0, 0), v(0, 0)]).rank(), 0);
    }

    #[test]
    fn rank_one_canonical_generator() {
        let l = hnf(&[v(-2, -4), v(3, 6)]);
        assert_eq!(l.basis(), &[v(1, 2)]);
        let l = hnf(&[v(0, -6), v(0, 4)]);
        assert_eq!(l.basis(), &[v(0, 2)]);
    }

    #[test]
    fn coords_on_rank_one_pad_with_zero() {
        let l = hnf(&[v(2, 2)]);
        assert_eq!(l.coords(&v(4, 4)), Some((BigInt::from(2), BigInt::zero())));
        assert_eq!(l.coords(&v(1, 1)), None);
        assert_eq!(l.coords(&v(2, 0)), None);
    }

    #[test]
    fn primitivity_errors() {
        let z2 = Lattice2::z2();
        assert_eq!(z2.is_primitive_in(&v(0, 0)), Err(LatticeError::ZeroVector));
        let half = QVec2::new(r(1, 2), Rat::zero());
        assert_eq!(z2.is_primitive_in(&half), Err(LatticeError::NotInLattice));
        assert_eq!(z2.torsion_degree(&half), Err(LatticeError::NotInLattice));
    }

    #[test]
    fn minimal_scale_outside_span_is_absent() {
        let l = hnf(&[v(1, 1)]);
        assert_eq!(l.minimal_scale(&v(1, 0)).unwrap(), None);
        assert_eq!(l.minimal_scale(&v(3, 3)).unwrap(), Some(r(1, 3)));
        assert_eq!(l.minimal_scale(&v(0, 0)), Err(LatticeError::ZeroVector));
    }

    #[test]
    fn complement_completes_a_basis() {
        let l = hnf(&[QVec2::new(r(1, 2), Rat::zero()), v(0, 1)]);
        for w in [v(0, 1), QVec2::new(r(3, 2), Rat::one()), v(1, 3)] {
            let c = l.complement(&w).unwrap();
            let sub = hnf(&[w.clone(), c.clone()]);
            assert_eq!(sub, l, "w = {w}");
            let (a, b) = l.coords(&w).unwrap();
            let (x, y) = l.coords(&c).unwrap();
            assert_eq!(a * y - b * x, BigInt::one());
        }
        assert_eq!(l.complement(&v(2, 0)), Err(LatticeError::NotPrimitive));
    }

    #[test]
    fn smith_quotient_rank_cases() {
        let z2 = Lattice2::z2();
        assert_eq!(
            smith_quotient(&z2, &Lattice2::trivial()).unwrap(),
            (BigInt::zero(), BigInt::zero())
        );
        let rank1 = hnf(&[v(1, 1)]);
        assert_eq!(
            smith_quotient(&rank1, &hnf(&[v(5, 5)])).unwrap(),
            (BigInt::one(), BigInt::from(5))
        );
        let half = hnf(&[QVec2::new(r(1, 2), Rat::zero()), v(0, 1)]);
        assert_eq!(smith_quotient(&z2, &half), Err(LatticeError::NotSublattice));
        assert_eq!(
            smith_quotient(&half, &z2).unwrap(),
            (BigInt::one(), BigInt::from(2))
        );
    }

    #[test]
    fn smith_2x2_diagonalizes() {
        let cases = [
            [[2, 2], [0, 4]],
            [[6, 4], [2, 8]],
            [[0, 3], [5, 0]],
            [[-4, 6], [6, -9]],
        ];
        for c in cases {
            let a = c.map(|row| row.map(BigInt::from));
            let s = smith_2x2(&a);
            let mul = |x: &[[BigInt; 2]; 2], y: &[[BigInt; 2]; 2]| -> [[BigInt; 2]; 2] {
                std::array::from_fn(|i| {
                    std::array::from_fn(|j| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j])
                })
            };
            let prod = mul(&mul(&s.u, &a), &s.v);
            assert_eq!(prod[0][1], BigInt::zero());
            assert_eq!(prod[1][0], BigInt::zero());
            assert_eq!([prod[0][0].clone(), prod[1][1].clone()], s.d);
            assert!(s.d[0].is_zero() && s.d[1].is_zero() || s.d[1].is_multiple_of(&s.d[0]));
            let det = |x: &[[BigInt; 2]; 2]| (&x[0][0] * &x[1][1] - &x[0][1] * &x[1][0]).abs();
            assert!(det(&s.u).is_one() && det(&s.v).is_one());
        }
    }
}
