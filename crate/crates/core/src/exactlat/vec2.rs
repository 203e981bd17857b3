use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::rat::Rat;

/// A vector in Q².
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "[Rat; 2]", into = "[Rat; 2]")]
pub struct QVec2 {
    pub x: Rat,
    pub y: Rat,
}

impl QVec2 {
    pub fn new(x: Rat, y: Rat) -> Self {
        QVec2 { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        QVec2::new(Rat::from_int(x), Rat::from_int(y))
    }

    pub fn zero() -> Self {
        QVec2::default()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn scale(&self, a: &Rat) -> QVec2 {
        QVec2::new(&self.x * a, &self.y * a)
    }

    pub fn scale_int(&self, n: &BigInt) -> QVec2 {
        self.scale(&Rat::from_int(n.clone()))
    }

    /// `x1*y2 - y1*x2`.
    pub fn det(&self, other: &QVec2) -> Rat {
        &self.x * &other.y - &self.y * &other.x
    }

    /// Sign-normalized copy: the first nonzero coordinate is made positive.
    pub fn sign_normalized(&self) -> QVec2 {
        if self.leading_sign_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn leading_sign_negative(&self) -> bool {
        if self.x.is_zero() {
            self.y.is_negative()
        } else {
            self.x.is_negative()
        }
    }
}

impl From<[Rat; 2]> for QVec2 {
    fn from([x, y]: [Rat; 2]) -> Self {
        QVec2 { x, y }
    }
}

impl From<QVec2> for [Rat; 2] {
    fn from(v: QVec2) -> Self {
        [v.x, v.y]
    }
}

impl Add<&QVec2> for &QVec2 {
    type Output = QVec2;
    fn add(self, rhs: &QVec2) -> QVec2 {
        QVec2::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Sub<&QVec2> for &QVec2 {
    type Output = QVec2;
    fn sub(self, rhs: &QVec2) -> QVec2 {
        QVec2::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl Neg for &QVec2 {
    type Output = QVec2;
    fn neg(self) -> QVec2 {
        QVec2::new(-&self.x, -&self.y)
    }
}

impl Neg for QVec2 {
    type Output = QVec2;
    fn neg(self) -> QVec2 {
        QVec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for QVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl fmt::Debug for QVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A 2×2 rational matrix acting on column vectors. Serialized row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[[Rat; 2]; 2]", into = "[[Rat; 2]; 2]")]
pub struct Mat2 {
    pub rows: [[Rat; 2]; 2],
}

impl Mat2 {
    pub fn new(a: Rat, b: Rat, c: Rat, d: Rat) -> Self {
        Mat2 {
            rows: [[a, b], [c, d]],
        }
    }

    pub fn identity() -> Self {
        Mat2::scalar(Rat::one())
    }

    pub fn scalar(s: Rat) -> Self {
        Mat2::new(s.clone(), Rat::zero(), Rat::zero(), s)
    }

    pub fn diag(a: Rat, d: Rat) -> Self {
        Mat2::new(a, Rat::zero(), Rat::zero(), d)
    }

    /// The matrix whose columns are `c1` and `c2`.
    pub fn from_columns(c1: &QVec2, c2: &QVec2) -> Self {
        Mat2::new(c1.x.clone(), c2.x.clone(), c1.y.clone(), c2.y.clone())
    }

    pub fn det(&self) -> Rat {
        let [[a, b], [c, d]] = &self.rows;
        a * d - b * c
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        let [[a, b], [c, d]] = &self.rows;
        Some(Mat2::new(d / &det, -b / &det, -c / &det, a / &det))
    }

    pub fn apply(&self, v: &QVec2) -> QVec2 {
        let [[a, b], [c, d]] = &self.rows;
        QVec2::new(a * &v.x + b * &v.y, c * &v.x + d * &v.y)
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let [[a, b], [c, d]] = &self.rows;
        let [[e, f], [g, h]] = &other.rows;
        Mat2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }

    /// `Some(s)` when the matrix is `s` times the identity.
    pub fn as_scalar(&self) -> Option<Rat> {
        let [[a, b], [c, d]] = &self.rows;
        (b.is_zero() && c.is_zero() && a == d).then(|| a.clone())
    }
}

impl From<[[Rat; 2]; 2]> for Mat2 {
    fn from(rows: [[Rat; 2]; 2]) -> Self {
        Mat2 { rows }
    }
}

impl From<Mat2> for [[Rat; 2]; 2] {
    fn from(m: Mat2) -> Self {
        m.rows
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = &self.rows;
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}
