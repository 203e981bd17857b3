//! Words in single-vertex tubular groups, Britton reduction, local
//! quotients and finite-quotient witnesses.
//!
//! A word alternates vertex elements (vectors of the vertex lattice) and
//! stable letters `t_e^{±1}`. The compact syntax separates letters with
//! semicolons: `t;(2,3);t^-1`. The empty word may be written `1`.

mod quotient;
mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exactlat::{parallel_ratio, QVec2, Rat};
use crate::model::{ModelError, TubularGroup};

pub use quotient::{local_quotient, local_quotient_general, FiniteEdge, FiniteGog, FiniteVertex};
pub use witness::{check_modulus, witness_modulus, BacktrackRow, EllipticCoords, WitnessRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("the group has more than one vertex")]
    NotSingleVertex,
    #[error("malformed word at letter {index}: {message}")]
    MalformedWord { index: usize, message: String },
    #[error("unknown stable letter {0:?}")]
    UnknownEdge(String),
    #[error("vertex element {0} is not in the vertex lattice")]
    NotInLattice(Box<QVec2>),
    #[error("the word represents the identity")]
    TrivialWord,
    #[error("the group is not primitive")]
    NotPrimitive,
    #[error("modulus must be at least 2")]
    BadModulus,
    #[error("embedding condition fails at edge {edge:?}: {message}")]
    ConditionViolated { edge: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Letter {
    Vertex(QVec2),
    Stable { edge: String, exp: i8 },
}

impl Letter {
    pub fn stable(edge: impl Into<String>, exp: i8) -> Letter {
        Letter::Stable {
            edge: edge.into(),
            exp,
        }
    }

    fn inverse(&self) -> Letter {
        match self {
            Letter::Vertex(v) => Letter::Vertex(-v),
            Letter::Stable { edge, exp } => Letter::stable(edge.clone(), -exp),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Vertex(v) => write!(f, "{v}"),
            Letter::Stable { edge, exp: 1 } => write!(f, "{edge}"),
            Letter::Stable { edge, exp } => write!(f, "{edge}^{exp}"),
        }
    }
}

/// A word with adjacent vertex elements merged and zero vertex elements
/// dropped. Stable letters are not cancelled; that is Britton reduction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut w = Word::default();
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn stable_count(&self) -> usize {
        self.letters
            .iter()
            .filter(|l| matches!(l, Letter::Stable { .. }))
            .count()
    }

    /// Appends a letter, merging vertex elements.
    fn push(&mut self, l: Letter) {
        match l {
            Letter::Vertex(v) => {
                if let Some(Letter::Vertex(top)) = self.letters.last_mut() {
                    *top = &*top + &v;
                    if top.is_zero() {
                        self.letters.pop();
                    }
                } else if !v.is_zero() {
                    self.letters.push(Letter::Vertex(v));
                }
            }
            stable => self.letters.push(stable),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(&other.letters).cloned())
    }

    pub fn inverse(&self) -> Word {
        Word::from_letters(self.letters.iter().rev().map(Letter::inverse))
    }

    /// Checks every letter against `g`.
    pub fn check(&self, g: &TubularGroup) -> Result<(), WordError> {
        if !g.is_single_vertex() {
            return Err(WordError::NotSingleVertex);
        }
        let lattice = &g.vertices()[0].lattice;
        for l in &self.letters {
            match l {
                Letter::Vertex(v) if !lattice.contains(v) => {
                    return Err(WordError::NotInLattice(Box::new(v.clone())))
                }
                Letter::Stable { edge, .. } if g.edge(edge).is_none() => {
                    return Err(WordError::UnknownEdge(edge.clone()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Parses and checks a word against `g`.
    pub fn parse_in(g: &TubularGroup, text: &str) -> Result<Word, WordError> {
        let w: Word = text.parse()?;
        w.check(g)?;
        Ok(w)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Word, WordError> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for (index, raw) in s.split(';').enumerate() {
            let bad = |message: &str| WordError::MalformedWord {
                index,
                message: message.to_string(),
            };
            let tok = raw.trim();
            if let Some(inner) = tok.strip_prefix('(') {
                let inner = inner.strip_suffix(')').ok_or_else(|| bad("missing ')'"))?;
                let (x, y) = inner
                    .split_once(',')
                    .ok_or_else(|| bad("expected a pair (x,y)"))?;
                let x: Rat = x.parse().map_err(|_| bad("bad rational coordinate"))?;
                let y: Rat = y.parse().map_err(|_| bad("bad rational coordinate"))?;
                letters.push(Letter::Vertex(QVec2::new(x, y)));
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((name, e)) => {
                    let e: i64 = e.trim().parse().map_err(|_| bad("bad exponent"))?;
                    (name.trim(), e)
                }
                None => (tok, 1),
            };
            let valid_name = !name.is_empty()
                && name
                    .chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.');
            if !valid_name {
                return Err(bad("expected a stable letter or a vector"));
            }
            if exp == 0 {
                return Err(bad("zero exponent"));
            }
            let unit = if exp > 0 { 1 } else { -1 };
            for _ in 0..exp.unsigned_abs() {
                letters.push(Letter::stable(name, unit));
            }
        }
        Ok(Word::from_letters(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `c` with `h = c·w` for an integer `c`, if any. The zero vector gives 0.
fn integer_multiple(w: &QVec2, h: &QVec2) -> Option<Rat> {
    if h.is_zero() {
        return Some(Rat::zero());
    }
    match parallel_ratio(w, h) {
        Ok(Some(c)) if c.is_integer() => Some(c),
        _ => None,
    }
}

/// If `t_e^a · h · t_e^b` (with `b = -a`) is a pinch, the vertex element it
/// collapses to.
fn pinch_value(g: &TubularGroup, edge: &str, a: i8, b: i8, h: &QVec2) -> Option<QVec2> {
    if a != -b {
        return None;
    }
    let e = g.edge(edge)?;
    // t u t⁻¹ = v  and  t⁻¹ v t = u
    let (from, to) = if a == 1 { (&e.u, &e.v) } else { (&e.v, &e.u) };
    integer_multiple(from, h).map(|c| to.scale(&c))
}

fn single_vertex(g: &TubularGroup) -> Result<(), WordError> {
    if g.is_single_vertex() {
        Ok(())
    } else {
        Err(WordError::NotSingleVertex)
    }
}

/// Britton-reduced form of `w`. A stack pass suffices: a pinch is only
/// possible when its closing stable letter arrives, and the stack below is
/// always reduced.
pub fn britton_reduce(g: &TubularGroup, w: &Word) -> Result<Word, WordError> {
    single_vertex(g)?;
    w.check(g)?;
    let mut out = Word::identity();
    for l in &w.letters {
        if let Letter::Stable { edge, exp } = l {
            let n = out.letters.len();
            let (h, opener) = match out.letters.as_slice() {
                [.., Letter::Stable { edge: e0, exp: x0 }, Letter::Vertex(h)] if e0 == edge => {
                    (h.clone(), Some((*x0, 2)))
                }
                [.., Letter::Stable { edge: e0, exp: x0 }] if e0 == edge => {
                    (QVec2::zero(), Some((*x0, 1)))
                }
                _ => (QVec2::zero(), None),
            };
            if let Some((x0, depth)) = opener {
                if let Some(value) = pinch_value(g, edge, x0, *exp, &h) {
                    out.letters.truncate(n - depth);
                    out.push(Letter::Vertex(value));
                    continue;
                }
            }
        }
        out.push(l.clone());
    }
    Ok(out)
}

pub fn is_trivial_word(g: &TubularGroup, w: &Word) -> Result<bool, WordError> {
    Ok(britton_reduce(g, w)?.is_empty())
}

/// Positions `i` where a pinch starts: `letters[i]` is a stable letter
/// closed by a matching inverse either directly or after one vertex element.
pub fn pinch_sites(g: &TubularGroup, w: &Word) -> Vec<usize> {
    let ls = &w.letters;
    let mut out = Vec::new();
    for i in 0..ls.len() {
        let Letter::Stable { edge, exp } = &ls[i] else {
            continue;
        };
        let (h, close) = match ls.get(i + 1) {
            Some(Letter::Vertex(h)) => (h.clone(), ls.get(i + 2)),
            other => (QVec2::zero(), other),
        };
        if let Some(Letter::Stable { edge: e2, exp: x2 }) = close {
            if e2 == edge && pinch_value(g, edge, *exp, *x2, &h).is_some() {
                out.push(i);
            }
        }
    }
    out
}

/// Performs the pinch starting at `site` (one of [`pinch_sites`]).
pub fn apply_pinch(g: &TubularGroup, w: &Word, site: usize) -> Option<Word> {
    let ls = &w.letters;
    let Letter::Stable { edge, exp } = ls.get(site)? else {
        return None;
    };
    let (h, end) = match ls.get(site + 1)? {
        Letter::Vertex(h) => (h.clone(), site + 3),
        _ => (QVec2::zero(), site + 2),
    };
    let Some(Letter::Stable { edge: e2, exp: x2 }) = ls.get(end - 1) else {
        return None;
    };
    if e2 != edge {
        return None;
    }
    let value = pinch_value(g, edge, *exp, *x2, &h)?;
    let letters = ls[..site]
        .iter()
        .cloned()
        .chain([Letter::Vertex(value)])
        .chain(ls[end..].iter().cloned());
    Some(Word::from_letters(letters))
}
