//! Exact rational arithmetic and rank ≤ 2 lattice algebra.
//!
//! Every group element in this crate is a vector of [`Rat`]s; subgroups of
//! Q² are [`Lattice2`] values in a canonical Hermite basis, so lattice
//! equality is structural equality.

mod lattice;
mod rat;
mod vec2;

pub use lattice::{
    hnf, intersection_number, parallel_ratio, smith_2x2, smith_quotient, Lattice2, Smith2,
};
pub use rat::{int_string, lcm_denominators, ParseRatError, Rat};
pub use vec2::{Mat2, QVec2};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("zero vector where a nonzero element is required")]
    ZeroVector,
    #[error("vector is not in the lattice")]
    NotInLattice,
    #[error("not a sublattice")]
    NotSublattice,
    #[error("lattice must have rank 2")]
    RankDeficient,
    #[error("vector is not primitive in the lattice")]
    NotPrimitive,
}
