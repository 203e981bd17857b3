//! Residual finiteness of tubular groups.
//!
//! A tubular group is a finite graph of groups with Z² vertex groups and Z
//! edge groups. This crate decides residual finiteness for single-vertex
//! groups and semi-decides it in general, always returning a certificate that
//! can be re-checked independently:
//!
//! * [`exactlat`]: exact rationals and rank ≤ 2 lattices in Q².
//! * [`model`]: the group data model, constructors and the JSON document format.
//! * [`expansion`]: expansion morphisms, expansion sequences and rigid isomorphisms.
//! * [`regulating`]: regulating edge tuples and the single-vertex decision procedure.
//! * [`words`]: Britton reduction, local quotients and finite-quotient witnesses.
//! * [`cli`]: the `tubular` command-line frontend.

pub mod cli;
pub mod exactlat;
pub mod expansion;
pub mod model;
pub mod regulating;
pub mod words;

pub use exactlat::{Lattice2, Mat2, QVec2, Rat};
pub use model::{ETuple, TubularGroup};
