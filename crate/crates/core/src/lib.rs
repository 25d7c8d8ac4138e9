//! Asymptotic termination-complexity analysis for vector addition systems
//! with states (VASS).
//!
//! The pipeline is: parse and validate a [`Vass`], split it into strongly
//! connected components, compute the effects of short cycles
//! ([`inc::compute_inc`]), decide linear complexity by a weighted linear
//! ranking function ([`linear`]), classify each component by the normals of
//! its cycle effects ([`geometry`]), and recurse on neutral restrictions to
//! obtain `Theta(n^k)` bounds ([`poly`]). Every claim is backed by a
//! certificate that [`report::recheck`] verifies with exact arithmetic.
//!
//! [`oracle`] is an exhaustive, memoized simulator used to validate verdicts
//! on small instances.

pub mod cli;
pub mod format;
pub mod geometry;
pub mod inc;
pub mod linear;
pub mod lp;
pub mod oracle;
pub mod poly;
pub mod report;
pub mod scc;
pub mod vass;

pub use lp::{RatVector, Rational};
pub use vass::{Configuration, IntVector, Path, StateId, Transition, Vass, VassError};
