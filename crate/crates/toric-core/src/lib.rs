//! Numerical library for torus-invariant metrics on `O(1)` over projective
//! space: the canonical volume form, monomial L² norms, Legendre-Fenchel
//! transforms on the standard simplex, the bounded canonical functional and
//! its explicit bound constant, Berman-style energy functionals, and the
//! Todd-coefficient bounds used for the variation of analytic torsion.
//!
//! Everything is deterministic: quadrature schemes are fixed node sets,
//! minimizers are derivative-free with fixed iteration schedules, and random
//! metric families come from a named counter-based generator (`rng`).

pub mod canonical;
pub mod error;
pub mod fenchel;
pub mod functionals;
pub mod metrics;
pub mod quad;
pub mod report;
pub mod rng;
pub mod simplex;
pub mod torsion;

pub use error::{Error, Result};
