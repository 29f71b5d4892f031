//! Numerical laboratory for the geometric sides of Selberg-type trace
//! formulae on arithmetic Fuchsian groups.
//!
//! The crate computes, exactly where possible and by certified quadrature
//! otherwise, the data entering four trace formulae: for the norm-one unit
//! group of a maximal order in an indefinite rational quaternion division
//! algebra of discriminant `d` (a cocompact Fuchsian group), and for the
//! Hecke congruence groups `Γ₀(m)` with `m` squarefree — each with and
//! without a Hecke operator `T_p`, `p ∤ d`. On top of that sit β-weighted
//! identity checks certifying that the cocompact geometric side equals the
//! β-combination of the congruence geometric sides, which is the
//! geometric-side form of the spectral correspondence between the two
//! families.
//!
//! Module map:
//! * [`arith`] — exact elementary arithmetic (Möbius, β, Λ, divisor data).
//! * [`quadforms`] — binary quadratic forms: class numbers, units, cycles.
//! * [`embeddings`] — embedding numbers E(B,Γ), E(t,n,Γ), primitive counts,
//!   exceptional representatives, cusps, and a brute-force conjugacy oracle.
//! * [`selberg_transform`] — admissible test functions and the transform
//!   quadruple h ↔ ĥ ↔ Q ↔ φ.
//! * [`trace_geometry`] — itemized numerical evaluation of the geometric
//!   sides with truncation-error accounting.
//! * [`correspondence`] — β-weighted identity verdicts and the newform
//!   dimension combinator.
//! * [`cli`] — command-line front end.

#![allow(clippy::manual_is_multiple_of)]

pub mod arith;
pub mod cli;
pub mod correspondence;
pub mod embeddings;
mod error;
pub mod numeric;
pub mod quadforms;
pub mod selberg_transform;
pub mod trace_geometry;

pub use error::{Error, Result};
