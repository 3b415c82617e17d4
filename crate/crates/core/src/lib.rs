//! Exact-arithmetic toolkit for a catalog of ramified 4x4 Lax pairs.
//!
//! The crate provides, over the cyclotomic field Q(zeta_12):
//!
//! * `cyclo`, `poly`, `ratfn`, `laurent`, `puiseux`, `dual`, `linalg` —
//!   the exact scalar and series stack (generic over [`field::Field`]
//!   where the mathematics is scalar-agnostic);
//! * `expr` — a small symbolic expression DSL in which all catalog data
//!   is written;
//! * `catalog` — the machine-readable systems, Riemann schemes,
//!   Hamiltonians and sampling;
//! * `htl` — formal reduction of a linear system at a singular point to
//!   its canonical form, with Poincare rank and spectral type;
//! * `verify` — zero-curvature and Riemann-scheme checks;
//! * `degen` — the degeneration rules, their eps -> 0 limits and the
//!   degeneration-scheme graph;
//! * `laplace` — realization of systems as B(xI-T)^-1 C + S and the
//!   induced transform with spectral-type verification.

pub mod field;

pub mod cyclo;
pub mod dual;
pub mod laurent;
pub mod linalg;
pub mod poly;
pub mod puiseux;
pub mod ratfn;

pub mod expr;

pub mod catalog;
pub mod htl;

pub mod degen;
pub mod laplace;
pub mod verify;

use thiserror::Error;

/// Arbitrary-precision rational scalar.
pub type Q = num_rational::BigRational;

/// The base field Q(zeta_12) used by all exact linear algebra.
pub type K = cyclo::Cyclo;

/// Rational functions in eps over K, the eps -> 0 carrier.
pub type RatFn = ratfn::RatFn;

/// Matrix over the base field.
pub type KMat = linalg::Mat<K>;

/// Truncated Puiseux series over the base field.
pub type KSeries = puiseux::Puiseux<K>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("requested order {order} is below the valuation {val}")]
    InvalidTruncation { val: i64, order: i64 },
}
