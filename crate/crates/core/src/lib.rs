//! Narayana sequence arithmetic and the Brocard-Ramanujan question for
//! Narayana numbers.
//!
//! The crate is organised bottom-up:
//!
//! - [`interval`] — closed intervals over an exact ordered field, with
//!   outward dyadic rounding and certified logarithms.
//! - [`narayana`] — exact, modular and index-splitting evaluation of
//!   `a(n) = a(n-1) + a(n-3)`, the growth constant and the growth-bound check.
//! - [`padic`] — p-adic valuations of integers and factorials.
//! - [`laws`] — residue-class closed forms for `v3(a_i)`, `v3(a_i - 1)` and
//!   `v3(a_i + 1)`, the congruence families at indices `8s*3^n + r`, and the
//!   brute-force oracle that adjudicates them.
//! - [`brocard`] — the explicit search bounds, the running-factorial cursor,
//!   the exhaustive searches and per-index non-solution certificates.
//!
//! Arithmetic is generic over the scalar where it makes sense (any
//! [`num_integer::Integer`] for valuations and modular recurrences, any exact
//! ordered field for intervals). The aliases below pin the concrete types the
//! rest of the crate uses.

pub mod brocard;
mod decimal;
pub mod error;
pub mod interval;
pub mod laws;
pub mod narayana;
pub mod padic;

pub use error::{Error, Result};

/// Arbitrary-precision non-negative integer; every sequence term and factorial.
pub type BigNat = num_bigint::BigUint;

/// Arbitrary-precision signed integer.
pub type BigInt = num_bigint::BigInt;

/// Exact rational number.
pub type Rational = num_rational::BigRational;

/// Interval with exact rational endpoints.
pub type RationalInterval = interval::Interval<Rational>;

/// Interval with `f64` endpoints. Not certified; handy for quick estimates.
pub type FloatInterval = interval::Interval<f64>;

pub use brocard::{
    certify_nonsolution, combined_v3_upper, derive_bounds, search_general, search_narayana,
    BoundResult, Certificate, FactorialCursor, SearchOutcome,
};
pub use laws::{
    check_divisibility_classes, law_eval, v3_oracle, verify_congruences, verify_congruences_within,
    verify_law, CongruenceFamily, DiscrepancyReport, LawVariant, Target, ValuationLaw,
};
pub use narayana::{
    alpha, check_growth_bounds, narayana, narayana_fast, narayana_mod, narayana_window,
    AlphaInterval, NarayanaWindow,
};
pub use padic::{vp, vp_factorial, vp_factorial_bounds, Valuation};
