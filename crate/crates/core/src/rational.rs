//! Exact arbitrary-precision rationals.
//!
//! Every quantity in this crate — game values, allocations, excesses, dual
//! weights — is a [`Rational`]. There is no floating point anywhere: least-core
//! and lexicographic comparisons must be decided exactly, so inputs are
//! restricted to rationals and all arithmetic stays in ℚ.

use num::BigRational;

use crate::error::{Error, Result};

/// Canonical exact fraction: reduced, denominator positive. `num`'s
/// `BigRational` maintains both invariants through every operation.
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Rational `n/d`. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Parses `"p"` or `"p/q"`. The result is canonicalized (`"6/4"` parses to
/// `3/2`), and a zero denominator is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    s.parse::<Rational>()
        .map_err(|e| Error::input(format!("bad rational {s:?}: {e}")))
}

/// Renders in canonical form: `p/q` with positive reduced denominator,
/// integers without the `/1`.
pub fn render_rational(q: &Rational) -> String {
    q.to_string()
}
