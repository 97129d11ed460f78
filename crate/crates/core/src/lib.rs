//! Linear ODE systems with bounded polynomial coefficients whose solutions
//! have arbitrarily many zeros.
//!
//! A scalar equation `y^(n) + a_1 y^(n-1) + ... + a_n y = 0` with `|a_i| <= C`
//! admits at most `n - 1 + (n / ln 2) C (beta - alpha)` zeros per solution
//! ([`bounds`]). No such bound exists for systems: [`counterexample`] builds a
//! 2x2 system with column-sum norm below one on `[-1, 1]` whose solution has
//! any prescribed number of zeros, certified exactly with Sturm sequences.
//! [`ode`] integrates such systems numerically and counts sign changes as an
//! independent cross-check, and [`experiment`] drives the command-line tool.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod counterexample;
pub mod error;
pub mod experiment;
pub mod ode;
pub mod polynomial;

pub use error::{Error, Result};
pub use polynomial::{Enclosure, Interval, Polynomial};
