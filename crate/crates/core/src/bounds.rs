//! Upper bound on the zero count of a scalar linear ODE with bounded
//! coefficients, and rigorous checks of the boundedness hypothesis.
//!
//! For `y^(n) + a_1 y^(n-1) + ... + a_n y = 0` with `|a_i| <= C`, `C >= 1`, on
//! `[alpha, beta]`, every nontrivial solution has at most
//! `n - 1 + (n / ln 2) C (beta - alpha)` isolated zeros there.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::polynomial::{sup_abs_on_interval, Enclosure, Interval, Polynomial};

/// Arguments of [`theorem1_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundQuery {
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl BoundQuery {
    pub fn new(n: usize, c: f64, alpha: f64, beta: f64) -> Result<BoundQuery> {
        if n < 1 {
            return Err(invalid("order n must be >= 1"));
        }
        if !(c >= 1.0) || !c.is_finite() {
            return Err(invalid(format!("C >= 1 required, got {c}")));
        }
        Interval::new(alpha, beta)?;
        Ok(BoundQuery { n, c, alpha, beta })
    }
}

/// `n - 1 + (n / ln 2) C (beta - alpha)`.
pub fn theorem1_bound(q: &BoundQuery) -> Result<f64> {
    let q = BoundQuery::new(q.n, q.c, q.alpha, q.beta)?;
    let n = q.n as f64;
    Ok(n - 1.0 + n / std::f64::consts::LN_2 * q.c * (q.beta - q.alpha))
}

/// Convenience wrapper for [`theorem1_bound`].
pub fn zero_count_bound(n: usize, c: f64, alpha: f64, beta: f64) -> Result<f64> {
    theorem1_bound(&BoundQuery::new(n, c, alpha, beta)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Every coefficient's certified sup is at most `C`.
    Certified,
    /// Some coefficient provably exceeds `C` somewhere.
    Refuted,
    /// An enclosure straddles `C`; a tighter tolerance may decide.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub enclosures: Vec<Enclosure>,
    pub c: f64,
    pub verdict: Verdict,
}

/// Encloses `sup |a_i|` on `interval` for each coefficient and compares with `c`.
pub fn certify_coefficient_bound(
    coeffs: &[Polynomial],
    c: f64,
    interval: Interval,
    tol: f64,
) -> Result<BoundCertificate> {
    if coeffs.is_empty() {
        return Err(invalid("coefficient list is empty"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!("C must be positive, got {c}")));
    }
    let enclosures = coeffs
        .iter()
        .map(|p| sup_abs_on_interval(p, interval, tol))
        .collect::<Result<Vec<_>>>()?;
    let verdict = if enclosures.iter().any(|e| e.lower > c) {
        Verdict::Refuted
    } else if enclosures.iter().all(|e| e.upper <= c) {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    Ok(BoundCertificate {
        enclosures,
        c,
        verdict,
    })
}
