//! Real univariate polynomials in dense ascending form, with rigorous
//! supremum enclosures and exact real-root counting.

pub(crate) mod ball;
mod enclosure;
mod sturm;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{invalid, Result};
use ball::Ball;

pub(crate) use enclosure::{
    abs_bound, abs_sum_bound, enclose_sup, sup_abs_derivative_on_disk, Tolerance,
};
pub use enclosure::{sup_abs_on_disk, sup_abs_on_interval, Enclosure, Interval};
pub use sturm::sturm_count;

/// Real polynomial `sum_k coeffs[k] * t^k`.
///
/// The coefficient vector is kept canonical: the trailing coefficient is
/// nonzero, and the zero polynomial has no coefficients at all.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming trailing zeros.
    ///
    /// Non-finite coefficients are a caller bug here; use [`Polynomial::try_new`]
    /// for untrusted input.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.is_finite()));
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn try_new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(Self::new(coeffs))
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `t`.
    pub fn identity() -> Self {
        Polynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// The antiderivative vanishing at `t = 0`.
    pub fn antiderivative(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Polynomial::new(out)
    }

    /// `scale * prod_i (t - roots[i])`.
    ///
    /// The expansion runs in double-double arithmetic and each coefficient is
    /// rounded once at the end. An empty root list yields the constant `scale`.
    pub fn from_roots(roots: &[f64], scale: f64) -> Result<Polynomial> {
        if !scale.is_finite() {
            return Err(invalid("scale must be finite"));
        }
        if let Some(bad) = roots.iter().find(|r| !r.is_finite()) {
            return Err(invalid(format!("non-finite root {bad}")));
        }
        let mut acc = vec![Ball::exact(1.0)];
        for &r in roots {
            let neg_r = Ball::exact(-r);
            let mut next = vec![Ball::ZERO; acc.len() + 1];
            for (k, &c) in acc.iter().enumerate() {
                next[k + 1] += c;
                next[k] += c * neg_r;
            }
            acc = next;
        }
        let s = Ball::exact(scale);
        Ok(Polynomial::new(
            acc.iter().map(|&c| (c * s).mid()).collect(),
        ))
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Coefficient-wise comparison with absolute tolerance `1e-12` scaled by
    /// the largest coefficient magnitude of either operand.
    pub fn approx_eq(&self, other: &Polynomial) -> bool {
        let scale = self
            .coeffs
            .iter()
            .chain(&other.coeffs)
            .fold(0.0f64, |m, c| m.max(c.abs()));
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| {
            let a = self.coeffs.get(k).copied().unwrap_or(0.0);
            let b = other.coeffs.get(k).copied().unwrap_or(0.0);
            (a - b).abs() <= tol
        })
    }

    /// Sum of absolute coefficient values.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Largest number of significant mantissa bits among the coefficients.
    pub(crate) fn max_significant_bits(&self) -> u32 {
        self.coeffs
            .iter()
            .filter(|c| **c != 0.0)
            .map(|&c| significant_bits(c))
            .max()
            .unwrap_or(0)
    }
}

/// Number of bits between the leading and trailing set bit of the mantissa.
pub(crate) fn significant_bits(x: f64) -> u32 {
    if x == 0.0 {
        return 0;
    }
    let (mantissa, _, _) = num_traits::Float::integer_decode(x);
    64 - mantissa.leading_zeros() - mantissa.trailing_zeros()
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let m = c.abs();
            match k {
                0 => write!(f, "{m}")?,
                1 => write!(f, "{m}*t")?,
                _ => write!(f, "{m}*t^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

/// Coefficient as written in JSON: a number or a decimal string.
#[derive(Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Number(f64),
    Text(String),
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct CoeffVisitor;

        impl<'de> Visitor<'de> for CoeffVisitor {
            type Value = Polynomial;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of ascending polynomial coefficients")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Polynomial, A::Error> {
                let mut coeffs = Vec::new();
                while let Some(c) = seq.next_element::<CoeffRepr>()? {
                    let v = match c {
                        CoeffRepr::Number(v) => v,
                        CoeffRepr::Text(s) => s.trim().parse::<f64>().map_err(|_| {
                            de::Error::custom(format!("coefficient {s:?} is not a decimal number"))
                        })?,
                    };
                    if !v.is_finite() {
                        return Err(de::Error::custom(format!("non-finite coefficient {v}")));
                    }
                    coeffs.push(v);
                }
                Ok(Polynomial::new(coeffs))
            }
        }

        deserializer.deserialize_seq(CoeffVisitor)
    }
}
