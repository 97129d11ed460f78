//! Midpoint-radius arithmetic on double-double centers.
//!
//! A [`Ball`] is a double-double center `hi + lo` together with a radius
//! `rad` such that the exact real quantity it tracks lies in
//! `[hi + lo - rad, hi + lo + rad]`.
//!
//! Every operation is built from error-free transformations (`two_sum`,
//! `two_prod` via fused multiply-add), so the part of the exact result that
//! is dropped when renormalising is known exactly and is added to the radius.
//! Operations whose residuals all vanish are exact and leave the radius at
//! zero; this is what lets enclosures of, say, `sup |t|` on `[-1, 1]` come
//! out as exactly `[1, 1]`.
//!
//! Radii themselves are computed in round-to-nearest `f64` and then inflated
//! by the factor `1 + RADIUS_SLACK`. A handful of positive terms summed in
//! `f64` carries a relative rounding error of a few units of `2^-53`, far
//! below the slack, so the inflated radius is an upper bound. Overflow and
//! underflow into subnormals are outside the model; callers work with
//! coefficients and arguments of moderate magnitude.

use std::cmp::Ordering;

/// Relative inflation applied after each radius computation.
pub(crate) const RADIUS_SLACK: f64 = 1e-13;

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[inline]
fn inflate(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * (1.0 + RADIUS_SLACK)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Ball {
    hi: f64,
    lo: f64,
    rad: f64,
}

impl Ball {
    pub(crate) const ZERO: Ball = Ball {
        hi: 0.0,
        lo: 0.0,
        rad: 0.0,
    };

    pub(crate) fn exact(x: f64) -> Self {
        Ball {
            hi: x,
            lo: 0.0,
            rad: 0.0,
        }
    }

    #[cfg(test)]
    pub(crate) fn radius(&self) -> f64 {
        self.rad
    }

    /// Nearest `f64` to the center.
    pub(crate) fn mid(&self) -> f64 {
        self.hi + self.lo
    }

    /// Upper bound on the magnitude of the center, as an `f64`.
    fn center_abs_up(&self) -> f64 {
        let (hi, lo) = if self.hi < 0.0 {
            (-self.hi, -self.lo)
        } else {
            (self.hi, self.lo)
        };
        if lo > 0.0 {
            hi.next_up()
        } else {
            hi
        }
    }

    /// Lower bound on the magnitude of the center, as an `f64`.
    fn center_abs_down(&self) -> f64 {
        let (hi, lo) = if self.hi < 0.0 {
            (-self.hi, -self.lo)
        } else {
            (self.hi, self.lo)
        };
        if lo < 0.0 {
            hi.next_down().max(0.0)
        } else {
            hi
        }
    }

    /// Rigorous upper bound on `|x|` for every `x` in the ball.
    pub(crate) fn abs_upper(&self) -> f64 {
        let c = self.center_abs_up();
        if self.rad == 0.0 {
            c
        } else {
            inflate(c + self.rad)
        }
    }

    /// Rigorous lower bound on `|x|` for every `x` in the ball (clamped at 0).
    pub(crate) fn abs_lower(&self) -> f64 {
        let c = self.center_abs_down();
        if self.rad == 0.0 {
            return c;
        }
        let d = c - inflate(self.rad);
        if d <= 0.0 {
            0.0
        } else {
            (d * (1.0 - RADIUS_SLACK)).max(0.0)
        }
    }

    /// Rigorous upper bound on every `x` in the ball.
    pub(crate) fn upper(&self) -> f64 {
        if self.hi >= 0.0 {
            self.abs_upper()
        } else {
            -self.abs_lower()
        }
    }

    /// Sign of the center, or `None` when the ball contains zero.
    pub(crate) fn definite_sign(&self) -> Option<f64> {
        if self.abs_lower() > 0.0 {
            Some(self.hi.signum())
        } else {
            None
        }
    }

    pub(crate) fn abs(self) -> Ball {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub(crate) fn scale(self, k: f64) -> Ball {
        self * Ball::exact(k)
    }

    /// Magnitude bound of the center used in radius propagation.
    fn mag(&self) -> f64 {
        self.hi.abs() + self.lo.abs()
    }
}

impl std::ops::Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            hi: -self.hi,
            lo: -self.lo,
            rad: self.rad,
        }
    }
}

impl std::ops::Add for Ball {
    type Output = Ball;
    fn add(self, y: Ball) -> Ball {
        let (sh, sl) = two_sum(self.hi, y.hi);
        let (th, tl) = two_sum(self.lo, y.lo);
        let (c, r1) = two_sum(sl, th);
        let (vh, vl) = two_sum(sh, c);
        let (w, r2) = two_sum(tl, vl);
        let (zh, zl) = two_sum(vh, w);
        // exact sum = zh + zl + r1 + r2
        let dropped = r1.abs() + r2.abs();
        Ball {
            hi: zh,
            lo: zl,
            rad: inflate(self.rad + y.rad + dropped),
        }
    }
}

impl std::ops::Sub for Ball {
    type Output = Ball;
    fn sub(self, y: Ball) -> Ball {
        self + (-y)
    }
}

impl std::ops::Mul for Ball {
    type Output = Ball;
    fn mul(self, y: Ball) -> Ball {
        let (ph, pl) = two_prod(self.hi, y.hi);
        let (a1, e1) = two_prod(self.hi, y.lo);
        let (a2, e2) = two_prod(self.lo, y.hi);
        let (a3, e3) = two_prod(self.lo, y.lo);
        let (s1, r1) = two_sum(pl, a1);
        let (s2, r2) = two_sum(s1, a2);
        let (zh, zl) = two_sum(ph, s2);
        // exact product of centers = zh + zl + r1 + r2 + e1 + e2 + a3 + e3
        let dropped = r1.abs() + r2.abs() + e1.abs() + e2.abs() + a3.abs() + e3.abs();
        let prop = if self.rad == 0.0 && y.rad == 0.0 {
            0.0
        } else {
            self.mag() * y.rad + y.mag() * self.rad + self.rad * y.rad
        };
        Ball {
            hi: zh,
            lo: zl,
            rad: inflate(prop + dropped),
        }
    }
}

impl std::ops::AddAssign for Ball {
    fn add_assign(&mut self, y: Ball) {
        *self = *self + y;
    }
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, other: &Ball) -> Option<Ordering> {
        (self.hi, self.lo).partial_cmp(&(other.hi, other.lo))
    }
}

/// Taylor coefficients `b_j = p^(j)(x) / j!` of a polynomial with exact `f64`
/// coefficients (ascending) around the exact point `x`.
pub(crate) fn taylor_shift(coeffs: &[f64], x: f64) -> Vec<Ball> {
    let mut b: Vec<Ball> = coeffs.iter().map(|&c| Ball::exact(c)).collect();
    let n = b.len();
    if n < 2 {
        return b;
    }
    let xb = Ball::exact(x);
    for i in 0..n - 1 {
        for k in (i..n - 1).rev() {
            b[k] = b[k] + xb * b[k + 1];
        }
    }
    b
}

/// Value of the series `sum_j b_j x^j` at an exact point.
pub(crate) fn eval_series(b: &[Ball], x: f64) -> Ball {
    let xb = Ball::exact(x);
    b.iter().rev().fold(Ball::ZERO, |acc, &c| acc * xb + c)
}

/// `sum_j |b_j| h^j`, a rigorous bound on `sup_{|s| <= h} |sum_j b_j s^j|`
/// once converted with [`Ball::abs_upper`].
pub(crate) fn majorant(b: &[Ball], h: f64) -> Ball {
    let hb = Ball::exact(h);
    b.iter()
        .rev()
        .fold(Ball::ZERO, |acc, &c| acc * hb + c.abs())
}

/// Coefficients of the formal derivative of a Taylor series.
pub(crate) fn derive(b: &[Ball]) -> Vec<Ball> {
    b.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c.scale(j as f64))
        .collect()
}

/// Cauchy product of two coefficient sequences.
pub(crate) fn convolve(x: &[Ball], y: &[Ball]) -> Vec<Ball> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Ball::ZERO; x.len() + y.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        for (j, &b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Coefficient-wise sum of two sequences of possibly different length.
pub(crate) fn add_series(x: &[Ball], y: &[Ball]) -> Vec<Ball> {
    let n = x.len().max(y.len());
    (0..n)
        .map(|k| {
            let a = x.get(k).copied().unwrap_or(Ball::ZERO);
            let b = y.get(k).copied().unwrap_or(Ball::ZERO);
            a + b
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_keep_zero_radius() {
        let a = Ball::exact(0.75);
        let b = Ball::exact(0.25);
        let s = a + b;
        assert_eq!(s.mid(), 1.0);
        assert_eq!(s.radius(), 0.0);
        let p = a * b;
        assert_eq!(p.mid(), 0.1875);
        assert_eq!(p.radius(), 0.0);
    }

    #[test]
    fn double_double_keeps_low_order_bits() {
        // (1 + 2^-60) - 1 is lost in f64 but representable as a double-double.
        let tiny = 2f64.powi(-60);
        let x = Ball::exact(1.0) + Ball::exact(tiny);
        let y = x - Ball::exact(1.0);
        assert_eq!(y.mid(), tiny);
        assert_eq!(y.radius(), 0.0);
    }

    #[test]
    fn inexact_product_gets_positive_radius_containing_truth() {
        // 0.1 * 0.1 * 0.1 in double-double: the last product drops bits.
        let t = Ball::exact(0.1);
        let p = t * t * t;
        let exact_f64_cube = 0.1f64 * 0.1 * 0.1;
        assert!((p.mid() - exact_f64_cube).abs() < 1e-17);
        assert!(p.abs_lower() <= p.abs_upper());
    }

    #[test]
    fn taylor_shift_matches_hand_expansion() {
        // p = 3t^2 - 1 around x = 0.5: p(0.5+s) = -0.25 + 3s + 3s^2
        let b = taylor_shift(&[-1.0, 0.0, 3.0], 0.5);
        assert_eq!(b[0].mid(), -0.25);
        assert_eq!(b[1].mid(), 3.0);
        assert_eq!(b[2].mid(), 3.0);
        assert!(b.iter().all(|c| c.radius() == 0.0));
    }

    #[test]
    fn abs_bounds_bracket_value() {
        let b = Ball {
            hi: -2.0,
            lo: 0.0,
            rad: 0.5,
        };
        assert!(b.abs_upper() >= 2.5);
        assert!(b.abs_lower() <= 1.5);
        assert!(b.abs_lower() > 1.49);
        assert_eq!(b.definite_sign(), Some(-1.0));
        let z = Ball {
            hi: 0.1,
            lo: 0.0,
            rad: 0.2,
        };
        assert_eq!(z.definite_sign(), None);
        assert_eq!(z.abs_lower(), 0.0);
    }
}
