//! Rigorous enclosures of suprema over real intervals and complex disks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::ball::{self, Ball};
use super::Polynomial;
use crate::error::{invalid, Error, Result};

/// Bracket `[lower, upper]` of a supremum.
///
/// `upper` is a proven bound. `lower` is a proven lower bound of the value at
/// a sampled point, hence of the supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lower: f64,
    pub upper: f64,
}

impl Enclosure {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Closed real interval `[start, end]` with `start < end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(invalid(format!("interval [{start}, {end}] is not finite")));
        }
        if start >= end {
            return Err(invalid(format!("degenerate interval [{start}, {end}]")));
        }
        Ok(Interval { start, end })
    }

    /// `[-1, 1]`.
    pub fn unit() -> Self {
        Interval {
            start: -1.0,
            end: 1.0,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.start, self.end].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[f64; 2]>::deserialize(d)?;
        Interval::new(a, b).map_err(serde::de::Error::custom)
    }
}

/// Stopping rule for [`enclose_sup`].
#[derive(Clone, Copy, Debug)]
pub(crate) enum Tolerance {
    Absolute(f64),
    /// Width relative to the best lower bound found so far.
    Relative(f64),
}

impl Tolerance {
    fn met(&self, lower: f64, upper: f64) -> bool {
        match *self {
            Tolerance::Absolute(t) => upper - lower <= t,
            Tolerance::Relative(r) => upper - lower <= r * lower.abs(),
        }
    }
}

/// Bound of a nonnegative function on one cell `[c - h, c + h]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CellBound {
    /// Proven lower bound of the function value at the cell center.
    pub lower: f64,
    /// Proven upper bound of the supremum over the cell.
    pub upper: f64,
}

#[derive(Debug)]
struct Cell {
    left: f64,
    right: f64,
    upper: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

const INITIAL_CELLS: usize = 16;

/// Smallest `f64` half-width `h` with `[mid - h, mid + h]` covering `[left, right]`.
fn covering_half_width(left: f64, mid: f64, right: f64) -> f64 {
    let exact_diff = |a: f64, b: f64| {
        let (d, residual) = ball::two_sum(a, -b);
        if residual <= 0.0 {
            d
        } else {
            d.next_up()
        }
    };
    exact_diff(mid, left).max(exact_diff(right, mid))
}

/// Branch-and-bound enclosure of `sup_{t in interval} f(t)` for a nonnegative
/// `f` described by a cell evaluator `eval(center, half_width)`.
///
/// The cell with the largest upper bound is bisected until the stopping rule
/// holds, the evaluation budget is exhausted, or no cell can be split any
/// further in `f64`. Returns the enclosure and whether the rule was met.
pub(crate) fn enclose_sup<F>(
    interval: Interval,
    tol: Tolerance,
    budget: usize,
    eval: F,
) -> (Enclosure, bool)
where
    F: Fn(f64, f64) -> CellBound,
{
    let mut best_lower = 0.0f64;
    for t in [interval.start, interval.end] {
        best_lower = best_lower.max(eval(t, 0.0).lower);
    }

    let mut heap = BinaryHeap::new();
    let push = |left: f64, right: f64, heap: &mut BinaryHeap<Cell>, best: &mut f64| {
        let mid = left + 0.5 * (right - left);
        let b = eval(mid, covering_half_width(left, mid, right));
        *best = best.max(b.lower);
        heap.push(Cell {
            left,
            right,
            upper: b.upper.max(b.lower),
        });
    };

    let step = interval.len() / INITIAL_CELLS as f64;
    let mut left = interval.start;
    for i in 1..=INITIAL_CELLS {
        let right = if i == INITIAL_CELLS {
            interval.end
        } else {
            interval.start + step * i as f64
        };
        push(left, right, &mut heap, &mut best_lower);
        left = right;
    }

    let mut settled = f64::NEG_INFINITY;
    let mut evaluations = INITIAL_CELLS;
    loop {
        let top = heap.peek().map_or(f64::NEG_INFINITY, |c| c.upper);
        let upper = top.max(settled).max(best_lower);
        if tol.met(best_lower, upper) {
            return (
                Enclosure {
                    lower: best_lower,
                    upper,
                },
                true,
            );
        }
        if evaluations >= budget || heap.is_empty() {
            return (
                Enclosure {
                    lower: best_lower,
                    upper,
                },
                false,
            );
        }
        let cell = heap.pop().expect("heap is nonempty");
        let mid = cell.left + 0.5 * (cell.right - cell.left);
        if mid <= cell.left || mid >= cell.right {
            settled = settled.max(cell.upper);
            continue;
        }
        push(cell.left, mid, &mut heap, &mut best_lower);
        push(mid, cell.right, &mut heap, &mut best_lower);
        evaluations += 2;
    }
}

/// Bound of `sum_i |q_i(c + s)|` over `|s| <= h`, where each `q_i` is given
/// by its Taylor coefficients around `c`.
///
/// Terms whose sign is fixed on the cell are combined into a single signed
/// series before taking the majorant, which makes the bound tight to second
/// order near interior maxima.
pub(crate) fn abs_sum_bound(series: &[Vec<Ball>], h: f64) -> CellBound {
    let lower: f64 = series
        .iter()
        .map(|s| s.first().map_or(0.0, |b| b.abs_lower()))
        .sum();
    let lower = if series.len() > 1 {
        lower * (1.0 - 1e-15)
    } else {
        lower
    };

    let mut signed: Vec<Ball> = Vec::new();
    let mut upper = 0.0f64;
    let mut terms = 0usize;
    for s in series {
        if s.is_empty() {
            continue;
        }
        let fixed_sign = if h == 0.0 {
            None
        } else {
            let tail = ball::majorant(&s[1..], h) * Ball::exact(h);
            s[0].definite_sign()
                .filter(|_| s[0].abs_lower() > tail.abs_upper())
        };
        match fixed_sign {
            Some(sign) => {
                let oriented: Vec<Ball> = s.iter().map(|b| b.scale(sign)).collect();
                signed = ball::add_series(&signed, &oriented);
            }
            None => {
                upper += ball::majorant(s, h).abs_upper();
                terms += 1;
            }
        }
    }
    if !signed.is_empty() {
        // signed[0] > 0 on this branch, so the value is bounded by
        // signed[0] + sum_{j>=1} |signed[j]| h^j
        let tail = ball::majorant(&signed[1..], h) * Ball::exact(h);
        upper += (signed[0] + tail).upper();
        terms += 1;
    }
    // f64 accumulation of the per-term bounds
    let upper = if terms > 1 {
        upper * (1.0 + 1e-13 * terms as f64)
    } else {
        upper
    };
    CellBound { lower, upper }
}

/// Bound of `|q(c + s)|` over `|s| <= h` for a single Taylor series `b`.
///
/// On cells where `q'` provably keeps one (weak) sign, the supremum sits at
/// an end of the cell and is evaluated directly, which is exact when the
/// maximum falls on a cell boundary.
pub(crate) fn abs_bound(b: Vec<Ball>, h: f64) -> CellBound {
    let mut bound = abs_sum_bound(std::slice::from_ref(&b), h);
    if h > 0.0 && b.len() > 1 {
        let db = ball::derive(&b);
        let tail = ball::majorant(&db[1..], h) * Ball::exact(h);
        if db[0].abs_lower() >= tail.abs_upper() {
            let ends = ball::eval_series(&b, -h)
                .abs_upper()
                .max(ball::eval_series(&b, h).abs_upper());
            bound.upper = bound.upper.min(ends);
        }
    }
    bound
}

const DEFAULT_BUDGET: usize = 1 << 22;

/// Enclosure of `sup_{t in interval} |p(t)|` of width at most `tol`.
pub fn sup_abs_on_interval(p: &Polynomial, interval: Interval, tol: f64) -> Result<Enclosure> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let interval = Interval::new(interval.start, interval.end)?;
    if p.is_zero() {
        return Ok(Enclosure {
            lower: 0.0,
            upper: 0.0,
        });
    }
    let (enc, ok) = enclose_sup(
        interval,
        Tolerance::Absolute(tol),
        DEFAULT_BUDGET,
        |c, h| abs_bound(ball::taylor_shift(p.coeffs(), c), h),
    );
    if ok {
        Ok(enc)
    } else {
        Err(Error::ToleranceNotReached {
            lower: enc.lower,
            upper: enc.upper,
            tol,
        })
    }
}

/// `sum_k |coeffs[k]| radius^k`, an upper bound of `|p(z)|` on `|z| <= radius`.
pub fn sup_abs_on_disk(p: &Polynomial, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let coeffs: Vec<Ball> = p.coeffs().iter().map(|&c| Ball::exact(c)).collect();
    Ok(ball::majorant(&coeffs, radius).abs_upper())
}

/// Disk bound of `|p'(z)|` computed from `p`'s own coefficients, so that no
/// rounding is introduced by forming the derivative in `f64`.
pub(crate) fn sup_abs_derivative_on_disk(p: &Polynomial, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let coeffs: Vec<Ball> = p.coeffs().iter().map(|&c| Ball::exact(c)).collect();
    Ok(ball::majorant(&ball::derive(&coeffs), radius).abs_upper())
}
