//! Exact real-root counting with Sturm sequences.
//!
//! Every `f64` is a dyadic rational, so a polynomial with `f64` coefficients
//! is scaled to an integer polynomial and the whole Sturm chain is built with
//! big integers (primitive pseudo-remainder sequence with the signs of the
//! true Euclidean remainders). Sign evaluation at `f64` endpoints is exact as
//! well, which makes the count a certificate rather than an estimate.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Float, One, Signed, Zero};

use super::{Interval, Polynomial};
use crate::error::{Error, Result};

type IntPoly = Vec<BigInt>;

/// Number of distinct real roots of `p` in the half-open interval `(start, end]`.
///
/// Endpoints that are themselves roots follow the same convention: a root at
/// `start` is excluded and a root at `end` is included.
pub fn sturm_count(p: &Polynomial, interval: Interval) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let interval = Interval::new(interval.start, interval.end)?;
    let chain = sturm_chain(&to_int_poly(p.coeffs()));
    let va = variations(&chain, interval.start);
    let vb = variations(&chain, interval.end);
    Ok(va.saturating_sub(vb))
}

/// Splits a finite `f64` into `(m, e)` with value `m * 2^e`.
fn decompose(x: f64) -> (BigInt, i32) {
    let (mantissa, exp, sign) = Float::integer_decode(x);
    let m = BigInt::from(mantissa) * BigInt::from(sign);
    (m, exp as i32)
}

/// Integer polynomial proportional (by a positive power of two) to `coeffs`.
fn to_int_poly(coeffs: &[f64]) -> IntPoly {
    let parts: Vec<(BigInt, i32)> = coeffs.iter().map(|&c| decompose(c)).collect();
    let min_exp = parts
        .iter()
        .filter(|(m, _)| !m.is_zero())
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    parts
        .into_iter()
        .map(|(m, e)| m << ((e - min_exp) as usize))
        .collect()
}

fn trim(p: &mut IntPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn content(p: &IntPoly) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Divides out the (positive) content.
fn primitive(mut p: IntPoly) -> IntPoly {
    trim(&mut p);
    let g = content(&p);
    if !g.is_zero() && !g.is_one() {
        for c in &mut p {
            *c /= &g;
        }
    }
    p
}

fn derivative(p: &IntPoly) -> IntPoly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect()
}

/// Pseudo-division: returns `(q, r)` with `lc(b)^(deg a - deg b + 1) a = q b + r`.
fn pseudo_divide(a: &IntPoly, b: &IntPoly) -> (IntPoly, IntPoly) {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let steps = r.len() - b.len() + 1;
    let mut q = vec![BigInt::zero(); steps];
    for i in (0..steps).rev() {
        // r has degree <= i + db at this point
        let lead = r[i + db].clone();
        for c in q.iter_mut() {
            *c *= lb;
        }
        q[i] += &lead;
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &lead * bj;
        }
        debug_assert!(r[i + db].is_zero());
    }
    trim(&mut r);
    (q, r)
}

/// Sturm chain of the square-free part of `p`, each member primitive.
fn sturm_chain(p: &IntPoly) -> Vec<IntPoly> {
    let chain = raw_chain(primitive(p.clone()));
    let gcd = chain.last().expect("chain is nonempty");
    if gcd.len() <= 1 {
        return chain;
    }
    // Repeated roots: rebuild the chain from p / gcd(p, p').
    let (quotient, rem) = pseudo_divide(&chain[0], gcd);
    debug_assert!(rem.is_empty());
    // The quotient may carry the sign of lc(gcd)^k; negating a whole chain
    // leaves every variation count unchanged.
    raw_chain(primitive(quotient))
}

fn raw_chain(p0: IntPoly) -> Vec<IntPoly> {
    let p1 = primitive(derivative(&p0));
    let mut chain = vec![p0];
    if p1.is_empty() {
        return chain;
    }
    chain.push(p1);
    loop {
        let n = chain.len();
        let (a, b) = (&chain[n - 2], &chain[n - 1]);
        if b.len() == 1 {
            break;
        }
        let (_, r) = pseudo_divide(a, b);
        if r.is_empty() {
            break;
        }
        // prem = lc(b)^(delta+1) * rem, and the Sturm chain needs -rem.
        let delta_plus_one = a.len() - b.len() + 1;
        let lc_negative = b.last().expect("nonzero").is_negative();
        let flip = !(lc_negative && delta_plus_one % 2 == 1);
        let mut next = primitive(r);
        if flip {
            for c in &mut next {
                *c = -c.clone();
            }
        }
        chain.push(next);
    }
    chain
}

/// Exact sign of `p(x)` for a finite `f64` argument.
fn sign_at(p: &IntPoly, x: f64) -> Sign {
    if p.is_empty() {
        return Sign::NoSign;
    }
    // x = m * 2^e; evaluate 2^(-e*deg) style scaled Horner in integers.
    let (m, e) = decompose(x);
    if m.is_zero() {
        return p[0].sign();
    }
    let n = p.len() - 1;
    if e >= 0 {
        let xv = m << (e as usize);
        let mut acc = BigInt::zero();
        for c in p.iter().rev() {
            acc = acc * &xv + c;
        }
        acc.sign()
    } else {
        // p(m / 2^s) * 2^(s n) = sum_k c_k m^k 2^(s (n - k))
        let s = (-e) as usize;
        let mut acc = p[n].clone();
        let mut pow = BigInt::one();
        for k in (0..n).rev() {
            pow <<= s;
            acc = acc * &m + &p[k] * &pow;
        }
        acc.sign()
    }
}

fn variations(chain: &[IntPoly], x: f64) -> usize {
    let mut count = 0;
    let mut last = Sign::NoSign;
    for member in chain {
        let s = sign_at(member, x);
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            count += 1;
        }
        last = s;
    }
    count
}
