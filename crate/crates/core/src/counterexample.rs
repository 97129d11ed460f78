//! The bounded-coefficient 2x2 system whose solution has any prescribed
//! number of zeros.
//!
//! For distinct nodes `t_1..t_d` in `[-1, 1]` let `p(t) = prod (t - t_i)` and
//! `a = lambda * p`. The system
//!
//! ```text
//! x1' = a(t) x1
//! x2' = (a'(t) + a(t)^2) x1
//! ```
//!
//! has the solution `phi1 = exp(int a)`, `phi2 = a * phi1`. The first
//! component never vanishes, the second vanishes exactly at the nodes, and
//! `lambda` is chosen so that the column-sum norm `|a| + |a' + a^2|` stays
//! below one on `[-1, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polynomial::ball::{self, Ball};
use crate::polynomial::{
    abs_bound, abs_sum_bound, enclose_sup, sturm_count, sup_abs_derivative_on_disk,
    sup_abs_on_disk, Enclosure, Interval, Polynomial, Tolerance,
};

/// Default slack below one for the coefficient-norm certificate.
pub const DEFAULT_MARGIN: f64 = 0.01;

/// Closest admissible spacing between user-supplied nodes.
pub const MIN_NODE_SEPARATION: f64 = 1e-9;

const SUP_BUDGET: usize = 1 << 21;
const NORM_TOL: f64 = 1e-9;

/// How node locations are generated.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeStrategy {
    /// `cos((2k-1) pi / (2d))`, `k = 1..d`.
    Chebyshev,
    /// Midpoints of `d` equal subintervals of `[-1, 1]`.
    Uniform,
    Explicit(Vec<f64>),
}

/// Zero locations together with their monic node polynomial `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    nodes: Vec<f64>,
    p: Polynomial,
}

impl NodeSet {
    pub fn new(strategy: &NodeStrategy, d: usize) -> Result<NodeSet> {
        match strategy {
            NodeStrategy::Chebyshev => NodeSet::chebyshev(d),
            NodeStrategy::Uniform => NodeSet::uniform(d),
            NodeStrategy::Explicit(nodes) => NodeSet::explicit(nodes.clone()),
        }
    }

    /// Chebyshev points of the first kind.
    ///
    /// When the scaled Chebyshev polynomial `2^(1-d) T_d` has exactly
    /// representable coefficients it is used as `p`, so the roots of the
    /// stored polynomial are exactly the Chebyshev points.
    pub fn chebyshev(d: usize) -> Result<NodeSet> {
        check_count(d)?;
        let nodes = chebyshev_nodes(d);
        let p = match chebyshev_monic(d) {
            Some(p) => p,
            None => Polynomial::from_roots(&nodes, 1.0)?,
        };
        Ok(NodeSet { nodes, p })
    }

    pub fn uniform(d: usize) -> Result<NodeSet> {
        check_count(d)?;
        let nodes: Vec<f64> = (1..=d)
            .map(|k| -1.0 + (2 * k - 1) as f64 / d as f64)
            .collect();
        NodeSet::explicit(nodes)
    }

    pub fn explicit(mut nodes: Vec<f64>) -> Result<NodeSet> {
        check_count(nodes.len())?;
        validate_nodes(&mut nodes)?;
        let p = Polynomial::from_roots(&nodes, 1.0)?;
        Ok(NodeSet { nodes, p })
    }

    /// Sorted ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn check_count(d: usize) -> Result<()> {
    if d == 0 {
        Err(invalid("d must be >= 1"))
    } else {
        Ok(())
    }
}

fn validate_nodes(nodes: &mut [f64]) -> Result<()> {
    if let Some(bad) = nodes
        .iter()
        .find(|t| !t.is_finite() || **t < -1.0 || **t > 1.0)
    {
        return Err(invalid(format!("node {bad} is outside [-1, 1]")));
    }
    nodes.sort_by(f64::total_cmp);
    if let Some(w) = nodes.windows(2).find(|w| w[1] - w[0] < MIN_NODE_SEPARATION) {
        return Err(invalid(format!(
            "nodes {} and {} are closer than {MIN_NODE_SEPARATION}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Chebyshev points of the first kind, ascending.
pub fn chebyshev_nodes(d: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = (1..=d)
        .map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * d) as f64).cos())
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes
}

/// `2^(1-d) T_d(t)`, the monic polynomial with the Chebyshev points as roots,
/// or `None` when its coefficients are not exactly representable in `f64`.
pub fn chebyshev_monic(d: usize) -> Option<Polynomial> {
    if d == 0 {
        return Some(Polynomial::constant(1.0));
    }
    // Integer three-term recurrence T_{k+1} = 2t T_k - T_{k-1}.
    let mut prev: Vec<i128> = vec![1];
    let mut cur: Vec<i128> = vec![0, 1];
    for _ in 1..d {
        let mut next = vec![0i128; cur.len() + 1];
        for (k, &c) in cur.iter().enumerate() {
            next[k + 1] = next[k + 1].checked_add(c.checked_mul(2)?)?;
        }
        for (k, &c) in prev.iter().enumerate() {
            next[k] = next[k].checked_sub(c)?;
        }
        prev = cur;
        cur = next;
    }
    let scale = 2f64.powi(1 - d as i32);
    let mut coeffs = Vec::with_capacity(cur.len());
    for c in cur {
        let f = c as f64;
        if f as i128 != c {
            return None;
        }
        coeffs.push(f * scale);
    }
    Some(Polynomial::new(coeffs))
}

/// Rounds a positive `lambda` down to as many significant bits as keep every
/// product `lambda * coeff` exact, so that `a = lambda * p` holds exactly.
fn round_for_exact_product(lambda: f64, p: &Polynomial) -> Result<f64> {
    let keep = 53u32.saturating_sub(p.max_significant_bits()).max(1);
    let (mantissa, exp, _) = num_traits::Float::integer_decode(lambda);
    let drop = 64 - mantissa.leading_zeros() - keep.min(64 - mantissa.leading_zeros());
    let truncated = (mantissa >> drop) << drop;
    let rounded = truncated as f64 * 2f64.powi(exp as i32);
    let exact = p
        .coeffs()
        .iter()
        .all(|&c| rounded.mul_add(c, -(rounded * c)) == 0.0);
    if !(rounded > 0.0) || !exact {
        return Err(Error::Verification(format!(
            "cannot scale node polynomial exactly by lambda = {lambda}"
        )));
    }
    Ok(rounded)
}

/// Rigorous enclosure of `sup_{t in interval} |a(t)| + |a'(t) + a(t)^2|`.
///
/// The derivative and square are formed from the Taylor expansion of `a`
/// on each cell, so the bound refers to the exact polynomials rather than
/// their `f64`-rounded expansions.
pub fn norm_enclosure(a: &Polynomial, interval: Interval, tol: f64) -> Result<Enclosure> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (enc, _) = enclose_sup(interval, Tolerance::Absolute(tol), SUP_BUDGET, |c, h| {
        let b = ball::taylor_shift(a.coeffs(), c);
        let second = ball::add_series(&ball::derive(&b), &ball::convolve(&b, &b));
        abs_sum_bound(&[b, second], h)
    });
    Ok(enc)
}

/// Upper bounds of `sup |p|` and `sup |p'|` on `[-1, 1]`.
fn node_polynomial_bounds(p: &Polynomial) -> (f64, f64) {
    let tol = Tolerance::Relative(1e-6);
    let (s0, _) = enclose_sup(Interval::unit(), tol, SUP_BUDGET, |c, h| {
        abs_bound(ball::taylor_shift(p.coeffs(), c), h)
    });
    let (s1, _) = enclose_sup(Interval::unit(), tol, SUP_BUDGET, |c, h| {
        abs_bound(ball::derive(&ball::taylor_shift(p.coeffs(), c)), h)
    });
    (s0.upper, s1.upper)
}

/// Positive root of `lambda (s0 + s1) + lambda^2 s0^2 = target`, in the
/// cancellation-free form.
fn quadratic_root(s0: f64, s1: f64, target: f64) -> f64 {
    let b = s0 + s1;
    2.0 * target / (b + (b * b + 4.0 * s0 * s0 * target).sqrt())
}

fn check_margin(margin: f64) -> Result<()> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(invalid(format!("margin must lie in (0, 1), got {margin}")));
    }
    Ok(())
}

/// Largest `lambda` allowed by the separable bound
/// `lambda S0 + lambda S1 + lambda^2 S0^2 <= 1 - margin`, followed by a direct
/// rigorous check that `sup (|a| + |a' + a^2|) <= 1 - margin / 2`.
///
/// Returns `lambda` and the enclosure from the direct check.
pub fn choose_lambda(nodes: &NodeSet, margin: f64) -> Result<(f64, Enclosure)> {
    check_margin(margin)?;
    check_count(nodes.len())?;
    let p = nodes.polynomial();
    let (s0, s1) = node_polynomial_bounds(p);
    let lambda = round_for_exact_product(quadratic_root(s0, s1, 1.0 - margin), p)?;
    let a = p.scale(lambda);
    let cert = norm_enclosure(&a, Interval::unit(), NORM_TOL)?;
    if cert.upper > 1.0 - margin / 2.0 {
        return Err(Error::Verification(format!(
            "norm bound {} exceeds {} for lambda = {lambda}",
            cert.upper,
            1.0 - margin / 2.0
        )));
    }
    Ok((lambda, cert))
}

/// Radius of the disk about 0 covering the rectangle of half-width
/// `epsilon` around `[-1, 1]`, rounded up.
pub fn covering_radius(epsilon: f64) -> f64 {
    ((1.0 + epsilon).powi(2) + epsilon * epsilon)
        .sqrt()
        .next_up()
}

/// Upper bound of `|a(z)| + |a'(z) + a(z)^2|` on the disk `|z| <= radius`.
pub fn disk_norm_bound(a: &Polynomial, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let coeffs: Vec<Ball> = a.coeffs().iter().map(|&c| Ball::exact(c)).collect();
    let d0 = ball::majorant(&coeffs, radius);
    let d1 = ball::majorant(&ball::derive(&coeffs), radius);
    Ok((d0 + d1 + d0 * d0).abs_upper())
}

/// `lambda` making `|a| + |a' + a^2| <= delta` on the disk covering the
/// `epsilon`-neighborhood of `[-1, 1]`, via the coefficient-sum bounds
/// `D0 = sup |p|`, `D1 = sup |p'|` on that disk.
pub fn choose_lambda_complex(nodes: &NodeSet, epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    check_count(nodes.len())?;
    let p = nodes.polynomial();
    let r = covering_radius(epsilon);
    let d0 = sup_abs_on_disk(p, r)?;
    let d1 = sup_abs_derivative_on_disk(p, r)?;
    let mut lambda = round_for_exact_product(quadratic_root(d0, d1, delta), p)?;
    // The root is computed in round-to-nearest; step down until the bound
    // certifies.
    for _ in 0..64 {
        if disk_norm_bound(&p.scale(lambda), r)? <= delta {
            return Ok(lambda);
        }
        lambda = round_for_exact_product(lambda * (1.0 - 1e-12), p)?;
    }
    Err(Error::Verification(format!(
        "could not certify disk bound {delta} for epsilon = {epsilon}"
    )))
}

/// Disk certificate recorded for the complex-neighborhood variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskCertificate {
    pub epsilon: f64,
    pub delta: f64,
    pub radius: f64,
    pub upper: f64,
}

/// A constructed member of the counterexample family.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleSpec {
    pub nodes: Vec<f64>,
    pub margin: f64,
    pub lambda: f64,
    pub p: Polynomial,
    pub a: Polynomial,
    pub norm_certificate: Enclosure,
    pub disk_certificate: Option<DiskCertificate>,
}

impl CounterexampleSpec {
    /// Chooses `lambda`, certifies the norm bound and checks that the exact
    /// root count of `a` on `[-1, 1]` equals the number of nodes.
    pub fn construct(nodes: &NodeSet, margin: f64) -> Result<CounterexampleSpec> {
        let (lambda, cert) = choose_lambda(nodes, margin)?;
        let spec = CounterexampleSpec {
            nodes: nodes.nodes().to_vec(),
            margin,
            lambda,
            p: nodes.polynomial().clone(),
            a: nodes.polynomial().scale(lambda),
            norm_certificate: cert,
            disk_certificate: None,
        };
        spec.check_zero_count()?;
        Ok(spec)
    }

    /// Variant with coefficients uniformly small on a complex neighborhood.
    pub fn construct_complex(
        nodes: &NodeSet,
        epsilon: f64,
        delta: f64,
    ) -> Result<CounterexampleSpec> {
        let lambda = choose_lambda_complex(nodes, epsilon, delta)?;
        let a = nodes.polynomial().scale(lambda);
        let radius = covering_radius(epsilon);
        let disk = DiskCertificate {
            epsilon,
            delta,
            radius,
            upper: disk_norm_bound(&a, radius)?,
        };
        let cert = norm_enclosure(&a, Interval::unit(), NORM_TOL)?;
        let spec = CounterexampleSpec {
            nodes: nodes.nodes().to_vec(),
            margin: 1.0 - delta,
            lambda,
            p: nodes.polynomial().clone(),
            a,
            norm_certificate: cert,
            disk_certificate: Some(disk),
        };
        spec.check_zero_count()?;
        Ok(spec)
    }

    pub fn d(&self) -> usize {
        self.nodes.len()
    }

    fn check_zero_count(&self) -> Result<()> {
        let count = certified_zero_count(self, Interval::unit())?;
        if count != self.d() {
            return Err(Error::Verification(format!(
                "a has {count} certified roots on [-1, 1], expected {}",
                self.d()
            )));
        }
        Ok(())
    }

    /// Recomputes the norm enclosure from `a`.
    pub fn verify_certificate(&self) -> Result<Enclosure> {
        norm_enclosure(&self.a, Interval::unit(), NORM_TOL)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SpecDocument {
            system: build_system(self),
            nodes: self.nodes.clone(),
            margin: self.margin,
            lambda: self.lambda,
            p: self.p.clone(),
            a: self.a.clone(),
            certificate: self.norm_certificate,
            disk_certificate: self.disk_certificate,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses a spec document, checking the node set and `a == lambda * p`
    /// and recomputing the norm certificate from the stored `a`.
    pub fn from_json(text: &str) -> Result<CounterexampleSpec> {
        let doc: SpecDocument = serde_json::from_str(text)?;
        let mut nodes = doc.nodes;
        check_count(nodes.len())?;
        validate_nodes(&mut nodes)?;
        check_margin(doc.margin)?;
        if !(doc.lambda > 0.0) {
            return Err(invalid("lambda must be positive"));
        }
        if !doc.p.scale(doc.lambda).approx_eq(&doc.a) {
            return Err(invalid("a is not lambda * p"));
        }
        let mut spec = CounterexampleSpec {
            nodes,
            margin: doc.margin,
            lambda: doc.lambda,
            p: doc.p,
            a: doc.a,
            norm_certificate: doc.certificate,
            disk_certificate: doc.disk_certificate,
        };
        spec.norm_certificate = spec.verify_certificate()?;
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize)]
struct SpecDocument {
    #[serde(flatten)]
    system: LinearSystem,
    nodes: Vec<f64>,
    margin: f64,
    lambda: f64,
    p: Polynomial,
    a: Polynomial,
    certificate: Enclosure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disk_certificate: Option<DiskCertificate>,
}

/// `x' = A(t) x` with polynomial entries, posed on `domain`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearSystem {
    dim: usize,
    domain: Interval,
    entries: Vec<Vec<Polynomial>>,
}

impl LinearSystem {
    pub fn new(entries: Vec<Vec<Polynomial>>, domain: Interval) -> Result<LinearSystem> {
        let dim = entries.len();
        if dim == 0 {
            return Err(invalid("system dimension must be >= 1"));
        }
        if let Some(row) = entries.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        Ok(LinearSystem {
            dim,
            domain,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn entry(&self, row: usize, col: usize) -> &Polynomial {
        &self.entries[row][col]
    }

    pub fn entries(&self) -> &[Vec<Polynomial>] {
        &self.entries
    }

    /// Writes `A(t) x` into `out`.
    pub fn apply(&self, t: f64, x: &[f64], out: &mut [f64]) {
        for (row, o) in self.entries.iter().zip(out.iter_mut()) {
            *o = row
                .iter()
                .zip(x)
                .filter(|(p, _)| !p.is_zero())
                .map(|(p, xi)| p.eval(t) * xi)
                .sum();
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<LinearSystem> {
        Ok(serde_json::from_str(text)?)
    }
}

impl<'de> Deserialize<'de> for LinearSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            domain: Interval,
            entries: Vec<Vec<Polynomial>>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.entries.len() != raw.dim {
            return Err(serde::de::Error::custom(format!(
                "dim is {} but entries has {} rows",
                raw.dim,
                raw.entries.len()
            )));
        }
        LinearSystem::new(raw.entries, raw.domain).map_err(serde::de::Error::custom)
    }
}

/// `a' + a^2`, expanded in double-double and rounded once per coefficient.
fn second_row_coefficient(a: &Polynomial) -> Polynomial {
    let coeffs: Vec<Ball> = a.coeffs().iter().map(|&c| Ball::exact(c)).collect();
    let q = ball::add_series(&ball::derive(&coeffs), &ball::convolve(&coeffs, &coeffs));
    Polynomial::new(q.iter().map(Ball::mid).collect())
}

/// The 2x2 system `[[a, 0], [a' + a^2, 0]]` on `[-1, 1]`.
pub fn build_system(spec: &CounterexampleSpec) -> LinearSystem {
    LinearSystem {
        dim: 2,
        domain: Interval::unit(),
        entries: vec![
            vec![spec.a.clone(), Polynomial::zero()],
            vec![second_row_coefficient(&spec.a), Polynomial::zero()],
        ],
    }
}

/// Closed-form solution at `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedFormState {
    pub t: f64,
    pub phi1: f64,
    pub phi2: f64,
}

/// `phi1 = exp(P(t))` with `P' = a`, `P(0) = 0`, and `phi2 = a(t) phi1`.
pub fn closed_form(spec: &CounterexampleSpec, t: f64) -> ClosedFormState {
    let phi1 = spec.a.antiderivative().eval(t).exp();
    ClosedFormState {
        t,
        phi1,
        phi2: spec.a.eval(t) * phi1,
    }
}

/// Number of zeros of `phi2` in `(start, end]`.
///
/// `phi1` is positive, so the zeros of `phi2 = a phi1` are those of `a`; they
/// are counted exactly with a Sturm sequence.
pub fn certified_zero_count(spec: &CounterexampleSpec, interval: Interval) -> Result<usize> {
    if !Interval::unit().contains_interval(&interval) {
        return Err(invalid(format!(
            "interval [{}, {}] is not inside [-1, 1]",
            interval.start, interval.end
        )));
    }
    sturm_count(&spec.a, interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Dense scan of `|a| + |a' + a^2|`, independent of the enclosure engine.
    fn scan_norm(a: &Polynomial, n: usize) -> f64 {
        let da = a.derivative();
        (0..=n)
            .map(|i| {
                let t = -1.0 + 2.0 * i as f64 / n as f64;
                let v = a.eval(t);
                v.abs() + (da.eval(t) + v * v).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn chebyshev_monic_is_exact_and_matches_nodes() {
        let p = chebyshev_monic(5).unwrap();
        assert_eq!(p.coeffs(), &[0.0, 0.3125, 0.0, -1.25, 0.0, 1.0]);
        let nodes = chebyshev_nodes(5);
        for t in nodes {
            assert!(p.eval(t).abs() < 1e-15);
        }
        let p50 = chebyshev_monic(50).expect("T_50 coefficients fit in f64");
        assert_eq!(p50.degree(), Some(50));
        assert_eq!(p50.leading_coeff(), 1.0);
        assert!(chebyshev_monic(200).is_none());
    }

    #[test]
    fn node_validation() {
        assert!(NodeSet::explicit(vec![]).is_err());
        assert!(NodeSet::explicit(vec![1.5]).is_err());
        assert!(NodeSet::explicit(vec![0.1, 0.1 + 1e-12]).is_err());
        assert!(NodeSet::explicit(vec![0.1, 0.1 + 1e-8]).is_ok());
        assert!(NodeSet::chebyshev(0).is_err());
        let ns = NodeSet::explicit(vec![0.5, -0.5, 0.0]).unwrap();
        assert_eq!(ns.nodes(), &[-0.5, 0.0, 0.5]);
        let u = NodeSet::uniform(4).unwrap();
        assert_eq!(u.nodes(), &[-0.75, -0.25, 0.25, 0.75]);
    }

    #[test]
    fn choose_lambda_single_node() {
        // S0 = S1 = 1: lambda = (-2 + sqrt(4 + 4 * 0.99)) / 2
        let expected = (-2.0 + (4.0f64 + 4.0 * 0.99).sqrt()) / 2.0;
        let ns = NodeSet::explicit(vec![0.0]).unwrap();
        let (lambda, cert) = choose_lambda(&ns, 0.01).unwrap();
        assert_relative_eq!(lambda, expected, max_relative = 1e-12);
        assert_relative_eq!(lambda, 0.4106736, max_relative = 1e-6);
        let oracle = scan_norm(&ns.polynomial().scale(lambda), 1_000_000);
        assert!(oracle <= 0.99 + 1e-12);
        assert!(cert.lower <= oracle + 1e-12 && oracle <= cert.upper);
        assert!(cert.upper <= 1.0 - 0.005);
    }

    #[test]
    fn choose_lambda_vanishes_as_margin_approaches_one() {
        let ns = NodeSet::explicit(vec![0.0]).unwrap();
        let (l1, _) = choose_lambda(&ns, 0.999).unwrap();
        let (l2, _) = choose_lambda(&ns, 0.999999).unwrap();
        assert!(l2 < l1 && l2 > 0.0 && l2 < 1e-5);
    }

    #[test]
    fn choose_lambda_is_monotone_in_margin() {
        let ns = NodeSet::chebyshev(4).unwrap();
        let lambdas: Vec<f64> = [0.01, 0.1, 0.3, 0.6, 0.9]
            .iter()
            .map(|&m| choose_lambda(&ns, m).unwrap().0)
            .collect();
        assert!(lambdas.windows(2).all(|w| w[1] < w[0]), "{lambdas:?}");
    }

    #[test]
    fn choose_lambda_rejects_bad_margin() {
        let ns = NodeSet::chebyshev(2).unwrap();
        for m in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(choose_lambda(&ns, m).is_err());
        }
    }

    #[test]
    fn five_chebyshev_nodes_certify() {
        let ns = NodeSet::chebyshev(5).unwrap();
        let (lambda, cert) = choose_lambda(&ns, 0.01).unwrap();
        assert!(lambda > 0.0);
        assert!(cert.upper < 1.0);
        let oracle = scan_norm(&ns.polynomial().scale(lambda), 1_000_000);
        assert!(oracle <= cert.upper);
        assert!(cert.lower <= oracle + 1e-9);
    }

    #[test]
    fn complex_lambda_single_node() {
        // r = sqrt(1.21 + 0.01), D0 = r, D1 = 1; positive root of
        // lambda r + lambda + lambda^2 r^2 = 0.01
        let r = (1.22f64).sqrt();
        let expected = (-(r + 1.0) + ((r + 1.0) * (r + 1.0) + 0.04 * r * r).sqrt()) / (2.0 * r * r);
        assert_relative_eq!(expected, 0.0047386, max_relative = 1e-4);
        let ns = NodeSet::explicit(vec![0.0]).unwrap();
        let lambda = choose_lambda_complex(&ns, 0.1, 0.01).unwrap();
        assert_relative_eq!(lambda, expected, max_relative = 1e-9);
        // boundary sampling oracle on |z| = r
        let a = ns.polynomial().scale(lambda);
        let worst = (0..10_000)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 10_000.0;
                let (zr, zi) = (r * th.cos(), r * th.sin());
                // a = lambda z, a' + a^2 = lambda + lambda^2 z^2
                let abs_a = lambda * r;
                let (sr, si) = (zr * zr - zi * zi, 2.0 * zr * zi);
                let (qr, qi) = (lambda + lambda * lambda * sr, lambda * lambda * si);
                abs_a + (qr * qr + qi * qi).sqrt()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 0.01);
        assert!(disk_norm_bound(&a, covering_radius(0.1)).unwrap() <= 0.01);
    }

    #[test]
    fn complex_lambda_is_dominated_by_real_lambda() {
        // The disk bound dominates the interval bound, so the complex choice
        // is never larger; for the single node at 0 they coincide in the limit.
        let ns = NodeSet::explicit(vec![0.0]).unwrap();
        let complex = choose_lambda_complex(&ns, 1e-9, 1.0 - 1e-9).unwrap();
        let (real, _) = choose_lambda(&ns, 1e-9).unwrap();
        assert!(complex <= real);
        assert_relative_eq!(complex, real, max_relative = 1e-6);
        let ns = NodeSet::explicit(vec![-0.5, 0.5]).unwrap();
        let complex = choose_lambda_complex(&ns, 1e-6, 0.99).unwrap();
        let (real, _) = choose_lambda(&ns, 0.01).unwrap();
        assert!(complex <= real);
    }

    #[test]
    fn complex_lambda_two_nodes() {
        let ns = NodeSet::explicit(vec![-0.5, 0.5]).unwrap();
        let lambda = choose_lambda_complex(&ns, 0.5, 0.1).unwrap();
        assert!(lambda > 0.0);
        let a = ns.polynomial().scale(lambda);
        let r = covering_radius(0.5);
        assert!(disk_norm_bound(&a, r).unwrap() <= 0.1);
        // a = lambda (z^2 - 1/4), a' = 2 lambda z
        let worst = (0..10_000)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 10_000.0;
                let (zr, zi) = (r * th.cos(), r * th.sin());
                let (ar, ai) = (lambda * (zr * zr - zi * zi - 0.25), lambda * 2.0 * zr * zi);
                let (qr, qi) = (
                    2.0 * lambda * zr + ar * ar - ai * ai,
                    2.0 * lambda * zi + 2.0 * ar * ai,
                );
                (ar * ar + ai * ai).sqrt() + (qr * qr + qi * qi).sqrt()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 0.1);
    }

    #[test]
    fn complex_lambda_rejects_bad_arguments() {
        let ns = NodeSet::chebyshev(2).unwrap();
        assert!(choose_lambda_complex(&ns, 0.0, 0.5).is_err());
        assert!(choose_lambda_complex(&ns, 0.1, 1.0).is_err());
        assert!(choose_lambda_complex(&ns, 0.1, 0.0).is_err());
    }

    #[test]
    fn build_system_single_node() {
        let ns = NodeSet::explicit(vec![0.0]).unwrap();
        let spec = CounterexampleSpec::construct(&ns, 0.01).unwrap();
        let l = spec.lambda;
        let sys = build_system(&spec);
        assert_eq!(sys.dim(), 2);
        assert_eq!(sys.entry(0, 0).coeffs(), &[0.0, l]);
        let q = sys.entry(1, 0).coeffs();
        assert_eq!(q.len(), 3);
        assert_eq!(q[0], l);
        assert_eq!(q[1], 0.0);
        assert_relative_eq!(q[2], l * l, max_relative = 1e-15);
        assert!(sys.entry(0, 1).is_zero());
        assert!(sys.entry(1, 1).is_zero());
    }

    #[test]
    fn construction_invariants_hold_for_chebyshev_family() {
        for d in 1..=8 {
            let spec =
                CounterexampleSpec::construct(&NodeSet::chebyshev(d).unwrap(), 0.01).unwrap();
            assert!(spec.norm_certificate.upper < 1.0);
            assert_eq!(spec.a, spec.p.scale(spec.lambda));
            assert_eq!(certified_zero_count(&spec, Interval::unit()).unwrap(), d);
            // closed form consistency on a grid
            let u = sup_abs_antiderivative(&spec);
            for i in 0..=1000 {
                let t = -1.0 + 2.0 * i as f64 / 1000.0;
                let s = closed_form(&spec, t);
                assert!(s.phi1 > 0.0);
                assert!(s.phi1 >= (-u).exp() && s.phi1 <= u.exp());
                if spec.a.eval(t) != 0.0 {
                    assert_relative_eq!(s.phi2 / s.phi1, spec.a.eval(t), max_relative = 1e-12);
                }
            }
        }
    }

    fn sup_abs_antiderivative(spec: &CounterexampleSpec) -> f64 {
        crate::polynomial::sup_abs_on_interval(&spec.a.antiderivative(), Interval::unit(), 1e-9)
            .unwrap()
            .upper
    }

    #[test]
    fn closed_form_examples() {
        let ns = NodeSet::explicit(vec![0.0]).unwrap();
        let spec = CounterexampleSpec::construct(&ns, 0.01).unwrap();
        let at0 = closed_form(&spec, 0.0);
        assert_eq!(at0.phi1, 1.0);
        assert_eq!(at0.phi2, 0.0);
        // P(t) = lambda t^2 / 2
        let at1 = closed_form(&spec, 1.0);
        assert_relative_eq!(at1.phi1, (spec.lambda / 2.0).exp(), max_relative = 1e-15);
        assert_relative_eq!(at1.phi1, 1.2279386, max_relative = 1e-6);
        assert_relative_eq!(at1.phi2, 0.5042819, max_relative = 1e-6);
    }

    #[test]
    fn differential_identity_by_finite_differences() {
        let spec = CounterexampleSpec::construct(&NodeSet::chebyshev(6).unwrap(), 0.01).unwrap();
        let q = build_system(&spec).entry(1, 0).clone();
        let h = 1e-6;
        for i in 1..40 {
            let t = -0.95 + 1.9 * i as f64 / 40.0;
            let fd = (closed_form(&spec, t + h).phi2 - closed_form(&spec, t - h).phi2) / (2.0 * h);
            let rhs = q.eval(t) * closed_form(&spec, t).phi1;
            assert!(
                (fd - rhs).abs() <= 1e-6 * rhs.abs().max(1e-3),
                "t={t} fd={fd} rhs={rhs}"
            );
        }
    }

    #[test]
    fn certified_zero_count_examples() {
        let spec =
            CounterexampleSpec::construct(&NodeSet::explicit(vec![-0.5, 0.0, 0.5]).unwrap(), 0.01)
                .unwrap();
        assert_eq!(certified_zero_count(&spec, Interval::unit()).unwrap(), 3);
        let spec =
            CounterexampleSpec::construct(&NodeSet::explicit(vec![0.9]).unwrap(), 0.01).unwrap();
        assert_eq!(
            certified_zero_count(&spec, Interval::new(-1.0, 0.0).unwrap()).unwrap(),
            0
        );
        assert!(certified_zero_count(&spec, Interval::new(-2.0, 0.0).unwrap()).is_err());
        let spec = CounterexampleSpec::construct(&NodeSet::chebyshev(10).unwrap(), 0.01).unwrap();
        assert_eq!(certified_zero_count(&spec, Interval::unit()).unwrap(), 10);
    }

    #[test]
    fn counterexample_json_round_trip_reverifies() {
        let spec = CounterexampleSpec::construct(&NodeSet::chebyshev(3).unwrap(), 0.01).unwrap();
        let text = spec.to_json().unwrap();
        let back = CounterexampleSpec::from_json(&text).unwrap();
        assert_eq!(back.nodes, spec.nodes);
        assert_eq!(back.lambda, spec.lambda);
        assert_eq!(back.a, spec.a);
        assert!((back.norm_certificate.upper - spec.norm_certificate.upper).abs() <= 1e-12);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(v["domain"], serde_json::json!([-1.0, 1.0]));
        assert!(v["certificate"]["upper"].as_f64().unwrap() < 1.0);
    }

    #[test]
    fn counterexample_json_rejects_inconsistent_a() {
        let spec = CounterexampleSpec::construct(&NodeSet::chebyshev(2).unwrap(), 0.01).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&spec.to_json().unwrap()).unwrap();
        v["lambda"] = serde_json::json!(spec.lambda * 2.0);
        assert!(CounterexampleSpec::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn system_json_round_trip() {
        let spec = CounterexampleSpec::construct(&NodeSet::chebyshev(3).unwrap(), 0.01).unwrap();
        let sys = build_system(&spec);
        let back = LinearSystem::from_json(&sys.to_json().unwrap()).unwrap();
        assert_eq!(back, sys);
        let bad = r#"{"dim": 2, "domain": [-1, 1], "entries": [[[1], [0]]]}"#;
        assert!(LinearSystem::from_json(bad).is_err());
        let bad_domain = r#"{"dim": 1, "domain": [1, -1], "entries": [[[1]]]}"#;
        assert!(LinearSystem::from_json(bad_domain).is_err());
    }
}
