//! Batch experiments behind the command-line tool.
//!
//! Every experiment is deterministic: work items run in parallel but results
//! are assembled in index order, and random trials draw from a ChaCha stream
//! selected by `(seed, trial index)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{certify_coefficient_bound, zero_count_bound, Verdict};
use crate::counterexample::{
    build_system, certified_zero_count, closed_form, CounterexampleSpec, NodeSet, NodeStrategy,
};
use crate::error::{invalid, Error, Result};
use crate::ode::{
    count_sign_changes, integrate_linear, integrate_scalar_ode, DenseSolution, IntegratorConfig,
};
use crate::polynomial::{sup_abs_on_interval, Interval, Polynomial};

/// Band around zero treated as "possibly zero" by the sign-change scan.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Index of the solution component that carries the zeros (`phi2`).
pub const OSCILLATING_COMPONENT: usize = 1;

/// Largest order accepted by the stress experiment.
pub const MAX_STRESS_ORDER: usize = 4;

/// Largest coefficient degree sampled by the stress experiment.
pub const STRESS_DEGREE: usize = 4;

/// Integrates the counterexample from its closed-form state at `t = -1`.
pub fn integrate_counterexample(
    spec: &CounterexampleSpec,
    config: &IntegratorConfig,
) -> Result<DenseSolution> {
    let start = closed_form(spec, -1.0);
    integrate_linear(
        &build_system(spec),
        &[start.phi1, start.phi2],
        Interval::unit(),
        config,
    )
}

/// Largest relative deviation `max_i |x_i - phi_i| / max_i |phi_i|` over
/// `points` equally spaced times in `[-1, 1]`, for the numeric solution.
pub fn closed_form_deviation(
    spec: &CounterexampleSpec,
    sol: &DenseSolution,
    points: usize,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..points {
        let t = -1.0 + 2.0 * k as f64 / (points - 1).max(1) as f64;
        let exact = closed_form(spec, t);
        let x = sol.eval(t)?;
        let scale = exact.phi1.abs().max(exact.phi2.abs());
        let err = (x[0] - exact.phi1).abs().max((x[1] - exact.phi2).abs());
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

/// One line of the demonstration table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoRow {
    pub d: usize,
    pub lambda: f64,
    pub norm_upper: f64,
    pub zeros_certified: usize,
    pub zeros_numeric: usize,
    /// Zero bound for a second-order scalar equation with `C = 1` on `[-1, 1]`.
    pub theorem1_reference: f64,
}

impl DemoRow {
    /// Descriptions of every violated row invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.zeros_certified != self.d {
            out.push(format!(
                "d={}: certified zero count {}",
                self.d, self.zeros_certified
            ));
        }
        if self.zeros_numeric != self.zeros_certified {
            out.push(format!(
                "d={}: numeric zero count {} differs from certified {}",
                self.d, self.zeros_numeric, self.zeros_certified
            ));
        }
        if !(self.norm_upper < 1.0) {
            out.push(format!(
                "d={}: norm bound {} is not below 1",
                self.d, self.norm_upper
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct DemoOptions {
    pub d_max: usize,
    pub strategy: NodeStrategy,
    pub margin: f64,
    pub config: IntegratorConfig,
    pub zero_tol: f64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            d_max: 10,
            strategy: NodeStrategy::Chebyshev,
            margin: crate::counterexample::DEFAULT_MARGIN,
            config: IntegratorConfig::default(),
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

/// Builds, certifies, integrates and counts for one `d`.
pub fn demo_row(d: usize, opts: &DemoOptions) -> Result<DemoRow> {
    let nodes = NodeSet::new(&opts.strategy, d)?;
    let spec = CounterexampleSpec::construct(&nodes, opts.margin)?;
    let sol = integrate_counterexample(&spec, &opts.config)?;
    let numeric = count_sign_changes(&sol, OSCILLATING_COMPONENT, Interval::unit(), opts.zero_tol)?;
    Ok(DemoRow {
        d,
        lambda: spec.lambda,
        norm_upper: spec.norm_certificate.upper,
        zeros_certified: certified_zero_count(&spec, Interval::unit())?,
        zeros_numeric: numeric.count,
        theorem1_reference: zero_count_bound(2, 1.0, -1.0, 1.0)?,
    })
}

/// Rows for `d = 1..=d_max`, in order of `d`.
pub fn run_demo(opts: &DemoOptions) -> Result<Vec<DemoRow>> {
    if opts.d_max < 1 {
        return Err(invalid("d-max must be >= 1"));
    }
    if matches!(opts.strategy, NodeStrategy::Explicit(_)) {
        return Err(invalid(
            "demo generates its own nodes; use chebyshev or uniform",
        ));
    }
    (1..=opts.d_max)
        .into_par_iter()
        .map(|d| demo_row(d, opts).map_err(|e| context(e, &format!("d = {d}"))))
        .collect()
}

fn context(e: Error, what: &str) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{what}: {m}")),
        Error::Verification(m) => Error::Verification(format!("{what}: {m}")),
        other => other,
    }
}

/// Writes rows as CSV with a header.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of one random scalar equation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressTrial {
    pub trial: u64,
    pub n: usize,
    pub count: usize,
    pub bound: f64,
    pub ratio: f64,
    pub violation: bool,
}

/// Summary of a stress run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressReport {
    pub trials: u64,
    pub seed: u64,
    pub n_max: usize,
    pub max_observed_ratio: f64,
    pub max_count: usize,
    pub violations: usize,
}

#[derive(Clone, Debug)]
pub struct StressOptions {
    pub trials: u64,
    pub n_max: usize,
    pub seed: u64,
    pub config: IntegratorConfig,
    pub zero_tol: f64,
}

impl Default for StressOptions {
    fn default() -> Self {
        StressOptions {
            trials: 1000,
            n_max: MAX_STRESS_ORDER,
            seed: 42,
            config: IntegratorConfig::default(),
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

/// Random polynomial of degree at most `STRESS_DEGREE` with coefficients in
/// `[-1, 1]`, rescaled so that its certified sup norm on `[-1, 1]` is at most 1.
pub fn sample_unit_coefficient<R: Rng>(rng: &mut R) -> Result<Polynomial> {
    let degree = rng.gen_range(0..=STRESS_DEGREE);
    let p = Polynomial::new((0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect());
    if p.is_zero() {
        return Ok(p);
    }
    let upper = sup_abs_on_interval(&p, Interval::unit(), 1e-12)?.upper;
    // Rounding in 1 / upper and in the scaled coefficients can push the
    // recomputed bound a hair above 1; back off geometrically until it holds.
    let mut shrink = 0.0;
    for _ in 0..32 {
        let q = p.scale((1.0 - shrink) / upper);
        let cert =
            certify_coefficient_bound(std::slice::from_ref(&q), 1.0, Interval::unit(), 1e-12)?;
        if cert.verdict == Verdict::Certified {
            return Ok(q);
        }
        shrink = if shrink == 0.0 {
            f64::EPSILON
        } else {
            2.0 * shrink
        };
    }
    Err(Error::Verification(
        "could not rescale coefficient below 1".into(),
    ))
}

/// Draws trial `trial` of the stress corpus: order, coefficients `a_1..a_n`
/// and a unit-norm initial vector.
pub fn sample_equation(seed: u64, trial: u64, n_max: usize) -> Result<(Vec<Polynomial>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let n = rng.gen_range(1..=n_max);
    let coeffs = (0..n)
        .map(|_| sample_unit_coefficient(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut y0: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        y0[0] = 1.0;
    } else {
        y0.iter_mut().for_each(|v| *v /= norm);
    }
    Ok((coeffs, y0))
}

fn stress_trial(trial: u64, opts: &StressOptions) -> Result<StressTrial> {
    let (coeffs, y0) = sample_equation(opts.seed, trial, opts.n_max)?;
    let n = coeffs.len();
    let sol = integrate_scalar_ode(&coeffs, &y0, Interval::unit(), &opts.config)?;
    let count = count_sign_changes(&sol, 0, Interval::unit(), opts.zero_tol)?.count;
    let bound = zero_count_bound(n, 1.0, -1.0, 1.0)?;
    Ok(StressTrial {
        trial,
        n,
        count,
        bound,
        ratio: count as f64 / bound,
        violation: count as f64 > bound + 1e-12,
    })
}

/// Runs `trials` random equations and checks each zero count against the bound.
pub fn run_stress(opts: &StressOptions) -> Result<(StressReport, Vec<StressTrial>)> {
    if opts.trials < 1 {
        return Err(invalid("trials must be >= 1"));
    }
    if !(1..=MAX_STRESS_ORDER).contains(&opts.n_max) {
        return Err(invalid(format!("n-max must lie in 1..={MAX_STRESS_ORDER}")));
    }
    let trials: Vec<StressTrial> = (0..opts.trials)
        .into_par_iter()
        .map(|i| stress_trial(i, opts).map_err(|e| context(e, &format!("trial {i}"))))
        .collect::<Result<_>>()?;
    let report = StressReport {
        trials: opts.trials,
        seed: opts.seed,
        n_max: opts.n_max,
        max_observed_ratio: trials.iter().map(|t| t.ratio).fold(0.0, f64::max),
        max_count: trials.iter().map(|t| t.count).max().unwrap_or(0),
        violations: trials.iter().filter(|t| t.violation).count(),
    };
    Ok((report, trials))
}

/// Result of the complex-neighborhood construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexReport {
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    pub radius: f64,
    pub disk_upper: f64,
    pub norm_upper: f64,
    pub zeros_certified: usize,
}

pub fn run_complex(
    nodes: &NodeSet,
    epsilon: f64,
    delta: f64,
) -> Result<(ComplexReport, CounterexampleSpec)> {
    let spec = CounterexampleSpec::construct_complex(nodes, epsilon, delta)?;
    let disk = spec
        .disk_certificate
        .expect("complex construction records a disk certificate");
    let report = ComplexReport {
        d: spec.d(),
        epsilon,
        delta,
        lambda: spec.lambda,
        radius: disk.radius,
        disk_upper: disk.upper,
        norm_upper: spec.norm_certificate.upper,
        zeros_certified: certified_zero_count(&spec, Interval::unit())?,
    };
    Ok((report, spec))
}
