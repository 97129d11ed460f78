//! Adaptive Dormand–Prince integration of `x' = A(t) x` with dense output.

mod dopri5;
mod zeros;

use std::io::Write;

use crate::counterexample::LinearSystem;
use crate::error::{invalid, Error, Result};
use crate::polynomial::{Interval, Polynomial};

pub use zeros::{count_sign_changes, refine_zero, ZeroCountReport, ZeroFlag};

/// Step-size control parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 1e-2,
            initial_step: 1e-4,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorConfig {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.rtol) || !positive(self.atol) {
            return Err(invalid(format!(
                "rtol and atol must be positive, got {} and {}",
                self.rtol, self.atol
            )));
        }
        if !positive(self.initial_step)
            || !(self.initial_step <= self.max_step)
            || !self.max_step.is_finite()
        {
            return Err(invalid(format!(
                "need 0 < initial_step <= max_step, got {} and {}",
                self.initial_step, self.max_step
            )));
        }
        Ok(())
    }
}

/// One accepted step with the coefficients of its continuous extension.
#[derive(Clone, Debug)]
struct Step {
    t0: f64,
    t1: f64,
    /// Five blocks of `dim` coefficients.
    cont: Vec<f64>,
}

/// Piecewise quartic interpolant of an accepted trajectory.
#[derive(Clone, Debug)]
pub struct DenseSolution {
    dim: usize,
    domain: Interval,
    max_step: f64,
    steps: Vec<Step>,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Step boundaries, starting at the left end of the domain.
    pub fn knots(&self) -> Vec<f64> {
        std::iter::once(self.domain.start)
            .chain(self.steps.iter().map(|s| s.t1))
            .collect()
    }

    fn step_index(&self, t: f64) -> usize {
        self.steps
            .partition_point(|s| s.t1 < t)
            .min(self.steps.len() - 1)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= self.domain.start && t <= self.domain.end {
            Ok(())
        } else {
            Err(invalid(format!(
                "t = {t} is outside [{}, {}]",
                self.domain.start, self.domain.end
            )))
        }
    }

    /// Interpolated state at `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let step = &self.steps[self.step_index(t)];
        Ok((0..self.dim)
            .map(|i| interpolate(step, self.dim, i, t))
            .collect())
    }

    /// Interpolated value of one component (0-based) at `t`.
    pub fn eval_component(&self, t: f64, component: usize) -> Result<f64> {
        self.check_time(t)?;
        if component >= self.dim {
            return Err(invalid(format!(
                "component {} out of range 1..={}",
                component + 1,
                self.dim
            )));
        }
        Ok(self.component_at(t, component))
    }

    /// Unchecked variant used in inner loops.
    pub(crate) fn component_at(&self, t: f64, component: usize) -> f64 {
        interpolate(&self.steps[self.step_index(t)], self.dim, component, t)
    }

    /// Sample times used for zero scanning: every step cut into `per_step`
    /// equal pieces, restricted to `interval`.
    pub(crate) fn scan_points(&self, interval: Interval, per_step: usize) -> Vec<f64> {
        let mut pts = vec![interval.start];
        for s in &self.steps {
            if s.t1 <= interval.start || s.t0 >= interval.end {
                continue;
            }
            for k in 1..=per_step {
                let t = if k == per_step {
                    s.t1
                } else {
                    s.t0 + (s.t1 - s.t0) * k as f64 / per_step as f64
                };
                if t > *pts.last().expect("nonempty") && t < interval.end {
                    pts.push(t);
                }
            }
        }
        pts.push(interval.end);
        pts
    }

    /// Writes `samples + 1` equally spaced rows `t, x1, ..., xn`.
    pub fn write_csv<W: Write>(&self, out: W, samples: usize) -> Result<()> {
        let samples = samples.max(1);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for k in 0..=samples {
            let t = if k == samples {
                self.domain.end
            } else {
                self.domain.start + self.domain.len() * k as f64 / samples as f64
            };
            let mut row = vec![t.to_string()];
            row.extend(self.eval(t)?.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn interpolate(step: &Step, dim: usize, i: usize, t: f64) -> f64 {
    let h = step.t1 - step.t0;
    let s = ((t - step.t0) / h).clamp(0.0, 1.0);
    let c = |k: usize| step.cont[k * dim + i];
    let s1 = 1.0 - s;
    c(0) + s * (c(1) + s1 * (c(2) + s * (c(3) + s1 * c(4))))
}

/// Integrates `x' = A(t) x`, `x(interval.start) = x0`, across `interval`.
pub fn integrate_linear(
    system: &LinearSystem,
    x0: &[f64],
    interval: Interval,
    config: &IntegratorConfig,
) -> Result<DenseSolution> {
    if x0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: x0.len(),
        });
    }
    if !system.domain().contains_interval(&interval) {
        return Err(invalid(format!(
            "interval [{}, {}] is not inside the system domain",
            interval.start, interval.end
        )));
    }
    integrate(|t, x, out| system.apply(t, x, out), x0, interval, config)
}

/// Integrates `y^(n) + a_1 y^(n-1) + ... + a_n y = 0` in companion form
/// `(y, y', ..., y^(n-1))`. `a_coeffs[k]` is `a_(k+1)`; component 0 of the
/// result is `y`.
pub fn integrate_scalar_ode(
    a_coeffs: &[Polynomial],
    y_init: &[f64],
    interval: Interval,
    config: &IntegratorConfig,
) -> Result<DenseSolution> {
    let system = companion_system(a_coeffs, interval)?;
    integrate_linear(&system, y_init, interval, config)
}

/// Companion matrix: ones on the superdiagonal and last row `(-a_n, ..., -a_1)`.
pub fn companion_system(a_coeffs: &[Polynomial], domain: Interval) -> Result<LinearSystem> {
    let n = a_coeffs.len();
    if n == 0 {
        return Err(invalid("scalar equation needs order n >= 1"));
    }
    let mut entries = vec![vec![Polynomial::zero(); n]; n];
    for (i, row) in entries.iter_mut().enumerate().take(n - 1) {
        row[i + 1] = Polynomial::constant(1.0);
    }
    for j in 0..n {
        entries[n - 1][j] = a_coeffs[n - 1 - j].scale(-1.0);
    }
    LinearSystem::new(entries, domain)
}

fn integrate<F>(
    rhs: F,
    x0: &[f64],
    interval: Interval,
    config: &IntegratorConfig,
) -> Result<DenseSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    use dopri5::{A, C, D, E};

    config.validate()?;
    let interval = Interval::new(interval.start, interval.end)?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: interval.start });
    }
    let n = x0.len();
    let (t_end, span) = (interval.end, interval.len());

    let mut t = interval.start;
    let mut y = x0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    rhs(t, &y, &mut k[0]);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut h = config.initial_step.min(span);
    let mut steps = Vec::new();
    let mut last_nonfinite = false;

    while t < t_end {
        let last = t + h >= t_end || t_end - (t + h) < 1e-12 * span;
        if last {
            h = t_end - t;
        }
        if h <= 4.0 * f64::EPSILON * t.abs().max(span) {
            return Err(if last_nonfinite {
                Error::NonFiniteState { t }
            } else {
                Error::StepSizeUnderflow { t }
            });
        }

        for s in 1..7 {
            for i in 0..n {
                let acc: f64 = A[s - 1].iter().enumerate().map(|(j, a)| a * k[j][i]).sum();
                stage[i] = y[i] + h * acc;
            }
            rhs(t + C[s] * h, &stage, &mut k[s]);
        }
        // The last stage is evaluated at the fifth-order solution (FSAL).
        y_new.copy_from_slice(&stage);

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let scale = config.atol + config.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();
        last_nonfinite = !err.is_finite();

        if err.is_finite() && err <= 1.0 {
            let t1 = if last { t_end } else { t + h };
            let mut cont = vec![0.0; 5 * n];
            for i in 0..n {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[i] = y[i];
                cont[n + i] = ydiff;
                cont[2 * n + i] = bspl;
                cont[3 * n + i] = ydiff - h * k[6][i] - bspl;
                cont[4 * n + i] = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
            }
            steps.push(Step { t0: t, t1, cont });
            t = t1;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            let factor = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            h = (h * factor).min(config.max_step);
        } else {
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= factor;
        }
    }

    Ok(DenseSolution {
        dim: n,
        domain: interval,
        max_step: config.max_step,
        steps,
    })
}
