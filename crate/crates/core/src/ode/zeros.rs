//! Sign-change zero counting on a dense solution.

use serde::Serialize;

use super::DenseSolution;
use crate::error::{invalid, Error, Result};
use crate::polynomial::Interval;

/// Samples taken inside every accepted step.
const SAMPLES_PER_STEP: usize = 8;

/// Relative bisection width.
const REFINE_WIDTH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroFlag {
    /// Strict sign change with every bracketing sample outside `zero_tol`.
    Clean,
    /// Strict sign change, but some sample in the bracket was within
    /// `zero_tol` of zero; worth a closer look.
    NearTangency,
    /// The right end of the interval is within `zero_tol` of zero.
    Endpoint,
}

/// Zeros of one component on the half-open interval `(start, end]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroCountReport {
    /// 1-based, matching the `x1..xn` naming of exported columns.
    pub component: usize,
    pub interval: Interval,
    pub count: usize,
    pub locations: Vec<f64>,
    pub flags: Vec<ZeroFlag>,
    /// Touches of the zero band without a sign change; not counted.
    pub tangencies: Vec<f64>,
}

impl ZeroCountReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Counts strict sign changes of `component` (0-based) over `interval`.
///
/// The interpolant is sampled [`SAMPLES_PER_STEP`] times per accepted step;
/// every sign change between consecutive samples outside the band
/// `|v| <= zero_tol` is refined by bisection. Samples inside the band never
/// count by themselves, except at the right endpoint.
pub fn count_sign_changes(
    sol: &DenseSolution,
    component: usize,
    interval: Interval,
    zero_tol: f64,
) -> Result<ZeroCountReport> {
    if component >= sol.dim() {
        return Err(invalid(format!(
            "component {} out of range 1..={}",
            component + 1,
            sol.dim()
        )));
    }
    if !sol.domain().contains_interval(&interval) {
        return Err(invalid(format!(
            "interval [{}, {}] is not inside the solution domain",
            interval.start, interval.end
        )));
    }
    if !(zero_tol >= 0.0) {
        return Err(invalid(format!("zero_tol must be >= 0, got {zero_tol}")));
    }

    let width = REFINE_WIDTH * sol.domain().len();
    let mut locations = Vec::new();
    let mut flags = Vec::new();
    let mut tangencies = Vec::new();

    // Last sample outside the band, and the smallest in-band sample since.
    let mut anchor: Option<(f64, f64)> = None;
    let mut band: Option<(f64, f64)> = None;
    let points = sol.scan_points(interval, SAMPLES_PER_STEP);
    let last_index = points.len() - 1;
    for (idx, &t) in points.iter().enumerate() {
        let v = sol.component_at(t, component);
        if v.abs() <= zero_tol {
            if idx == last_index && idx > 0 {
                locations.push(t);
                flags.push(ZeroFlag::Endpoint);
            } else if idx > 0 && band.is_none_or(|(_, bv)| v.abs() < bv) {
                band = Some((t, v.abs()));
            }
            continue;
        }
        if let Some((ta, va)) = anchor {
            if va.signum() != v.signum() {
                locations.push(bisect(sol, component, ta, t, va, width));
                flags.push(if band.is_some() {
                    ZeroFlag::NearTangency
                } else {
                    ZeroFlag::Clean
                });
            } else if let Some((tb, _)) = band {
                tangencies.push(tb);
            }
        }
        anchor = Some((t, v));
        band = None;
    }

    Ok(ZeroCountReport {
        component: component + 1,
        interval,
        count: locations.len(),
        locations,
        flags,
        tangencies,
    })
}

/// Bisects on the interpolant until the bracket is narrower than `width`.
fn bisect(
    sol: &DenseSolution,
    component: usize,
    mut l: f64,
    mut r: f64,
    vl: f64,
    width: f64,
) -> f64 {
    let sl = vl.signum();
    while r - l > width {
        let m = l + 0.5 * (r - l);
        if m <= l || m >= r {
            break;
        }
        let vm = sol.component_at(m, component);
        if vm == 0.0 {
            return m;
        }
        if vm.signum() == sl {
            l = m;
        } else {
            r = m;
        }
    }
    l + 0.5 * (r - l)
}

/// Zero of `component` (0-based) inside a bracket with strictly opposite
/// endpoint signs, to within `1e-12` times the solution's domain length.
pub fn refine_zero(sol: &DenseSolution, component: usize, bracket: Interval) -> Result<f64> {
    let vl = sol.eval_component(bracket.start, component)?;
    let vr = sol.eval_component(bracket.end, component)?;
    if vl == 0.0 || vr == 0.0 || vl.signum() == vr.signum() {
        return Err(Error::InvalidBracket {
            left: bracket.start,
            right: bracket.end,
        });
    }
    let width = REFINE_WIDTH * sol.domain().len();
    Ok(bisect(
        sol,
        component,
        bracket.start,
        bracket.end,
        vl,
        width,
    ))
}
