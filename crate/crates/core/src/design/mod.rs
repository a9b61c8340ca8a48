//! Encoder and controller design: the weighted distortion objective, its
//! constrained minimization, Lloyd-type stage encoders, event-trigger
//! envelopes, and the dual-effect diagnostics.

mod envelope;
mod gamma;
mod lloyd;
mod probe;

pub use envelope::{
    envelope_cost, optimize_envelope, symmetric_envelope, EnvelopeDesign, EnvelopeOptions, PreSample,
};
pub use gamma::{
    conditional_distortion, example1_curves, example1_curves_with, gamma1_example4, gamma_rc_ic, restricted_control_u1,
    terminal_control_cost, verify_ce_optimality, CeCheck, CeEncoder, Example1Curves, TwoStepSetup,
};
pub use lloyd::{greedy_stage_encoder, GreedyEncoder, LloydOptions, StageDesign, UniformEncoder};
pub use probe::{dual_effect_probe, ProbeBin, ProbeConfig, ProbeResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar objective sampled on a grid, with its grid minimizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub argmin: f64,
    pub min_value: f64,
}

impl GammaCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Self {
        let idx = grid_argmin(&grid, &values);
        let (argmin, min_value) = idx.map_or((f64::NAN, f64::NAN), |i| (grid[i], values[i]));
        GammaCurve { grid, values, argmin, min_value }
    }

    pub fn tabulate(grid: &[f64], f: impl Fn(f64) -> f64) -> Self {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid.to_vec(), values)
    }

    /// `max - min` over the grid.
    pub fn range(&self) -> f64 {
        let max = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        max - self.min_value
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Index of the smallest value; ties go to the smallest `|x|`, then the
/// smallest `x`.
fn grid_argmin(grid: &[f64], values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (&x, &v)) in grid.iter().zip(values).enumerate() {
        if !v.is_finite() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bx, bv) = (grid[b], values[b]);
                let tie = (v - bv).abs() <= 1e-14 * bv.abs().max(1.0);
                if (!tie && v < bv) || (tie && (x.abs() < bx.abs() || (x.abs() == bx.abs() && x < bx))) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// `n` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Points `lo, lo + step, ...` up to `hi` (inclusive within rounding).
pub fn grid_by_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|k| lo + k as f64 * step).collect()
}

/// Feasible set for a design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSet {
    Unconstrained,
    Interval { lo: f64, hi: f64 },
    Finite { values: Vec<f64> },
}

impl ConstraintSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConstraintSet::Unconstrained => Ok(()),
            ConstraintSet::Interval { lo, hi } if lo < hi => Ok(()),
            ConstraintSet::Interval { .. } => Err(Error::invalid("constraint", "interval needs lo < hi")),
            ConstraintSet::Finite { values } if !values.is_empty() && values.iter().all(|v| v.is_finite()) => Ok(()),
            ConstraintSet::Finite { .. } => Err(Error::invalid("constraint", "finite set must be nonempty and finite")),
        }
    }
}

/// Coarse search window for continuous minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchWindow {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimum {
    pub argmin: f64,
    pub min_value: f64,
}

pub const GOLDEN_TOL: f64 = 1e-8;

/// Minimizes `f` over the constraint set: a coarse scan of the window (clipped
/// to the interval, endpoints included) refined by golden section, or an
/// exhaustive pass over a finite set.
pub fn min_gamma(f: &dyn Fn(f64) -> f64, window: SearchWindow, constraint: &ConstraintSet) -> Result<Minimum> {
    constraint.validate()?;
    let (lo, hi) = match *constraint {
        ConstraintSet::Finite { ref values } => {
            let vals: Vec<f64> = values.iter().map(|&v| f(v)).collect();
            let i = grid_argmin(values, &vals)
                .ok_or_else(|| Error::EmptyFeasibleSet("objective not finite on the finite set".into()))?;
            return Ok(Minimum { argmin: values[i], min_value: vals[i] });
        }
        ConstraintSet::Unconstrained => (window.lo, window.hi),
        ConstraintSet::Interval { lo, hi } => (window.lo.max(lo), window.hi.min(hi)),
    };
    if !(lo <= hi) || !(window.step > 0.0) {
        return Err(Error::EmptyFeasibleSet(format!("search window [{lo}, {hi}]")));
    }
    let mut grid = grid_by_step(lo, hi, window.step);
    if *grid.last().unwrap() < hi {
        grid.push(hi);
    }
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let i = grid_argmin(&grid, &vals).ok_or_else(|| Error::EmptyFeasibleSet("objective not finite on grid".into()))?;
    let a = grid[i.saturating_sub(1)];
    let b = grid[(i + 1).min(grid.len() - 1)];
    let (x, v) = golden_section(f, a, b, GOLDEN_TOL);
    Ok(if v < vals[i] { Minimum { argmin: x, min_value: v } } else { Minimum { argmin: grid[i], min_value: vals[i] } })
}

/// Golden-section search on `[a, b]`; returns the best point seen.
pub fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    let (fa, fb) = (f(a), f(b));
    [(a, fa), (b, fb), (c, fc), (d, fd)]
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
}
