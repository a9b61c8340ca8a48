//! Conditional laws of the control-free state `ζ_t` given a label history.
//!
//! Histories of depth at most one have closed forms; deeper histories fall
//! back to a tabulated density.

use crate::error::{Error, Result};
use crate::gauss::{trunc_moments, two_step_cell_integrals, Interval, Normal, TruncatedMoments, std_mass};

use super::grid::{GridDensity, DEFAULT_POINTS};

const GRID_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Belief {
    Gaussian(Normal),
    /// `law` conditioned on `cell`.
    Truncated { law: Normal, cell: Interval },
    /// Law of `a ζ0 + w0` given `ζ0 in cell0`, `ζ0 ~ prior`.
    TwoStepPredictive { prior: Normal, cell0: Interval, a: f64, sigma_w: f64 },
    /// The predictive law above further conditioned on `cell1`.
    TwoStepPosterior { prior: Normal, cell0: Interval, a: f64, sigma_w: f64, cell1: Interval },
    Grid(GridDensity),
}

impl Belief {
    /// `P[cell]` under this law and the conditional moments on it.
    pub fn cell_moments(&self, cell: Interval) -> TruncatedMoments {
        match self {
            Belief::Gaussian(n) => trunc_moments(*n, cell),
            Belief::Truncated { law, cell: c } => {
                let base = law.mass(*c);
                let t = trunc_moments(*law, c.intersect(cell));
                if t.is_empty() || !(base > 0.0) {
                    return TruncatedMoments::empty();
                }
                TruncatedMoments { prob: (t.prob / base).min(1.0), ..t }
            }
            Belief::TwoStepPredictive { prior, cell0, a, sigma_w } => {
                let base = prior.mass(*cell0);
                let j = two_step_cell_integrals(*prior, *a, 0.0, *sigma_w, *cell0, cell);
                TruncatedMoments::from_partials(j.p / base, j.d1 / base, j.d2 / base)
            }
            Belief::TwoStepPosterior { prior, cell0, a, sigma_w, cell1 } => {
                let base = two_step_cell_integrals(*prior, *a, 0.0, *sigma_w, *cell0, *cell1).p;
                let j = two_step_cell_integrals(*prior, *a, 0.0, *sigma_w, *cell0, cell1.intersect(cell));
                TruncatedMoments::from_partials(j.p / base, j.d1 / base, j.d2 / base)
            }
            Belief::Grid(g) => g.cell_moments(cell),
        }
    }

    pub fn moments(&self) -> TruncatedMoments {
        self.cell_moments(Interval::REAL_LINE)
    }

    pub fn mean(&self) -> f64 {
        match self {
            Belief::Gaussian(n) => n.mu,
            Belief::Grid(g) => g.mean(),
            _ => self.moments().mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Belief::Gaussian(n) => n.variance(),
            Belief::Grid(g) => g.variance(),
            _ => self.moments().variance(),
        }
    }

    /// Conditions on `ζ in cell`.
    pub fn condition(&self, cell: Interval) -> Result<Belief> {
        let m = self.cell_moments(cell);
        if m.is_empty() {
            return Err(Error::InconsistentObservations(format!("cell {cell:?} has zero probability")));
        }
        Ok(match self {
            Belief::Gaussian(n) if n.is_point() => Belief::Gaussian(*n),
            Belief::Gaussian(n) => Belief::Truncated { law: *n, cell },
            Belief::Truncated { law, cell: c } => Belief::Truncated { law: *law, cell: c.intersect(cell) },
            &Belief::TwoStepPredictive { prior, cell0, a, sigma_w } => {
                Belief::TwoStepPosterior { prior, cell0, a, sigma_w, cell1: cell }
            }
            &Belief::TwoStepPosterior { prior, cell0, a, sigma_w, cell1 } => {
                Belief::TwoStepPosterior { prior, cell0, a, sigma_w, cell1: cell1.intersect(cell) }
            }
            Belief::Grid(g) => Belief::Grid(g.condition(cell)),
        })
    }

    /// Law of `a ζ + w`, `w ~ N(0, sigma_w)`.
    pub fn propagate(&self, a: f64, sigma_w: f64) -> Belief {
        if a == 0.0 {
            return Belief::Gaussian(Normal { mu: 0.0, sigma: sigma_w });
        }
        match self {
            Belief::Gaussian(n) => Belief::Gaussian(Normal {
                mu: a * n.mu,
                sigma: (a * a * n.variance() + sigma_w * sigma_w).sqrt(),
            }),
            Belief::Truncated { law, cell } => {
                if law.is_point() {
                    return Belief::Gaussian(*law).propagate(a, sigma_w);
                }
                if sigma_w == 0.0 {
                    let mapped = Normal { mu: a * law.mu, sigma: a.abs() * law.sigma };
                    return Belief::Truncated { law: mapped, cell: cell.affine(a, 0.0) };
                }
                if *cell == Interval::REAL_LINE {
                    return Belief::Gaussian(*law).propagate(a, sigma_w);
                }
                Belief::TwoStepPredictive { prior: *law, cell0: *cell, a, sigma_w }
            }
            Belief::Grid(g) => Belief::Grid(g.propagate(a, sigma_w, DEFAULT_POINTS, GRID_WIDTH)),
            Belief::TwoStepPredictive { .. } | Belief::TwoStepPosterior { .. } => {
                Belief::Grid(self.to_grid().propagate(a, sigma_w, DEFAULT_POINTS, GRID_WIDTH))
            }
        }
    }

    /// Tabulates the closed-form two-step density.
    fn to_grid(&self) -> GridDensity {
        let (prior, cell0, a, sw, cell1) = match *self {
            Belief::TwoStepPredictive { prior, cell0, a, sigma_w } => (prior, cell0, a, sigma_w, Interval::REAL_LINE),
            Belief::TwoStepPosterior { prior, cell0, a, sigma_w, cell1 } => (prior, cell0, a, sigma_w, cell1),
            _ => unreachable!("closed-form two-step belief expected"),
        };
        let m = self.moments();
        let sd = m.variance().sqrt();
        let lo = (m.mean - GRID_WIDTH * sd).max(cell1.lo.max(m.mean - 40.0 * sd));
        let hi = (m.mean + GRID_WIDTH * sd).min(cell1.hi.min(m.mean + 40.0 * sd));
        let (lo, hi) = widen_if_thin(lo, hi, cell1, m.mean, sd);
        // ζ1 density: N(a μ0, σ̃) times P[ζ0 in cell0 | ζ1].
        let st = (a * a * prior.variance() + sw * sw).sqrt();
        let sbar = prior.sigma * sw / st;
        let b = a * prior.sigma / sw;
        let a_hi = (cell0.hi - prior.mu) / sbar;
        let a_lo = (cell0.lo - prior.mu) / sbar;
        let marg = Normal { mu: a * prior.mu, sigma: st };
        GridDensity::from_fn(lo, hi, DEFAULT_POINTS, cell1, |s| {
            let z = (s - marg.mu) / st;
            marg.pdf(s) * std_mass(a_lo - b * z, a_hi - b * z)
        })
    }
}

/// Keeps a tabulation range at least a few standard deviations wide when a
/// truncation edge cuts it.
fn widen_if_thin(lo: f64, hi: f64, cell: Interval, mean: f64, sd: f64) -> (f64, f64) {
    if hi > lo {
        return (lo, hi);
    }
    let lo = cell.lo.max(mean - sd);
    let hi = cell.hi.min(mean + sd);
    (lo, hi.max(lo + 1e-9))
}
