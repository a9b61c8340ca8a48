//! Posterior inference of the state from quantized observations.

mod belief;
mod grid;
mod particle;
mod tree;

pub use belief::Belief;
pub use grid::GridDensity;
pub(crate) use grid::tabulated_moments;
pub use particle::{particle_posterior, ParticleCloud};
pub use tree::{
    pick, ControlPolicy, EncoderContext, EncoderPolicy, HistoryTree, InnovationEncoder, PostNode, PredNode, StateEncoder,
    MAX_TREE_NODES,
};

use serde::Serialize;

use crate::coding::Quantizer;
use crate::error::{Error, Result};
use crate::gauss::{trunc_moments, two_step_cell_integrals, Interval, TruncatedMoments};
use crate::lqcore::PlantParams;

/// Joint cell `(z0 = i, z1 = j)` with the conditional moments of `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellPosterior {
    pub prob: f64,
    pub mean: f64,
    pub second_moment: f64,
    pub cell0: Interval,
    pub cell1: Interval,
}

impl CellPosterior {
    pub fn is_empty(&self) -> bool {
        self.as_moments().is_empty()
    }

    fn as_moments(&self) -> TruncatedMoments {
        TruncatedMoments { prob: self.prob, mean: self.mean, second_moment: self.second_moment }
    }
}

/// Posterior of `x1` for every `(z0, z1)` pair, plus the law of `x0` per `z0`.
#[derive(Debug, Clone, Serialize)]
pub struct TwoStepPosterior {
    /// `cells[i][j]`, `i` over `z0`, `j` over `z1`.
    pub cells: Vec<Vec<CellPosterior>>,
    /// `P[z0 = i]` with `E[x0 | z0]` and `E[x0² | z0]`.
    pub rows: Vec<TruncatedMoments>,
    pub a: f64,
}

impl TwoStepPosterior {
    /// Labels `z0` that cannot occur.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.rows[i].is_empty()).map(|i| i + 1).collect()
    }

    /// `E[x1 | z0 = i]`.
    pub fn row_mean(&self, i: usize) -> f64 {
        let r = &self.rows[i];
        self.cells[i].iter().map(|c| c.as_moments().first_partial()).sum::<f64>() / r.prob
    }

    /// `E[x1² | z0 = i]`.
    pub fn row_second_moment(&self, i: usize) -> f64 {
        let r = &self.rows[i];
        self.cells[i].iter().map(|c| c.as_moments().second_partial()).sum::<f64>() / r.prob
    }
}

/// Exact posterior over all cell pairs of `qz0` (on `x0`) and `qz1` (on `x1`).
pub fn two_step_posterior(plant: &PlantParams, u0: f64, qz0: &Quantizer, qz1: &Quantizer) -> Result<TwoStepPosterior> {
    plant.validate()?;
    if !(plant.sigma_w > 0.0) {
        return Err(Error::invalid("plant.sigma_w", "two-step posterior needs sigma_w > 0"));
    }
    let mut cells = Vec::with_capacity(qz0.levels());
    let mut rows = Vec::with_capacity(qz0.levels());
    for c0 in qz0.cells() {
        rows.push(trunc_moments(plant.x0, c0));
        cells.push(
            qz1.cells()
                .into_iter()
                .map(|c1| {
                    let j = two_step_cell_integrals(plant.x0, plant.a, u0, plant.sigma_w, c0, c1);
                    let m = j.moments();
                    CellPosterior { prob: m.prob, mean: m.mean, second_moment: m.second_moment, cell0: c0, cell1: c1 }
                })
                .collect(),
        );
    }
    Ok(TwoStepPosterior { cells, rows, a: plant.a })
}

/// Second moment and mean of `w̄0 = x̂_{1|1} - a x̂_{0|0} - u0` given `z0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WbarMoments {
    pub mean: f64,
    pub second_moment: f64,
}

/// Per-`z0` moments of the estimate increment `w̄0`. Rows that cannot occur
/// are reported as NaN.
pub fn wbar_moments(post: &TwoStepPosterior, u0: f64) -> Vec<WbarMoments> {
    post.rows
        .iter()
        .zip(&post.cells)
        .map(|(row, cells)| {
            if row.is_empty() {
                return WbarMoments { mean: f64::NAN, second_moment: f64::NAN };
            }
            let base = post.a * row.mean + u0;
            let (mut m1, mut m2) = (0.0, 0.0);
            for c in cells.iter().filter(|c| !c.is_empty()) {
                let w = c.prob / row.prob;
                let d = c.mean - base;
                m1 += w * d;
                m2 += w * d * d;
            }
            WbarMoments { mean: m1, second_moment: m2 }
        })
        .collect()
}

/// `E[Var(x1 | z0, z1) | z0]` per `z0`.
pub fn filter_error_variance(post: &TwoStepPosterior) -> Vec<f64> {
    post.rows
        .iter()
        .zip(&post.cells)
        .map(|(row, cells)| {
            if row.is_empty() {
                return f64::NAN;
            }
            cells
                .iter()
                .filter(|c| !c.is_empty())
                .map(|c| c.prob / row.prob * c.as_moments().variance())
                .sum()
        })
        .collect()
}
