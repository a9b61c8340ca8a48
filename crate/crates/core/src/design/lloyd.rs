//! Stagewise encoder design by Lloyd alternation on the predictive law.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coding::Quantizer;
use crate::error::{Error, Result};
use crate::estimation::{pick, Belief, EncoderContext, EncoderPolicy};
use crate::gauss::std_cdf;
use crate::lqcore::GainSchedule;
use crate::rng::{self, domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LloydOptions {
    /// Random initializations per alphabet size, on top of the split and
    /// quantile starts.
    pub restarts: usize,
    pub max_iter: usize,
    /// Convergence threshold on the largest threshold move, in units of the
    /// predictive standard deviation.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LloydOptions {
    fn default() -> Self {
        LloydOptions { restarts: 4, max_iter: 500, tol: 1e-10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageDesign {
    pub quantizer: Quantizer,
    /// `λ_t Σ_i P_i Var_i`.
    pub distortion: f64,
    pub converged: bool,
}

fn distortion(belief: &Belief, th: &[f64]) -> f64 {
    let q = Quantizer::new(th.to_vec()).expect("increasing thresholds");
    q.cells()
        .into_iter()
        .map(|c| {
            let m = belief.cell_moments(c);
            if m.is_empty() {
                0.0
            } else {
                m.prob * m.variance()
            }
        })
        .sum()
}

/// Standard normal quantile by bisection.
fn std_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if std_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Runs Lloyd from `th`; returns thresholds, distortion and convergence.
fn lloyd(belief: &Belief, mut th: Vec<f64>, scale: f64, opts: &LloydOptions) -> (Vec<f64>, f64, bool) {
    let mut converged = th.is_empty();
    let mut best = (th.clone(), distortion(belief, &th));
    for _ in 0..opts.max_iter {
        if converged {
            break;
        }
        let q = Quantizer::new(th.clone()).expect("increasing thresholds");
        let cells = q.cells();
        let centroids: Vec<f64> = cells
            .iter()
            .map(|c| {
                let m = belief.cell_moments(*c);
                if !m.is_empty() {
                    m.mean
                } else if c.lo.is_finite() && c.hi.is_finite() {
                    0.5 * (c.lo + c.hi)
                } else if c.lo.is_finite() {
                    c.lo + scale
                } else {
                    c.hi - scale
                }
            })
            .collect();
        let mut next: Vec<f64> = centroids.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        for i in 1..next.len() {
            if next[i] <= next[i - 1] {
                next[i] = next[i - 1] + 1e-12 * scale.max(1e-300);
            }
        }
        let moved = th.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        th = next;
        let d = distortion(belief, &th);
        // Distortion is flat near the optimum; tolerate rounding so later
        // iterates win.
        if d <= best.1 + 1e-13 * best.1.abs() {
            best = (th.clone(), d);
        }
        converged = moved <= opts.tol * scale;
    }
    (best.0, best.1, converged)
}

/// Quantizer for `ζ_t` minimizing `λ_t E[Var(ζ_t | cell)]` under the
/// predictive law, with `n` cells.
///
/// Designs for `1..=n` cells are built in turn; each size starts from every
/// centroid split of the previous design, a quantile layout, and `restarts`
/// random layouts, so the distortion never increases with `n`.
pub fn greedy_stage_encoder(
    schedule: &GainSchedule,
    t: usize,
    predictive: &Belief,
    n: usize,
    opts: &LloydOptions,
) -> Result<StageDesign> {
    let lambda = *schedule
        .lambda
        .get(t)
        .ok_or(Error::IndexOutOfRange { what: "time", index: t, len: schedule.lambda.len() })?;
    design_for_weight(lambda, predictive, n, opts)
}

pub(crate) fn design_for_weight(lambda: f64, belief: &Belief, n: usize, opts: &LloydOptions) -> Result<StageDesign> {
    if n == 0 {
        return Err(Error::invalid("levels", "must be >= 1"));
    }
    let (mean, var) = (belief.mean(), belief.variance());
    let sd = var.sqrt();
    if !(sd > 1e-150) {
        // Nothing left to learn; any layout is optimal.
        let q = Quantizer::uniform(n, mean, 0.5 * n as f64)?;
        return Ok(StageDesign { quantizer: q, distortion: 0.0, converged: true });
    }
    let mut best: (Vec<f64>, f64, bool) = (Vec::new(), var, true);
    for k in 2..=n {
        let mut starts: Vec<Vec<f64>> = Vec::new();
        let prev = Quantizer::new(best.0.clone())?;
        for c in prev.cells() {
            let m = belief.cell_moments(c);
            if m.is_empty() || !(m.mean > c.lo && m.mean < c.hi) {
                continue;
            }
            let mut th = best.0.clone();
            th.push(m.mean);
            th.sort_by(f64::total_cmp);
            if th.windows(2).all(|w| w[0] < w[1]) {
                starts.push(th);
            }
        }
        starts.push((1..k).map(|i| mean + sd * std_quantile(i as f64 / k as f64)).collect());
        for r in 0..opts.restarts {
            let mut g = rng::stream(opts.seed, domain::LLOYD, rng::derive(k as u64, &[r as u64]));
            let mut th: Vec<f64> = (1..k).map(|_| mean + sd * (6.0 * g.gen::<f64>() - 3.0)).collect();
            th.sort_by(f64::total_cmp);
            if th.windows(2).all(|w| w[0] < w[1]) {
                starts.push(th);
            }
        }
        let mut round: Option<(Vec<f64>, f64, bool)> = None;
        for s in starts {
            let res = lloyd(belief, s, sd, opts);
            if round.as_ref().map_or(true, |r| res.1 < r.1) {
                round = Some(res);
            }
        }
        let round = round.expect("at least the quantile start");
        // Never accept a larger distortion than the coarser design.
        best = if round.1 <= best.1 { round } else { (split_best(belief, &best.0), best.1, best.2) };
    }
    let quantizer = Quantizer::new(best.0)?;
    let d = distortion(belief, quantizer.thresholds());
    Ok(StageDesign { quantizer, distortion: lambda * d, converged: best.2 })
}

/// Adds one threshold without increasing distortion (splits at a centroid).
fn split_best(belief: &Belief, th: &[f64]) -> Vec<f64> {
    let q = Quantizer::new(th.to_vec()).expect("increasing");
    for c in q.cells() {
        let m = belief.cell_moments(c);
        if !m.is_empty() && m.mean > c.lo && m.mean < c.hi {
            let mut v = th.to_vec();
            v.push(m.mean);
            v.sort_by(f64::total_cmp);
            return v;
        }
    }
    let mut v = th.to_vec();
    v.push(th.last().copied().unwrap_or(0.0) + 1.0);
    v
}

/// Greedy Lloyd encoder on the control-free state; its cells move with the
/// applied controls, so it is controls-forgetting.
pub struct GreedyEncoder {
    pub schedule: GainSchedule,
    /// Alphabet size per time; the last entry repeats.
    pub levels: Vec<usize>,
    pub opts: LloydOptions,
}

impl EncoderPolicy for GreedyEncoder {
    fn quantizer(&self, ctx: &EncoderContext<'_>) -> Result<Quantizer> {
        let mut opts = self.opts;
        let hist: Vec<u64> = ctx.history.iter().map(|&h| h as u64).collect();
        opts.seed = rng::derive(self.opts.seed, &hist);
        let d = greedy_stage_encoder(&self.schedule, ctx.t, ctx.predictive, pick(&self.levels, ctx.t), &opts)?;
        Ok(d.quantizer.shifted(ctx.accumulated))
    }
}

/// `n` equal cells over the predictive mean ± `span` standard deviations,
/// on the control-free state.
pub struct UniformEncoder {
    pub levels: Vec<usize>,
    pub span: f64,
}

impl EncoderPolicy for UniformEncoder {
    fn quantizer(&self, ctx: &EncoderContext<'_>) -> Result<Quantizer> {
        let sd = ctx.predictive.variance().sqrt().max(1e-9);
        let q = Quantizer::uniform(pick(&self.levels, ctx.t), ctx.predictive.mean(), self.span * sd)?;
        Ok(q.shifted(ctx.accumulated))
    }
}
