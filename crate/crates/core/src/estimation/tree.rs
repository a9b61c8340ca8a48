//! The tree of label histories with the exact conditional state law at every
//! node.
//!
//! Beliefs are kept for the control-free state `ζ_t`; the controller's
//! estimate is `x̂_{t|t} = E[ζ_t | z_0..z_t] + accumulated_t`. An encoder
//! quantizes `x_t`; its cells are translated into `ζ` coordinates before
//! conditioning.

use crate::coding::{InnovationTracker, Quantizer};
use crate::error::{Error, Result};
use crate::gauss::{Interval, Normal};
use crate::lqcore::PlantParams;

use super::belief::Belief;

pub const MAX_TREE_NODES: usize = 200_000;

/// Information available to an encoder when it picks its quantizer at time `t`.
pub struct EncoderContext<'a> {
    pub t: usize,
    /// Law of `ζ_t` given the labels so far.
    pub predictive: &'a Belief,
    /// `x_t - ζ_t`.
    pub accumulated: f64,
    pub history: &'a [usize],
}

pub trait EncoderPolicy: Send + Sync {
    /// Quantizer applied to `x_t`.
    fn quantizer(&self, ctx: &EncoderContext<'_>) -> Result<Quantizer>;
}

pub trait ControlPolicy: Send + Sync {
    fn control(&self, t: usize, xhat: f64, history: &[usize]) -> f64;
}

impl<F: Fn(usize, f64, &[usize]) -> f64 + Send + Sync> ControlPolicy for F {
    fn control(&self, t: usize, xhat: f64, history: &[usize]) -> f64 {
        self(t, xhat, history)
    }
}

/// Node before the time-`t` label is seen.
#[derive(Debug, Clone)]
pub struct PredNode {
    pub t: usize,
    pub accumulated: f64,
    pub belief: Belief,
    pub quantizer: Quantizer,
    /// Posterior node per label `1..=N`.
    pub children: Vec<usize>,
}

/// Node after the time-`t` label is seen.
#[derive(Debug, Clone)]
pub struct PostNode {
    pub t: usize,
    pub label: usize,
    /// Probability of the whole history.
    pub prob: f64,
    pub xhat: f64,
    /// `Var(x_t | history)`.
    pub err_var: f64,
    pub u: f64,
    pub next: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct HistoryTree {
    pub horizon: usize,
    pub pred: Vec<PredNode>,
    pub post: Vec<PostNode>,
}

impl HistoryTree {
    pub fn build(plant: &PlantParams, encoder: &dyn EncoderPolicy, control: &dyn ControlPolicy) -> Result<Self> {
        let mut tree = HistoryTree { horizon: plant.horizon, pred: Vec::new(), post: Vec::new() };
        let root_belief = Belief::Gaussian(plant.x0);
        let mut history = Vec::with_capacity(plant.horizon + 1);
        tree.grow(plant, encoder, control, root_belief, InnovationTracker::new(plant.a), 1.0, &mut history)?;
        Ok(tree)
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &mut self,
        plant: &PlantParams,
        encoder: &dyn EncoderPolicy,
        control: &dyn ControlPolicy,
        belief: Belief,
        tracker: InnovationTracker,
        prob: f64,
        history: &mut Vec<usize>,
    ) -> Result<usize> {
        let t = history.len();
        let acc = tracker.accumulated;
        let ctx = EncoderContext { t, predictive: &belief, accumulated: acc, history };
        let quantizer = encoder.quantizer(&ctx)?;
        if self.pred.len() + self.post.len() + quantizer.levels() > MAX_TREE_NODES {
            return Err(Error::TreeTooLarge { limit: MAX_TREE_NODES });
        }
        let idx = self.pred.len();
        self.pred.push(PredNode { t, accumulated: acc, belief: belief.clone(), quantizer: quantizer.clone(), children: Vec::new() });

        let mut children = Vec::with_capacity(quantizer.levels());
        for label in 1..=quantizer.levels() {
            let zcell = quantizer.cell(label).shift(-acc);
            let m = belief.cell_moments(zcell);
            history.push(label);
            let (posterior, cond_prob, err_var) = if m.is_empty() {
                // Unreachable history: keep a point guess inside the cell.
                let guess = clamp_into(belief.mean(), zcell);
                (Belief::Gaussian(Normal::point(guess)), 0.0, 0.0)
            } else {
                (belief.condition(zcell)?, m.prob, m.variance())
            };
            let zhat = if m.is_empty() { posterior.mean() } else { m.mean };
            let xhat = zhat + acc;
            let u = control.control(t, xhat, history);
            let post_idx = self.post.len();
            self.post.push(PostNode { t, label, prob: prob * cond_prob, xhat, err_var, u, next: None });
            if t < plant.horizon {
                let next_belief = posterior.propagate(plant.a, plant.sigma_w);
                let next = self.grow(plant, encoder, control, next_belief, tracker.step(u), prob * cond_prob, history)?;
                self.post[post_idx].next = Some(next);
            }
            history.pop();
            children.push(post_idx);
        }
        self.pred[idx].children = children;
        Ok(idx)
    }

    pub fn root(&self) -> &PredNode {
        &self.pred[0]
    }

    /// Follows the labels of `x_t` along a path; returns the posterior node
    /// reached at time `t`.
    pub fn step(&self, pred: usize, x: f64) -> (usize, &PostNode) {
        let node = &self.pred[pred];
        let label = node.quantizer.apply(x);
        let post = node.children[label - 1];
        (label, &self.post[post])
    }

    /// `E[Var(x_t | z_0..z_t)]` for `t = 0..=T`.
    pub fn expected_error_variances(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.horizon + 1];
        for n in &self.post {
            v[n.t] += n.prob * n.err_var;
        }
        v
    }

    /// Posterior nodes at time `t` in creation order.
    pub fn posts_at(&self, t: usize) -> impl Iterator<Item = &PostNode> {
        self.post.iter().filter(move |n| n.t == t)
    }
}

fn clamp_into(x: f64, cell: Interval) -> f64 {
    if cell.contains(x) {
        x
    } else if x <= cell.lo {
        if cell.hi.is_finite() {
            cell.hi
        } else {
            cell.lo + 1.0
        }
    } else if cell.lo.is_finite() {
        cell.lo + 0.5 * (cell.hi - cell.lo).min(1.0)
    } else {
        cell.hi
    }
}

/// Fixed quantizers for `x_t`, one per time, regardless of history.
pub struct StateEncoder(pub Vec<Quantizer>);

impl EncoderPolicy for StateEncoder {
    fn quantizer(&self, ctx: &EncoderContext<'_>) -> Result<Quantizer> {
        Ok(pick(&self.0, ctx.t))
    }
}

/// Fixed quantizers for `ζ_t`, i.e. cells that move with the applied controls.
pub struct InnovationEncoder(pub Vec<Quantizer>);

impl EncoderPolicy for InnovationEncoder {
    fn quantizer(&self, ctx: &EncoderContext<'_>) -> Result<Quantizer> {
        Ok(pick(&self.0, ctx.t).shifted(ctx.accumulated))
    }
}

/// Uses the last entry for times past the end of the list.
pub fn pick<T: Clone>(v: &[T], t: usize) -> T {
    v.get(t).or(v.last()).cloned().expect("nonempty per-time list")
}
