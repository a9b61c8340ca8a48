//! Monte Carlo probe for the second-order dual effect.
//!
//! Two control policies drive the same plant noise (common random numbers)
//! through the same encoder. Paths are binned by the exact label sequence
//! `z_0..z_s`, and the conditional variance of `x_t` within each bin is
//! compared across policies. Without a dual effect the two variances agree
//! for every history.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{ControlPolicy, EncoderPolicy, HistoryTree};
use crate::exec::Executor;
use crate::lqcore::PlantParams;
use crate::rng::{self, domain};

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeConfig {
    /// Time of the state whose error is compared.
    pub t: usize,
    /// Last label in the conditioning history; `s <= t`.
    pub s: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Bins with fewer paths under either policy are excluded.
    pub min_count: usize,
}

impl ProbeConfig {
    pub fn new(t: usize, s: usize, n_paths: usize, seed: u64) -> Self {
        ProbeConfig { t, s, n_paths, seed, min_count: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeBin {
    pub history: Vec<usize>,
    pub count_a: usize,
    pub count_b: usize,
    pub var_a: f64,
    pub var_b: f64,
    pub se_a: f64,
    pub se_b: f64,
    /// `|var_a - var_b|`.
    pub discrepancy: f64,
    /// Discrepancy over its combined standard error.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub bins: Vec<ProbeBin>,
    /// Histories seen but too rare to compare.
    pub excluded: Vec<Vec<usize>>,
    /// Largest discrepancy over the compared bins.
    pub max_discrepancy: f64,
    /// Standard error of `max_discrepancy`.
    pub max_discrepancy_se: f64,
    /// Largest `z` over the compared bins.
    pub max_z: f64,
}

/// Sample variance and its standard error, `sqrt((m4 - s⁴)/n)`.
fn variance_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(m2, m4), &x| {
        let d2 = (x - mean) * (x - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let var = m2 / (n - 1.0);
    let m4 = m4 / n;
    (var, ((m4 - var * var).max(0.0) / n).sqrt())
}

fn run_policy(
    plant: &PlantParams,
    tree: &HistoryTree,
    cfg: &ProbeConfig,
    exec: &Executor,
) -> BTreeMap<Vec<usize>, Vec<f64>> {
    let chunks = cfg.n_paths.div_ceil(CHUNK);
    let parts = exec.map(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(cfg.n_paths);
        (lo..hi)
            .map(|i| {
                let mut g = rng::stream(cfg.seed, domain::PROBE, i as u64);
                let z0: f64 = g.sample(StandardNormal);
                let mut x = plant.x0.mu + plant.x0.sigma * z0;
                let mut pred = 0;
                let mut history = Vec::with_capacity(cfg.s + 1);
                for k in 0..cfg.t {
                    let (label, node) = tree.step(pred, x);
                    if k <= cfg.s {
                        history.push(label);
                    }
                    let w: f64 = g.sample(StandardNormal);
                    x = plant.a * x + node.u + plant.sigma_w * w;
                    pred = node.next.expect("t within the horizon");
                }
                if cfg.s == cfg.t {
                    history.push(tree.step(pred, x).0);
                }
                (history, x)
            })
            .collect::<Vec<_>>()
    });
    let mut bins: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    for (h, x) in parts.into_iter().flatten() {
        bins.entry(h).or_default().push(x);
    }
    bins
}

/// Compares `Var(x_t | z_0..z_s)` under two control policies.
pub fn dual_effect_probe(
    plant: &PlantParams,
    encoder: &dyn EncoderPolicy,
    policy_a: &dyn ControlPolicy,
    policy_b: &dyn ControlPolicy,
    cfg: &ProbeConfig,
    exec: &Executor,
) -> Result<ProbeResult> {
    plant.validate()?;
    if cfg.s > cfg.t {
        return Err(Error::invalid("probe.s", "must satisfy s <= t"));
    }
    if cfg.t > plant.horizon {
        return Err(Error::IndexOutOfRange { what: "time", index: cfg.t, len: plant.horizon + 1 });
    }
    if cfg.min_count < 2 {
        return Err(Error::invalid("probe.min_count", "must be >= 2"));
    }
    let tree_a = HistoryTree::build(plant, encoder, policy_a)?;
    let tree_b = HistoryTree::build(plant, encoder, policy_b)?;
    let mut runs_a = run_policy(plant, &tree_a, cfg, exec);
    let mut runs_b = run_policy(plant, &tree_b, cfg, exec);

    let keys: std::collections::BTreeSet<Vec<usize>> = runs_a.keys().chain(runs_b.keys()).cloned().collect();
    let mut bins = Vec::new();
    let mut excluded = Vec::new();
    for h in keys {
        let xa = runs_a.remove(&h).unwrap_or_default();
        let xb = runs_b.remove(&h).unwrap_or_default();
        if xa.len() < cfg.min_count || xb.len() < cfg.min_count {
            excluded.push(h);
            continue;
        }
        let (var_a, se_a) = variance_and_se(&xa);
        let (var_b, se_b) = variance_and_se(&xb);
        let discrepancy = (var_a - var_b).abs();
        let se = (se_a * se_a + se_b * se_b).sqrt();
        let z = if discrepancy == 0.0 {
            0.0
        } else if se > 0.0 {
            discrepancy / se
        } else {
            f64::INFINITY
        };
        bins.push(ProbeBin { history: h, count_a: xa.len(), count_b: xb.len(), var_a, var_b, se_a, se_b, discrepancy, z });
    }
    let worst = bins.iter().max_by(|p, q| p.discrepancy.total_cmp(&q.discrepancy));
    let (max_discrepancy, max_discrepancy_se) =
        worst.map_or((0.0, 0.0), |b| (b.discrepancy, (b.se_a * b.se_a + b.se_b * b.se_b).sqrt()));
    let max_z = bins.iter().map(|b| b.z).fold(0.0, f64::max);
    Ok(ProbeResult { bins, excluded, max_discrepancy, max_discrepancy_se, max_z })
}
