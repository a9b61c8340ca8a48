//! Monte Carlo posterior for horizons without a closed form.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Executor};
use crate::gauss::Interval;
use crate::lqcore::PlantParams;
use crate::rng::{self, domain};

/// Weighted sample of `x_t`. Weights sum to one.
#[derive(Debug, Clone, Serialize)]
pub struct ParticleCloud {
    pub particles: Vec<(f64, f64)>,
    pub ess: f64,
}

impl ParticleCloud {
    pub fn mean(&self) -> f64 {
        let terms: Vec<f64> = self.particles.iter().map(|(x, w)| x * w).collect();
        pairwise_sum(&terms)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let terms: Vec<f64> = self.particles.iter().map(|(x, w)| w * (x - m) * (x - m)).collect();
        pairwise_sum(&terms)
    }

    /// Standard error of [`ParticleCloud::mean`].
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.ess).sqrt()
    }
}

fn ess(w: &[f64]) -> f64 {
    let sq: Vec<f64> = w.iter().map(|v| v * v).collect();
    1.0 / pairwise_sum(&sq)
}

/// Bootstrap filter for `x_t` given that `x_s` fell in `observations[s]` for
/// `s = 0..=t`. The controller applies `control(s, x̂_s)` between steps, with
/// `x̂_s` the cloud mean. Resamples systematically when the effective sample
/// size drops below `n / 2`.
pub fn particle_posterior(
    plant: &PlantParams,
    control: &(dyn Fn(usize, f64) -> f64 + Sync),
    observations: &[Interval],
    n: usize,
    seed: u64,
    exec: &Executor,
) -> Result<ParticleCloud> {
    if n == 0 {
        return Err(Error::invalid("n_particles", "must be >= 1"));
    }
    if observations.is_empty() {
        return Err(Error::invalid("observations", "need at least the time-0 observation"));
    }
    let noise = |t: usize, i: usize| -> f64 {
        let mut r = rng::stream(seed, domain::PARTICLE, rng::derive(t as u64, &[i as u64]));
        r.sample(StandardNormal)
    };
    let x0 = plant.x0;
    let mut xs: Vec<f64> = exec.map(n, |i| x0.mu + x0.sigma * noise(0, i));
    let mut w = vec![1.0 / n as f64; n];
    let last = observations.len() - 1;
    for (t, cell) in observations.iter().enumerate() {
        for (wi, &x) in w.iter_mut().zip(&xs) {
            if !cell.contains(x) {
                *wi = 0.0;
            }
        }
        let total = pairwise_sum(&w);
        if !(total > 0.0) {
            return Err(Error::InconsistentObservations(format!(
                "no particle falls in the observed cell at t={t}"
            )));
        }
        w.iter_mut().for_each(|v| *v /= total);
        if t == last {
            break;
        }
        if ess(&w) < 0.5 * n as f64 {
            let mut r = rng::stream(seed, domain::RESAMPLE, t as u64);
            xs = systematic_resample(&xs, &w, r.gen::<f64>());
            w = vec![1.0 / n as f64; n];
        }
        let xhat = pairwise_sum(&xs.iter().zip(&w).map(|(x, v)| x * v).collect::<Vec<_>>());
        let u = control(t, xhat);
        let (a, sw) = (plant.a, plant.sigma_w);
        let prev = std::mem::take(&mut xs);
        xs = exec.map(n, |i| a * prev[i] + u + sw * noise(t + 1, i));
    }
    let e = ess(&w);
    Ok(ParticleCloud { particles: xs.into_iter().zip(w).collect(), ess: e })
}

fn systematic_resample(xs: &[f64], w: &[f64], offset: f64) -> Vec<f64> {
    let n = xs.len();
    let mut out = Vec::with_capacity(n);
    let mut cum = w[0];
    let mut k = 0;
    for i in 0..n {
        let target = (i as f64 + offset) / n as f64;
        while cum < target && k + 1 < n {
            k += 1;
            cum += w[k];
        }
        out.push(xs[k]);
    }
    out
}
