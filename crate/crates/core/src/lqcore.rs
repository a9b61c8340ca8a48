//! Plant, cost and the certainty-equivalence gain recursions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::Normal;

/// Scalar plant `x_{t+1} = a x_t + u_t + w_t`, `w_t ~ (0, sigma_w²)`, for
/// `t = 0..=horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParams {
    pub a: f64,
    pub sigma_w: f64,
    pub x0: Normal,
    /// Final control time `T`; the terminal state is `x_{T+1}`.
    pub horizon: usize,
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::invalid("plant.a", "must be finite"));
        }
        if !(self.sigma_w >= 0.0 && self.sigma_w.is_finite()) {
            return Err(Error::invalid("plant.sigma_w", "must be finite and >= 0"));
        }
        self.x0.validate()
    }
}

/// Weights of `x_{T+1}² + p Σ_{1..T} x_i² + q Σ_{0..T} u_i²` plus the
/// communication multiplier `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub m: f64,
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::invalid("cost.p", "must be > 0"));
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return Err(Error::invalid("cost.q", "must be >= 0"));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::invalid("cost.m", "must be >= 0"));
        }
        Ok(())
    }
}

/// Backward-recursion coefficients. `k_star` and `lambda` are indexed
/// `0..=T`, `beta` and `alpha` `0..=T+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub k_star: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl GainSchedule {
    pub fn horizon(&self) -> usize {
        self.k_star.len() - 1
    }
}

/// Runs the recursion from `beta[T+1] = 1`, `alpha[T+1] = 0`.
///
/// `q = 0` is accepted; the gain is then `a` at every stage.
pub fn gain_schedule(plant: &PlantParams, cost: &CostParams) -> GainSchedule {
    let t = plant.horizon;
    let (a, p, q) = (plant.a, cost.p, cost.q);
    let mut beta = vec![0.0; t + 2];
    let mut alpha = vec![0.0; t + 2];
    let mut k_star = vec![0.0; t + 1];
    let mut lambda = vec![0.0; t + 1];
    beta[t + 1] = 1.0;
    for i in (0..=t).rev() {
        let b = beta[i + 1];
        let d = q + b;
        beta[i] = p + a * a * q * b / d;
        k_star[i] = a * b / d;
        lambda[i] = a * a * b * b / d;
        alpha[i] = b + alpha[i + 1];
    }
    GainSchedule { k_star, beta, lambda, alpha }
}

/// `u_t = -k*_t x̂_{t|t}`.
pub fn ce_control(schedule: &GainSchedule, t: usize, xhat: f64) -> Result<f64> {
    let k = schedule
        .k_star
        .get(t)
        .ok_or(Error::IndexOutOfRange { what: "time", index: t, len: schedule.k_star.len() })?;
    Ok(-k * xhat)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    /// `t = 0`: only the control is charged.
    Initial,
    /// `1 <= t <= T`.
    Interior,
    /// The terminal state `x_{T+1}`, weight 1, no control.
    Terminal,
}

pub fn stage_cost(x: f64, u: f64, cost: &CostParams, kind: StageKind) -> f64 {
    match kind {
        StageKind::Initial => cost.q * u * u,
        StageKind::Interior => cost.p * x * x + cost.q * u * u,
        StageKind::Terminal => x * x,
    }
}

/// Optimal cost with the state observed exactly.
pub fn full_information_cost(plant: &PlantParams, cost: &CostParams, schedule: &GainSchedule) -> f64 {
    (schedule.beta[0] - cost.p) * plant.x0.second_moment() + schedule.alpha[0] * plant.sigma_w.powi(2)
}

/// Cost of the CE law when the controller's error variances are `err_var[t]`,
/// `t = 0..=T`.
pub fn ce_cost(plant: &PlantParams, cost: &CostParams, schedule: &GainSchedule, err_var: &[f64]) -> f64 {
    full_information_cost(plant, cost, schedule)
        + schedule.lambda.iter().zip(err_var).map(|(l, e)| l * e).sum::<f64>()
}

/// Error variances of the open-loop predictor, i.e. with no observations.
pub fn prior_error_variances(plant: &PlantParams) -> Vec<f64> {
    let mut v = Vec::with_capacity(plant.horizon + 1);
    let mut e = plant.x0.variance();
    for _ in 0..=plant.horizon {
        v.push(e);
        e = plant.a * plant.a * e + plant.sigma_w * plant.sigma_w;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plant(a: f64, t: usize) -> PlantParams {
        PlantParams { a, sigma_w: 1.0, x0: Normal::standard(), horizon: t }
    }

    #[test]
    fn example_one_gains() {
        let s = gain_schedule(&plant(1.0, 1), &CostParams { p: 0.01, q: 0.01, m: 0.0 });
        assert!((s.beta[1] - (0.01 + 0.01 / 1.01)).abs() < 1e-16);
        assert!((s.beta[1] - 0.019_901_0).abs() < 1e-7);
        assert!((s.k_star[0] - 0.665_562_913_907_284_8).abs() < 1e-14);
        let u = ce_control(&s, 0, 2.0).unwrap();
        assert!((u + 1.331_125_827_814_569_7).abs() < 1e-14);
        assert!((s.k_star[1] - 1.0 / 1.01).abs() < 1e-15);
    }

    #[test]
    fn terminal_gain_and_bounds() {
        let s = gain_schedule(&plant(1.0, 3), &CostParams { p: 0.5, q: 1.0, m: 0.0 });
        assert_eq!(ce_control(&s, 3, 2.0).unwrap(), -1.0);
        assert_eq!(ce_control(&s, 0, 0.0).unwrap(), 0.0);
        assert!(ce_control(&s, 4, 1.0).is_err());
        assert_eq!(s.beta[4], 1.0);
        assert_eq!(s.alpha[4], 0.0);
    }

    #[test]
    fn unit_beta_when_q_zero() {
        let s = gain_schedule(&plant(1.7, 6), &CostParams { p: 1.0, q: 0.0, m: 0.0 });
        for i in 0..=6 {
            assert_eq!(s.beta[i], 1.0);
            assert!((s.lambda[i] - 1.7 * 1.7).abs() < 1e-12);
            assert!((s.k_star[i] - 1.7).abs() < 1e-15);
        }
    }

    #[test]
    fn stage_costs() {
        let c = CostParams { p: 0.01, q: 0.01, m: 0.0 };
        assert!((stage_cost(2.0, 1.0, &c, StageKind::Interior) - 0.05).abs() < 1e-15);
        assert_eq!(stage_cost(3.0, 7.0, &c, StageKind::Terminal), 9.0);
        assert_eq!(stage_cost(5.0, 0.0, &c, StageKind::Initial), 0.0);
    }

    #[test]
    fn deterministic_cost_matches_full_information() {
        // sigma_w = 0, point-mass x0: the cost is beta0 x0² - p x0².
        let pl = PlantParams { a: 1.3, sigma_w: 0.0, x0: Normal::point(1.5), horizon: 4 };
        let c = CostParams { p: 0.7, q: 0.3, m: 0.0 };
        let s = gain_schedule(&pl, &c);
        let mut x = 1.5;
        let mut j = 0.0;
        for t in 0..=4 {
            let u = ce_control(&s, t, x).unwrap();
            let kind = if t == 0 { StageKind::Initial } else { StageKind::Interior };
            j += stage_cost(x, u, &c, kind);
            x = 1.3 * x + u;
        }
        j += stage_cost(x, 0.0, &c, StageKind::Terminal);
        assert!((j - full_information_cost(&pl, &c, &s)).abs() < 1e-12);
    }
}
