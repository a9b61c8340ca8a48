//! Two-step distortion objectives and the separation checks built on them.

use serde::Serialize;

use crate::coding::Quantizer;
use crate::error::{Error, Result};
use crate::gauss::{trunc_moments, two_step_cell_integrals, Interval, JointCell, Normal};
use crate::lqcore::{ce_control, gain_schedule, CostParams, PlantParams};

use super::{grid_argmin, ConstraintSet, GammaCurve};

/// Binary time-0 quantizer at `delta0` and the observed label `z0` (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoStepSetup {
    pub delta0: f64,
    pub z0: usize,
}

impl TwoStepSetup {
    fn cell0(&self) -> Result<Interval> {
        let q = Quantizer::new(vec![self.delta0])?;
        if !(1..=2).contains(&self.z0) {
            return Err(Error::invalid("z0", "must be 1 or 2"));
        }
        Ok(q.cell(self.z0))
    }
}

fn joint_row(plant: &PlantParams, u0: f64, cell0: Interval, qz1: &Quantizer) -> Vec<JointCell> {
    qz1.cells()
        .into_iter()
        .map(|c1| two_step_cell_integrals(plant.x0, plant.a, u0, plant.sigma_w, cell0, c1))
        .collect()
}

/// `E[(x1 - E[x1 | z0, z1])² | x0 in cell0]` with `z1` from `qz1` on `x1`.
pub fn conditional_distortion(plant: &PlantParams, u0: f64, cell0: Interval, qz1: &Quantizer) -> f64 {
    let p0 = plant.x0.mass(cell0);
    let within: f64 = joint_row(plant, u0, cell0, qz1)
        .iter()
        .filter(|j| j.p > 0.0)
        .map(|j| j.d2 - j.d1 * j.d1 / j.p)
        .sum();
    (within / p0).max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Curves {
    pub gamma: GammaCurve,
    pub j: GammaCurve,
    pub u0_ce: f64,
}

/// Distortion and total cost against `u0` for a known `x0`, `T = 1`, and the
/// three-cell quantizer `±theta` on `x1`.
pub fn example1_curves(plant: &PlantParams, cost: &CostParams, theta: f64, u0_grid: &[f64]) -> Result<Example1Curves> {
    let qz = if theta.is_finite() { Quantizer::new(vec![-theta, theta])? } else { Quantizer::trivial() };
    example1_curves_with(plant, cost, &qz, u0_grid)
}

/// [`example1_curves`] with an arbitrary quantizer on `x1`.
pub fn example1_curves_with(
    plant: &PlantParams,
    cost: &CostParams,
    qz1: &Quantizer,
    u0_grid: &[f64],
) -> Result<Example1Curves> {
    plant.validate()?;
    if plant.horizon != 1 {
        return Err(Error::invalid("plant.horizon", "must be 1"));
    }
    if !plant.x0.is_point() {
        return Err(Error::invalid("plant.x0.sigma", "must be 0 (known initial state)"));
    }
    let s = gain_schedule(plant, cost);
    let (a, x0, sw, p, q) = (plant.a, plant.x0.mu, plant.sigma_w, cost.p, cost.q);
    let weight = s.lambda[1];
    let gamma_at = |u0: f64| {
        let law = Normal { mu: a * x0 + u0, sigma: sw };
        weight
            * qz1
                .cells()
                .into_iter()
                .map(|c| {
                    let m = trunc_moments(law, c);
                    if m.is_empty() {
                        0.0
                    } else {
                        m.prob * m.variance()
                    }
                })
                .sum::<f64>()
    };
    let gamma = GammaCurve::tabulate(u0_grid, gamma_at);
    let values = u0_grid
        .iter()
        .zip(&gamma.values)
        .map(|(&u0, g)| {
            let m = a * x0 + u0;
            sw * sw + q * u0 * u0 + (p + q * a * a / (q + 1.0)) * (m * m + sw * sw) + g
        })
        .collect();
    let j = GammaCurve::new(u0_grid.to_vec(), values);
    Ok(Example1Curves { gamma, j, u0_ce: ce_control(&s, 0, x0)? })
}

fn require_two_step(plant: &PlantParams) -> Result<()> {
    plant.validate()?;
    if plant.horizon < 1 {
        return Err(Error::invalid("plant.horizon", "must be >= 1"));
    }
    if !(plant.sigma_w > 0.0) {
        return Err(Error::invalid("plant.sigma_w", "must be > 0"));
    }
    Ok(())
}

/// `Γ1(δ1) = λ1 E[(x1 - x̂_{1|1})² | z0]` for a binary quantizer at `δ1` on
/// `x1`, against the grid of `δ1`.
pub fn gamma1_example4(
    plant: &PlantParams,
    cost: &CostParams,
    setup: TwoStepSetup,
    u0: f64,
    delta1_grid: &[f64],
) -> Result<GammaCurve> {
    require_two_step(plant)?;
    let weight = gain_schedule(plant, cost).lambda[1];
    let cell0 = setup.cell0()?;
    Ok(GammaCurve::tabulate(delta1_grid, |d1| {
        let q = Quantizer::new(vec![d1]).expect("finite threshold");
        weight * conditional_distortion(plant, u0, cell0, &q)
    }))
}

/// `u`-dependent part of the terminal cost-to-go, `2 a x̂ u + (1 + q) u²`.
pub fn terminal_control_cost(a: f64, q: f64, xhat: f64, u: f64) -> f64 {
    2.0 * a * xhat * u + (1.0 + q) * u * u
}

/// Best terminal control from `U`: exhaustive over a finite set (ties to the
/// smaller `|u|`, then the smaller `u`), the clamped CE value on an interval.
pub fn restricted_control_u1(a: f64, cost: &CostParams, xhat: f64, set: &ConstraintSet) -> Result<f64> {
    set.validate()?;
    let q = cost.q;
    let free = -a * xhat / (1.0 + q);
    Ok(match set {
        ConstraintSet::Unconstrained => free,
        ConstraintSet::Interval { lo, hi } => free.clamp(*lo, *hi),
        ConstraintSet::Finite { values } => {
            let costs: Vec<f64> = values.iter().map(|&u| terminal_control_cost(a, q, xhat, u)).collect();
            values[grid_argmin(values, &costs).expect("finite set")]
        }
    })
}

/// `E[min_{u in U} (2 a x̂_{1|1} u + (1+q) u²) | z0]` against `δ1`.
pub fn gamma_rc_ic(
    plant: &PlantParams,
    cost: &CostParams,
    setup: TwoStepSetup,
    u0: f64,
    delta1_grid: &[f64],
    set: &ConstraintSet,
) -> Result<GammaCurve> {
    require_two_step(plant)?;
    set.validate()?;
    let cell0 = setup.cell0()?;
    let p0 = plant.x0.mass(cell0);
    let a = plant.a;
    Ok(GammaCurve::tabulate(delta1_grid, |d1| {
        let q1 = Quantizer::new(vec![d1]).expect("finite threshold");
        joint_row(plant, u0, cell0, &q1)
            .iter()
            .filter(|j| j.p > 0.0)
            .map(|j| {
                let xhat = j.d1 / j.p;
                let u = restricted_control_u1(a, cost, xhat, set).expect("validated constraint");
                j.p / p0 * terminal_control_cost(a, cost.q, xhat, u)
            })
            .sum()
    }))
}

/// Encoder for the CE-optimality check. With `controls_forgetting`, `qz1`
/// acts on `ζ1 = x1 - u0`; otherwise on `x1`.
#[derive(Debug, Clone, Serialize)]
pub struct CeEncoder {
    pub qz0: Quantizer,
    pub z0: usize,
    pub qz1: Quantizer,
    pub controls_forgetting: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CeCheck {
    pub argmin: f64,
    pub ce_value: f64,
    pub gap: f64,
    pub grid_step: f64,
    pub costs: GammaCurve,
}

/// Exact expected cost given `z0` as a function of `u0` (with the CE law at
/// `t = 1`), minimized on `u_grid` and compared with the CE control.
pub fn verify_ce_optimality(plant: &PlantParams, cost: &CostParams, enc: &CeEncoder, u_grid: &[f64]) -> Result<CeCheck> {
    plant.validate()?;
    if plant.horizon != 1 {
        return Err(Error::invalid("plant.horizon", "must be 1"));
    }
    if enc.z0 == 0 || enc.z0 > enc.qz0.levels() {
        return Err(Error::invalid("z0", "label out of range"));
    }
    let cell0 = enc.qz0.cell(enc.z0);
    let row = trunc_moments(plant.x0, cell0);
    if row.is_empty() {
        return Err(Error::InconsistentObservations(format!("z0 = {} has zero probability", enc.z0)));
    }
    let s = gain_schedule(plant, cost);
    let (a, p, q, sw) = (plant.a, cost.p, cost.q, plant.sigma_w);
    let x0hat = row.mean;
    let expected = |u0: f64| {
        let qz1 = if enc.controls_forgetting { enc.qz1.shifted(u0) } else { enc.qz1.clone() };
        let ex1 = a * a * row.second_moment + 2.0 * a * x0hat * u0 + u0 * u0 + sw * sw;
        let dist = if sw > 0.0 || !plant.x0.is_point() {
            conditional_distortion(plant, u0, cell0, &qz1)
        } else {
            0.0
        };
        q * u0 * u0 + (p + a * a * q / (1.0 + q)) * ex1 + sw * sw + a * a / (1.0 + q) * dist
    };
    let costs = GammaCurve::tabulate(u_grid, expected);
    let ce_value = ce_control(&s, 0, x0hat)?;
    let grid_step = u_grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    Ok(CeCheck { argmin: costs.argmin, ce_value, gap: (costs.argmin - ce_value).abs(), grid_step, costs })
}
