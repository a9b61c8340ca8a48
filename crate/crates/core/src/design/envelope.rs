//! Event-trigger envelopes for the exactly-one-sample regime.
//!
//! Before the sample the controller only knows `x0` and that the state has
//! stayed silent; it applies either the predictor-linear law `-k*_t m_t` or a
//! constant `κ`. After the sample at `τ` it applies `-k*_t` to the open-loop
//! prediction from `x_τ`, whose cost-to-go is quadratic in `x_τ` and computed
//! in closed form. The pre-sample part is evaluated by propagating the
//! not-yet-sampled sub-density on a state grid.

use serde::{Deserialize, Serialize};

use crate::coding::SilenceEnvelope;
use crate::error::{Error, Result};
use crate::estimation::tabulated_moments;
use crate::gauss::Interval;
use crate::lqcore::{gain_schedule, CostParams, GainSchedule, PlantParams};

use super::golden_section;

/// Pre-sample control law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreSample {
    /// `u_t = -k*_t m_t` with the open-loop predictor `m_t`.
    PredictorLinear,
    /// `u_t = κ` until the sample.
    Zoh { kappa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeOptions {
    pub points: usize,
    /// Grid half-width in pre-sample standard deviations.
    pub width: f64,
    /// Kernel truncation in units of `sigma_w`.
    pub kernel_width: f64,
    /// Largest mass allowed in the outer 5% of a grid.
    pub boundary_tol: f64,
    /// Half-widths of the starting windows, in `σ_t`.
    pub starts: Vec<f64>,
    /// Offsets of the starting window centers from `m_t`, in `σ_t`.
    pub shifts: Vec<f64>,
    /// Starting `κ` offsets from the initial value, in `σ_w` (ZOH only).
    pub kappa_starts: Vec<f64>,
    /// Grid points scanned before each golden-section refinement.
    pub scan: usize,
    pub max_sweeps: usize,
    /// Golden-section tolerance in units of `σ_w`.
    pub coord_tol: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            points: 801,
            width: 6.0,
            kernel_width: 6.0,
            boundary_tol: 1e-6,
            starts: vec![0.75, 1.5],
            shifts: vec![-1.0, 0.0, 1.0],
            kappa_starts: vec![-1.0, 0.0, 1.0],
            scan: 16,
            max_sweeps: 12,
            coord_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeDesign {
    /// Intervals for `t = 1..=T`; the last one is moot since the sample is
    /// forced at `T`.
    pub envelope: SilenceEnvelope,
    pub pre_sample: PreSample,
    pub expected_cost: f64,
    /// Pre-sample predictor `m_t`, `t = 0..=T`.
    pub means: Vec<f64>,
    /// Probability that the sample happens at `t`, `t = 1..=T`.
    pub sample_probs: Vec<f64>,
}

impl EnvelopeDesign {
    /// `max_t |(L_t + U_t)/2 - m_t|` over `t = 1..T-1`.
    pub fn asymmetry(&self) -> f64 {
        let t_max = self.envelope.horizon();
        (1..t_max)
            .map(|t| {
                let iv = self.envelope.interval(t);
                (0.5 * (iv.lo + iv.hi) - self.means[t]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Quadratic cost-to-go after sampling `x` at `τ`: `c2[τ] x² + c0[τ]`,
/// including `p x_τ²`.
fn post_sample_coefficients(plant: &PlantParams, cost: &CostParams, s: &GainSchedule) -> (Vec<f64>, Vec<f64>) {
    let t_end = plant.horizon;
    let (a, p, q, sw2) = (plant.a, cost.p, cost.q, plant.sigma_w * plant.sigma_w);
    let mut c2 = vec![0.0; t_end + 1];
    let mut c0 = vec![0.0; t_end + 1];
    for tau in 1..=t_end {
        let (mut phi, mut v) = (1.0, 0.0);
        let (mut quad, mut cons) = (p, 0.0);
        for t in tau..=t_end {
            quad += q * s.k_star[t] * s.k_star[t] * phi * phi;
            phi *= a - s.k_star[t];
            v = a * a * v + sw2;
            if t < t_end {
                quad += p * phi * phi;
                cons += p * v;
            } else {
                quad += phi * phi;
                cons += v;
            }
        }
        c2[tau] = quad;
        c0[tau] = cons;
    }
    (c2, c0)
}

/// Sub-density of the not-yet-sampled state on `[lo, lo + (n-1) step]`.
struct Tab {
    lo: f64,
    step: f64,
    f: Vec<f64>,
}

impl Tab {
    fn hi(&self) -> f64 {
        self.lo + self.step * (self.f.len() - 1) as f64
    }

    fn clip(&self, iv: Interval) -> Option<(f64, f64)> {
        let a = iv.lo.max(self.lo);
        let b = iv.hi.min(self.hi());
        (a < b).then_some((a, b))
    }

    /// Moments of the sub-density over `iv`, with the leading-order
    /// correction for linear interpolation of a smooth density.
    fn moments(&self, iv: Interval) -> [f64; 3] {
        let Some((a, b)) = self.clip(iv) else { return [0.0; 3] };
        let [m0, m1, m2] = tabulated_moments(self.lo, self.step, &self.f, a, b);
        let c = self.step * self.step / 12.0;
        let (fa, da, fb, db) = (self.interp(a), self.slope(a), self.interp(b), self.slope(b));
        [
            m0 - c * (db - da),
            m1 - c * ((b * db - fb) - (a * da - fa)),
            m2 - c * ((b * b * db - 2.0 * b * fb) - (a * a * da - 2.0 * a * fa) + 2.0 * m0),
        ]
    }

    fn slope(&self, x: f64) -> f64 {
        let n = self.f.len();
        let pos = ((x - self.lo) / self.step).clamp(0.0, (n - 1) as f64);
        let k = (pos.floor() as usize).min(n - 2);
        (self.f[k + 1] - self.f[k]) / self.step
    }

    fn interp(&self, x: f64) -> f64 {
        let n = self.f.len();
        let pos = ((x - self.lo) / self.step).clamp(0.0, (n - 1) as f64);
        let k = (pos.floor() as usize).min(n - 2);
        let w = pos - k as f64;
        self.f[k] * (1.0 - w) + self.f[k + 1] * w
    }

    /// Mass in the outer 5% of the grid on each side.
    fn edge_mass(&self) -> f64 {
        let band = 0.05 * (self.hi() - self.lo);
        let left = Interval { lo: self.lo, hi: self.lo + band };
        let right = Interval { lo: self.hi() - band, hi: self.hi() };
        self.moments(left)[0] + self.moments(right)[0]
    }
}

/// `y -> ∫_S f(x) N(y; a x + u, σ_w) dx` on a new grid, trapezoid rule with
/// partial end segments; the kernel is truncated at `kw σ_w`.
fn convolve(src: &Tab, silent: (f64, f64), a: f64, u: f64, sw: f64, kw: f64, out_lo: f64, out_step: f64, n: usize) -> Tab {
    let (sl, su) = silent;
    // Quadrature nodes and weights over [sl, su].
    let mut xs = Vec::with_capacity(src.f.len() + 2);
    let mut ws = Vec::with_capacity(src.f.len() + 2);
    let first = ((sl - src.lo) / src.step).ceil().max(0.0) as usize;
    let last = (((su - src.lo) / src.step).floor().max(0.0) as usize).min(src.f.len() - 1);
    let mut nodes: Vec<(f64, f64)> = vec![(sl, src.interp(sl))];
    for i in first..=last {
        let x = src.lo + i as f64 * src.step;
        if x > sl && x < su {
            nodes.push((x, src.f[i]));
        }
    }
    nodes.push((su, src.interp(su)));
    for (k, &(x, fx)) in nodes.iter().enumerate() {
        let left = if k > 0 { x - nodes[k - 1].0 } else { 0.0 };
        let right = if k + 1 < nodes.len() { nodes[k + 1].0 - x } else { 0.0 };
        xs.push(x);
        ws.push(0.5 * (left + right) * fx);
    }
    let inv2s2 = 0.5 / (sw * sw);
    let norm = 1.0 / (sw * (2.0 * std::f64::consts::PI).sqrt());
    let reach = kw * sw;
    let m = xs.len();
    // Interior nodes are uniformly spaced, so exp(-d²/2σ²) along them is
    // generated by a second-order multiplicative recurrence.
    let delta = a * src.step;
    let decay = (-2.0 * delta * delta * inv2s2).exp();
    let ecorr = src.step * src.step / 12.0;
    let f = (0..n)
        .map(|j| {
            let y = out_lo + j as f64 * out_step - u;
            let kern = |x: f64| {
                let d = y - a * x;
                if d.abs() > reach {
                    0.0
                } else {
                    (-d * d * inv2s2).exp()
                }
            };
            // Trapezoid end correction, matching `Tab::moments`.
            let dg = |x: f64| {
                let d = y - a * x;
                kern(x) * (src.slope(x) + src.interp(x) * a * d * 2.0 * inv2s2)
            };
            let mut acc = ws[0] * kern(xs[0]) + ws[m - 1] * kern(xs[m - 1]) - ecorr * (dg(su) - dg(sl));
            if m > 2 {
                // Interior indices 1..m-1 map to x = xs[1] + (i-1) step.
                let x1 = xs[1];
                let cnt = m - 2;
                let peak = if a != 0.0 { ((y / a - x1) / src.step).round() } else { 0.0 };
                let i0 = peak.clamp(0.0, (cnt - 1) as f64) as usize;
                let d0 = y - a * (x1 + i0 as f64 * src.step);
                let e0 = (-d0 * d0 * inv2s2).exp();
                // Upward: d decreases by delta each step.
                let (mut e, mut r, mut d) = (e0, ((2.0 * d0 * delta - delta * delta) * inv2s2).exp(), d0);
                for i in i0..cnt {
                    if d.abs() <= reach {
                        acc += ws[1 + i] * e;
                    } else if (d > 0.0) != (delta > 0.0) {
                        break;
                    }
                    e *= r;
                    r *= decay;
                    d -= delta;
                    if e == 0.0 {
                        break;
                    }
                }
                let (mut e, mut r, mut d) = (e0, ((-2.0 * d0 * delta - delta * delta) * inv2s2).exp(), d0);
                for i in (0..i0).rev() {
                    e *= r;
                    r *= decay;
                    d += delta;
                    if e == 0.0 {
                        break;
                    }
                    if d.abs() <= reach {
                        acc += ws[1 + i] * e;
                    } else if (d < 0.0) != (delta > 0.0) {
                        break;
                    }
                }
            }
            acc * norm
        })
        .collect();
    Tab { lo: out_lo, step: out_step, f }
}

struct Evaluation {
    cost: f64,
    means: Vec<f64>,
    sample_probs: Vec<f64>,
}

struct Model {
    plant: PlantParams,
    cost: CostParams,
    schedule: GainSchedule,
    c2: Vec<f64>,
    c0: Vec<f64>,
    /// Unconditional pre-sample standard deviations, `t = 0..=T`.
    sd: Vec<f64>,
    opts: EnvelopeOptions,
}

impl Model {
    fn new(plant: &PlantParams, cost: &CostParams, opts: &EnvelopeOptions) -> Result<Self> {
        plant.validate()?;
        cost.validate()?;
        if !plant.x0.is_point() {
            return Err(Error::invalid("plant.x0.sigma", "envelope design needs a known x0"));
        }
        if plant.horizon < 1 {
            return Err(Error::invalid("plant.horizon", "must be >= 1"));
        }
        if opts.points < 3 {
            return Err(Error::invalid("envelope.points", "must be >= 3"));
        }
        let schedule = gain_schedule(plant, cost);
        let (c2, c0) = post_sample_coefficients(plant, cost, &schedule);
        let mut sd = vec![0.0; plant.horizon + 1];
        for t in 1..=plant.horizon {
            sd[t] = (plant.a * plant.a * sd[t - 1] * sd[t - 1] + plant.sigma_w * plant.sigma_w).sqrt();
        }
        Ok(Model { plant: *plant, cost: *cost, schedule, c2, c0, sd, opts: opts.clone() })
    }

    fn control(&self, pre: PreSample, t: usize, m: f64) -> f64 {
        match pre {
            PreSample::PredictorLinear => -self.schedule.k_star[t] * m,
            PreSample::Zoh { kappa } => kappa,
        }
    }

    fn means(&self, pre: PreSample) -> Vec<f64> {
        let t_end = self.plant.horizon;
        let mut m = vec![self.plant.x0.mu; t_end + 1];
        for t in 0..t_end {
            m[t + 1] = self.plant.a * m[t] + self.control(pre, t, m[t]);
        }
        m
    }

    /// Expected total cost for silence sets `sets[t-1]`, `t = 1..T-1`.
    fn evaluate(&self, sets: &[Interval], pre: PreSample) -> Result<Evaluation> {
        let (a, sw, p, q) = (self.plant.a, self.plant.sigma_w, self.cost.p, self.cost.q);
        let t_end = self.plant.horizon;
        let means = self.means(pre);
        let mut sample_probs = vec![0.0; t_end];
        let u0 = self.control(pre, 0, means[0]);
        let mut total = q * u0 * u0 + self.cost.m;
        if sw == 0.0 {
            // Deterministic: the trajectory is m_t and every sample is at
            // the first exit or at T.
            let mut silent_cost = 0.0;
            for t in 1..=t_end {
                let x = means[t];
                if t == t_end || !sets[t - 1].contains(x) {
                    sample_probs[t - 1] = 1.0;
                    return Ok(Evaluation {
                        cost: total + silent_cost + self.c2[t] * x * x + self.c0[t],
                        means,
                        sample_probs,
                    });
                }
                let u = self.control(pre, t, x);
                silent_cost += p * x * x + q * u * u;
            }
            unreachable!("the sample is forced at T");
        }
        let n = self.opts.points;
        let half = self.opts.width;
        let mk_grid = |t: usize| {
            let lo = means[t] - half * self.sd[t];
            (lo, 2.0 * half * self.sd[t] / (n - 1) as f64)
        };
        let (lo1, step1) = mk_grid(1);
        let mu1 = a * means[0] + u0;
        let mut tab = Tab {
            lo: lo1,
            step: step1,
            f: (0..n)
                .map(|k| {
                    let z = (lo1 + k as f64 * step1 - mu1) / sw;
                    (-0.5 * z * z).exp() / (sw * (2.0 * std::f64::consts::PI).sqrt())
                })
                .collect(),
        };
        for t in 1..=t_end {
            let edge = tab.edge_mass();
            if edge > self.opts.boundary_tol {
                return Err(Error::GridTooCoarse { t, mass: edge });
            }
            let all = tab.moments(Interval::REAL_LINE);
            if t == t_end {
                total += self.c2[t] * all[2] + self.c0[t] * all[0];
                sample_probs[t - 1] = all[0];
                break;
            }
            let s = sets[t - 1];
            let inside = tab.moments(s);
            let out = [all[0] - inside[0], all[1] - inside[1], all[2] - inside[2]];
            sample_probs[t - 1] = out[0].max(0.0);
            total += self.c2[t] * out[2] + self.c0[t] * out[0];
            let u = self.control(pre, t, means[t]);
            total += p * inside[2] + q * u * u * inside[0];
            let (lo, step) = mk_grid(t + 1);
            tab = match tab.clip(s) {
                Some(range) => convolve(&tab, range, a, u, sw, self.opts.kernel_width, lo, step, n),
                None => Tab { lo, step, f: vec![0.0; n] },
            };
        }
        Ok(Evaluation { cost: total, means, sample_probs })
    }
}

/// Expected total cost of a fixed envelope (`intervals[t-1]`, `t = 1..T`;
/// the entry for `T` is ignored).
pub fn envelope_cost(
    plant: &PlantParams,
    cost: &CostParams,
    envelope: &SilenceEnvelope,
    pre: PreSample,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeDesign> {
    let model = Model::new(plant, cost, opts)?;
    if envelope.horizon() != plant.horizon {
        return Err(Error::invalid("envelope.intervals", "need one interval per t = 1..=T"));
    }
    let ev = model.evaluate(&envelope.intervals[..plant.horizon - 1], pre)?;
    Ok(EnvelopeDesign {
        envelope: envelope.clone(),
        pre_sample: pre,
        expected_cost: ev.cost,
        means: ev.means,
        sample_probs: ev.sample_probs,
    })
}

/// Decision vector: offsets `(l_t, h_t)` from `m_t` for `t = 1..T-1`, then
/// `κ` under ZOH.
#[derive(Clone)]
struct Point {
    offsets: Vec<(f64, f64)>,
    kappa: Option<f64>,
}

impl Point {
    fn pre(&self) -> PreSample {
        self.kappa.map_or(PreSample::PredictorLinear, |kappa| PreSample::Zoh { kappa })
    }
}

struct Search<'a> {
    model: &'a Model,
    kappa_range: (f64, f64),
}

impl Search<'_> {
    fn bound(&self, t: usize) -> f64 {
        self.model.opts.width * self.model.sd[t]
    }

    fn sets(&self, pt: &Point) -> Vec<Interval> {
        let means = self.model.means(pt.pre());
        pt.offsets
            .iter()
            .enumerate()
            .map(|(i, &(l, h))| Interval { lo: means[i + 1] + l, hi: means[i + 1] + h })
            .collect()
    }

    fn cost(&self, pt: &Point) -> f64 {
        self.model.evaluate(&self.sets(pt), pt.pre()).map_or(f64::INFINITY, |e| e.cost)
    }

    /// Grid scan over `[a, b]`, then golden section around the best node.
    fn line_search(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
        let n = self.model.opts.scan.max(2);
        let h = (b - a) / (n - 1) as f64;
        let (i, v) = (0..n)
            .map(|i| (i, f(a + i as f64 * h)))
            .fold((0, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });
        let lo = a + i.saturating_sub(1) as f64 * h;
        let hi = (a + (i + 1) as f64 * h).min(b);
        let g = golden_section(f, lo, hi, tol);
        if g.1 < v {
            g
        } else {
            (a + i as f64 * h, v)
        }
    }

    /// Coordinate descent; `symmetric` ties `l_t = -h_t`.
    fn descend(&self, mut pt: Point, symmetric: bool) -> (Point, f64) {
        let tol = self.model.opts.coord_tol * self.model.plant.sigma_w;
        let mut best = self.cost(&pt);
        for _ in 0..self.model.opts.max_sweeps {
            let before = best;
            // Later windows first: an early window is judged against the
            // continuation it actually leads into.
            for t in (0..pt.offsets.len()).rev() {
                let b = self.bound(t + 1);
                if symmetric {
                    let f = |h: f64| {
                        let mut c = pt.clone();
                        c.offsets[t] = (-h, h);
                        self.cost(&c)
                    };
                    let (h, v) = self.line_search(&f, 0.0, b, tol);
                    if v < best {
                        best = v;
                        pt.offsets[t] = (-h, h);
                    }
                } else {
                    let hi = pt.offsets[t].1;
                    let f = |l: f64| {
                        let mut c = pt.clone();
                        c.offsets[t].0 = l;
                        self.cost(&c)
                    };
                    let (l, v) = self.line_search(&f, -b, hi, tol);
                    if v < best {
                        best = v;
                        pt.offsets[t].0 = l;
                    }
                    let lo = pt.offsets[t].0;
                    let f = |h: f64| {
                        let mut c = pt.clone();
                        c.offsets[t].1 = h;
                        self.cost(&c)
                    };
                    let (h, v) = self.line_search(&f, lo, b, tol);
                    if v < best {
                        best = v;
                        pt.offsets[t].1 = h;
                    }
                }
            }
            if pt.kappa.is_some() {
                let f = |k: f64| {
                    let mut c = pt.clone();
                    c.kappa = Some(k);
                    self.cost(&c)
                };
                let (k, v) = self.line_search(&f, self.kappa_range.0, self.kappa_range.1, tol);
                if v < best {
                    best = v;
                    pt.kappa = Some(k);
                }
            }
            if before - best <= 1e-10 * best.abs().max(1.0) {
                break;
            }
        }
        (pt, best)
    }
}

fn regime_point(pre: PreSample, offsets: Vec<(f64, f64)>) -> Point {
    match pre {
        PreSample::PredictorLinear => Point { offsets, kappa: None },
        PreSample::Zoh { kappa } => Point { offsets, kappa: Some(kappa) },
    }
}

fn finish(model: &Model, search: &Search<'_>, pt: &Point) -> Result<EnvelopeDesign> {
    let means = model.means(pt.pre());
    // Empty silence sets are reported as `[m_t, m_t]`.
    let mut intervals: Vec<Interval> = search
        .sets(pt)
        .into_iter()
        .enumerate()
        .map(|(i, iv)| if iv.hi - iv.lo > 1e-9 * model.plant.sigma_w { iv } else { Interval { lo: means[i + 1], hi: means[i + 1] } })
        .collect();
    intervals.push(Interval::REAL_LINE);
    let ev = model.evaluate(&intervals[..model.plant.horizon - 1], pt.pre())?;
    Ok(EnvelopeDesign {
        envelope: SilenceEnvelope { intervals },
        pre_sample: pt.pre(),
        expected_cost: ev.cost,
        means: ev.means,
        sample_probs: ev.sample_probs,
    })
}

/// Deterministic plant: the only choice is the sample time `τ` (and `κ`).
/// Silence sets are `m_t ± 1` before `τ` and exclude `m_τ` at `τ`.
fn noiseless(model: &Model, search: &Search<'_>, regime: PreSample) -> Result<EnvelopeDesign> {
    let t_end = model.plant.horizon;
    let layout = |tau: usize| -> Vec<(f64, f64)> {
        (1..t_end).map(|t| if t < tau { (-1.0, 1.0) } else { (1.0, 2.0) }).collect()
    };
    let mut best: Option<(Point, f64)> = None;
    for tau in 1..=t_end {
        let mut pt = regime_point(regime, layout(tau));
        let mut c = search.cost(&pt);
        if pt.kappa.is_some() {
            let f = |k: f64| {
                let mut p = pt.clone();
                p.kappa = Some(k);
                search.cost(&p)
            };
            let (k, v) = search.line_search(&f, search.kappa_range.0, search.kappa_range.1, 1e-10);
            if v < c {
                c = v;
                pt.kappa = Some(k);
            }
        }
        if best.as_ref().map_or(true, |b| c < b.1) {
            best = Some((pt, c));
        }
    }
    finish(model, search, &best.expect("horizon >= 1").0)
}

/// A non-finite `κ` starts from the certainty-equivalent initial control.
fn starting_regime(model: &Model, regime: PreSample) -> PreSample {
    match regime {
        PreSample::Zoh { kappa } if !kappa.is_finite() => {
            PreSample::Zoh { kappa: -model.schedule.k_star[0] * model.plant.x0.mu }
        }
        r => r,
    }
}

fn setup<'a>(model: &'a Model, regime: PreSample) -> Search<'a> {
    let k0 = -model.schedule.k_star[0] * model.plant.x0.mu;
    let scale = model.plant.x0.mu.abs().max(model.plant.sigma_w).max(1.0);
    let center = match regime {
        PreSample::Zoh { kappa } => kappa,
        PreSample::PredictorLinear => k0,
    };
    Search { model, kappa_range: (center - 3.0 * scale, center + 3.0 * scale) }
}

/// Best envelope symmetric about the pre-sample predictor (and best `κ` under
/// ZOH; the `κ` in `regime` is the starting value).
pub fn symmetric_envelope(
    plant: &PlantParams,
    cost: &CostParams,
    regime: PreSample,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeDesign> {
    let model = Model::new(plant, cost, opts)?;
    let regime = starting_regime(&model, regime);
    let search = setup(&model, regime);
    if plant.sigma_w == 0.0 {
        return noiseless(&model, &search, regime);
    }
    let (pt, _) = best_symmetric(&model, &search, regime);
    finish(&model, &search, &pt)
}

fn kappa_starts(model: &Model, regime: PreSample) -> Vec<PreSample> {
    match regime {
        PreSample::PredictorLinear => vec![regime],
        PreSample::Zoh { kappa } => model
            .opts
            .kappa_starts
            .iter()
            .map(|d| PreSample::Zoh { kappa: kappa + d * model.plant.sigma_w })
            .collect(),
    }
}

fn best_of(runs: impl Iterator<Item = (Point, f64)>) -> Option<(Point, f64)> {
    runs.fold(None, |best, r| match best {
        Some(b) if b.1 <= r.1 => Some(b),
        _ => Some(r),
    })
}

fn best_symmetric(model: &Model, search: &Search<'_>, regime: PreSample) -> (Point, f64) {
    let n = model.plant.horizon - 1;
    let runs = kappa_starts(model, regime).into_iter().flat_map(|r| {
        model.opts.starts.iter().map(move |&c| {
            let offsets = (1..=n).map(|t| (-c * model.sd[t], c * model.sd[t])).collect();
            search.descend(regime_point(r, offsets), true)
        })
    });
    best_of(runs).unwrap_or_else(|| {
        let p = regime_point(regime, Vec::new());
        let c = search.cost(&p);
        (p, c)
    })
}

/// Minimizes the expected cost over silence intervals (and `κ` under ZOH)
/// by coordinate descent with golden-section line searches. Starts are the
/// best symmetric envelope and windows of every width in `opts.starts`
/// shifted by every entry of `opts.shifts`, for every `κ` start.
pub fn optimize_envelope(
    plant: &PlantParams,
    cost: &CostParams,
    regime: PreSample,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeDesign> {
    let model = Model::new(plant, cost, opts)?;
    let regime = starting_regime(&model, regime);
    let search = setup(&model, regime);
    if plant.sigma_w == 0.0 {
        return noiseless(&model, &search, regime);
    }
    let (sym, _) = best_symmetric(&model, &search, regime);
    let mut starts = vec![sym];
    for r in kappa_starts(&model, regime) {
        for &c in &opts.starts {
            for &sh in &opts.shifts {
                let offsets = (1..plant.horizon)
                    .map(|t| ((sh - c) * model.sd[t], (sh + c) * model.sd[t]))
                    .collect();
                starts.push(regime_point(r, offsets));
            }
        }
    }
    let best = best_of(starts.into_iter().map(|p| search.descend(p, false))).expect("at least one start");
    finish(&model, &search, &best.0)
}
