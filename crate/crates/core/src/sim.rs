//! Seeded closed-loop Monte Carlo over plant, encoder, channel and
//! controller.
//!
//! Every path draws from its own counter-based streams, so results do not
//! depend on the worker count. Per-path costs are reduced in path order with
//! pairwise summation.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::coding::{comm_cost, envelope_decide, ChannelSpec, CommCost, Compander, Decision, Quantizer, SilenceEnvelope, UsageLog};
use crate::design::{ConstraintSet, GreedyEncoder, LloydOptions, PreSample, UniformEncoder};
use crate::error::{Error, Result};
use crate::estimation::{pick, ControlPolicy, EncoderPolicy, HistoryTree, InnovationEncoder, StateEncoder};
use crate::exec::{mean_and_stderr, pairwise_sum, Executor};
use crate::gauss::{quadrature::integrate, std_pdf, Interval};
use crate::lqcore::{gain_schedule, CostParams, GainSchedule, PlantParams};
use crate::rng::{self, domain, StreamRng};

const CHUNK: usize = 2048;

/// Encoder family. Per-time lists repeat their last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncoderConfig {
    /// Fixed thresholds on `x_t`.
    StateQuantizer { thresholds: Vec<Vec<f64>> },
    /// Fixed thresholds on the control-free state `ζ_t`.
    InnovationQuantizer { thresholds: Vec<Vec<f64>> },
    /// Lloyd design on each predictive law, on `ζ_t`.
    Greedy {
        levels: Vec<usize>,
        #[serde(default)]
        lloyd: LloydOptions,
    },
    /// Equal cells over the predictive mean ± `span` standard deviations.
    Uniform { levels: Vec<usize>, span: f64 },
    /// Event trigger with one sample after `t = 0`; intervals for `t = 1..=T`.
    Envelope { intervals: Vec<Interval>, pre_sample: PreSample },
    /// Additive-noise channel input `ι_t = map(x_t - x̂_{t|t-1})`.
    Compander { map: Compander },
}

impl EncoderConfig {
    fn is_quantizer(&self) -> bool {
        matches!(
            self,
            EncoderConfig::StateQuantizer { .. }
                | EncoderConfig::InnovationQuantizer { .. }
                | EncoderConfig::Greedy { .. }
                | EncoderConfig::Uniform { .. }
        )
    }

    fn name(&self) -> &'static str {
        match self {
            EncoderConfig::StateQuantizer { .. } => "state_quantizer",
            EncoderConfig::InnovationQuantizer { .. } => "innovation_quantizer",
            EncoderConfig::Greedy { .. } => "greedy",
            EncoderConfig::Uniform { .. } => "uniform",
            EncoderConfig::Envelope { .. } => "envelope",
            EncoderConfig::Compander { .. } => "compander",
        }
    }
}

/// Control law. Apart from the initial overrides, controls act on the
/// controller's conditional mean `x̂_{t|t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerConfig {
    /// `u_t = -k*_t x̂_{t|t}`.
    Ce,
    /// `u_0` fixed, CE afterwards.
    FixedInitial { u0: f64 },
    /// `u_0 = u0[z_0 - 1]`, CE afterwards.
    InitialByLabel { u0: Vec<f64> },
    /// The CE stage minimizer restricted to `set`: the feasible point
    /// nearest to `-k*_t x̂_{t|t}`.
    Restricted { set: ConstraintSet },
    Zero,
}

/// Zero-mean, unit-variance sampler for a user-supplied noise law.
pub trait NoiseSampler: Send + Sync {
    /// Variate for `(path, t)` drawn from the path's own stream.
    fn sample(&self, path: u64, t: usize, rng: &mut StreamRng) -> f64;
}

/// Law of `w_t / σ_w`.
#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseLaw {
    #[default]
    Gaussian,
    Uniform,
    Laplace,
    #[serde(skip)]
    Custom(Arc<dyn NoiseSampler>),
}

impl fmt::Debug for NoiseLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseLaw::Gaussian => f.write_str("Gaussian"),
            NoiseLaw::Uniform => f.write_str("Uniform"),
            NoiseLaw::Laplace => f.write_str("Laplace"),
            NoiseLaw::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl PartialEq for NoiseLaw {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (NoiseLaw::Custom(a), NoiseLaw::Custom(b)) => Arc::ptr_eq(a, b),
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl NoiseLaw {
    fn sample(&self, path: u64, t: usize, g: &mut StreamRng) -> f64 {
        match self {
            NoiseLaw::Gaussian => StandardNormal.sample(g),
            NoiseLaw::Uniform => 3f64.sqrt() * (2.0 * g.gen::<f64>() - 1.0),
            NoiseLaw::Laplace => {
                let u: f64 = g.gen::<f64>() - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln() / std::f64::consts::SQRT_2
            }
            NoiseLaw::Custom(s) => s.sample(path, t, g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub plant: PlantParams,
    pub cost: CostParams,
    pub channel: ChannelSpec,
    pub encoder: EncoderConfig,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub noise: NoiseLaw,
}

impl Scenario {
    /// Checks parameters and that channel, encoder and controller fit together.
    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.cost.validate()?;
        let t_end = self.plant.horizon;
        self.channel.validate(t_end)?;
        let mismatch = |why: &str| {
            Error::Wiring(format!("channel.kind and encoder.kind: {why} (encoder is {})", self.encoder.name()))
        };
        match &self.channel {
            ChannelSpec::FixedRate { n } => {
                if !self.encoder.is_quantizer() {
                    return Err(mismatch("fixed_rate needs a quantizer encoder"));
                }
                if let Some(levels) = self.max_levels() {
                    if levels > *n {
                        return Err(mismatch(&format!("encoder uses {levels} cells but the alphabet has {n}")));
                    }
                }
            }
            ChannelSpec::VariableRate { .. } => {
                if !self.encoder.is_quantizer() {
                    return Err(mismatch("variable_rate needs a quantizer encoder"));
                }
            }
            ChannelSpec::EventTriggered { n0, .. } => {
                let EncoderConfig::Envelope { intervals, pre_sample } = &self.encoder else {
                    return Err(mismatch("event_triggered needs an envelope encoder"));
                };
                if *n0 < 1 {
                    return Err(Error::invalid("channel.n0", "the envelope encoder sends one sample"));
                }
                if intervals.len() != t_end {
                    return Err(Error::invalid("encoder.intervals", "need one interval per t = 1..=T"));
                }
                if let PreSample::Zoh { kappa } = pre_sample {
                    if !kappa.is_finite() {
                        return Err(Error::invalid("encoder.pre_sample.kappa", "must be finite"));
                    }
                }
                if !self.plant.x0.is_point() {
                    return Err(Error::invalid("plant.x0.sigma", "the envelope controller needs a known x0"));
                }
                if self.controller != ControllerConfig::Ce {
                    return Err(Error::Wiring(
                        "controller.kind: the envelope loop fixes its own controls, use \"ce\"".into(),
                    ));
                }
            }
            ChannelSpec::AdditiveNoise { .. } => {
                if !matches!(self.encoder, EncoderConfig::Compander { .. }) {
                    return Err(mismatch("additive_noise needs a compander encoder"));
                }
                if !matches!(self.controller, ControllerConfig::Ce | ControllerConfig::FixedInitial { .. } | ControllerConfig::Zero) {
                    return Err(Error::Wiring("controller.kind: additive_noise supports ce, fixed_initial, zero".into()));
                }
            }
        }
        if !matches!(self.channel, ChannelSpec::FixedRate { .. }) && self.cost.m != self.channel.multiplier() {
            return Err(Error::Wiring(format!(
                "cost.m = {} and channel.m = {} must agree",
                self.cost.m,
                self.channel.multiplier()
            )));
        }
        match &self.encoder {
            EncoderConfig::StateQuantizer { thresholds } | EncoderConfig::InnovationQuantizer { thresholds } => {
                if thresholds.is_empty() {
                    return Err(Error::invalid("encoder.thresholds", "need at least one time"));
                }
                for th in thresholds {
                    Quantizer::new(th.clone())?;
                }
            }
            EncoderConfig::Greedy { levels, .. } | EncoderConfig::Uniform { levels, .. } => {
                if levels.is_empty() || levels.contains(&0) {
                    return Err(Error::invalid("encoder.levels", "need nonempty sizes >= 1"));
                }
            }
            EncoderConfig::Envelope { .. } | EncoderConfig::Compander { .. } => {}
        }
        if let EncoderConfig::Uniform { span, .. } = self.encoder {
            if !(span > 0.0) {
                return Err(Error::invalid("encoder.span", "must be > 0"));
            }
        }
        match &self.controller {
            ControllerConfig::Restricted { set } => set.validate()?,
            ControllerConfig::FixedInitial { u0 } if !u0.is_finite() => {
                return Err(Error::invalid("controller.u0", "must be finite"))
            }
            ControllerConfig::InitialByLabel { u0 } if u0.is_empty() || u0.iter().any(|u| !u.is_finite()) => {
                return Err(Error::invalid("controller.u0", "need finite controls, one per time-0 label"))
            }
            _ => {}
        }
        Ok(())
    }

    fn max_levels(&self) -> Option<usize> {
        match &self.encoder {
            EncoderConfig::StateQuantizer { thresholds } | EncoderConfig::InnovationQuantizer { thresholds } => {
                thresholds.iter().map(|t| t.len() + 1).max()
            }
            EncoderConfig::Greedy { levels, .. } | EncoderConfig::Uniform { levels, .. } => levels.iter().copied().max(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    /// Mean total cost over the feasible paths.
    pub mean_cost: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub comm_cost_mean: f64,
    pub infeasible_fraction: f64,
    pub seed: u64,
}

struct PathOutcome {
    cost: f64,
    comm: CommCost,
}

struct Controller<'a> {
    config: &'a ControllerConfig,
    schedule: &'a GainSchedule,
}

impl ControlPolicy for Controller<'_> {
    fn control(&self, t: usize, xhat: f64, history: &[usize]) -> f64 {
        let free = -self.schedule.k_star[t] * xhat;
        match self.config {
            ControllerConfig::Ce => free,
            ControllerConfig::FixedInitial { u0 } if t == 0 => *u0,
            ControllerConfig::InitialByLabel { u0 } if t == 0 => pick(u0, history[0] - 1),
            ControllerConfig::FixedInitial { .. } | ControllerConfig::InitialByLabel { .. } => free,
            ControllerConfig::Restricted { set } => project(set, free),
            ControllerConfig::Zero => 0.0,
        }
    }
}

/// Feasible point nearest to `u`; ties go to the smaller `|v|`.
fn project(set: &ConstraintSet, u: f64) -> f64 {
    match set {
        ConstraintSet::Unconstrained => u,
        ConstraintSet::Interval { lo, hi } => u.clamp(*lo, *hi),
        ConstraintSet::Finite { values } => values.iter().copied().fold(f64::NAN, |best, v| {
            let (d, db) = ((v - u).abs(), (best - u).abs());
            if best.is_nan() || d < db || (d == db && v.abs() < best.abs()) {
                v
            } else {
                best
            }
        }),
    }
}

fn build_encoder(sc: &Scenario, schedule: &GainSchedule) -> Box<dyn EncoderPolicy> {
    let quantizers = |th: &[Vec<f64>]| -> Vec<Quantizer> {
        th.iter().map(|t| Quantizer::new(t.clone()).expect("validated")).collect()
    };
    match &sc.encoder {
        EncoderConfig::StateQuantizer { thresholds } => Box::new(StateEncoder(quantizers(thresholds))),
        EncoderConfig::InnovationQuantizer { thresholds } => Box::new(InnovationEncoder(quantizers(thresholds))),
        EncoderConfig::Greedy { levels, lloyd } => {
            Box::new(GreedyEncoder { schedule: schedule.clone(), levels: levels.clone(), opts: *lloyd })
        }
        EncoderConfig::Uniform { levels, span } => Box::new(UniformEncoder { levels: levels.clone(), span: *span }),
        EncoderConfig::Envelope { .. } | EncoderConfig::Compander { .. } => unreachable!("not a quantizer encoder"),
    }
}

struct Streams {
    noise: StreamRng,
    channel: StreamRng,
}

fn streams(seed: u64, path: u64) -> Streams {
    Streams {
        noise: rng::stream(seed, domain::PATH, rng::derive(path, &[0])),
        channel: rng::stream(seed, domain::PATH, rng::derive(path, &[1])),
    }
}

fn initial_state(sc: &Scenario, s: &mut Streams) -> f64 {
    let z: f64 = StandardNormal.sample(&mut s.noise);
    sc.plant.x0.mu + sc.plant.x0.sigma * z
}

fn noise(sc: &Scenario, path: u64, t: usize, s: &mut Streams) -> f64 {
    sc.plant.sigma_w * sc.noise.sample(path, t, &mut s.noise)
}

fn stage(cost: &CostParams, t: usize, x: f64, u: f64) -> f64 {
    let state = if t == 0 { 0.0 } else { cost.p * x * x };
    state + cost.q * u * u
}

fn tree_path(sc: &Scenario, tree: &HistoryTree, path: u64, seed: u64) -> Result<PathOutcome> {
    let mut s = streams(seed, path);
    let mut x = initial_state(sc, &mut s);
    let mut pred = 0;
    let mut total = 0.0;
    let mut sizes = Vec::with_capacity(sc.plant.horizon + 1);
    for t in 0..=sc.plant.horizon {
        sizes.push(tree.pred[pred].quantizer.levels() as u64);
        let (_, node) = tree.step(pred, x);
        total += stage(&sc.cost, t, x, node.u);
        x = sc.plant.a * x + node.u + noise(sc, path, t, &mut s);
        if let Some(next) = node.next {
            pred = next;
        }
    }
    total += x * x;
    let comm = comm_cost(&sc.channel, &UsageLog::AlphabetSizes(sizes))?;
    Ok(PathOutcome { cost: total, comm })
}

fn envelope_path(
    sc: &Scenario,
    schedule: &GainSchedule,
    env: &SilenceEnvelope,
    pre: PreSample,
    path: u64,
    seed: u64,
) -> Result<PathOutcome> {
    let mut s = streams(seed, path);
    let (a, t_end) = (sc.plant.a, sc.plant.horizon);
    let mut x = initial_state(sc, &mut s);
    // Pre-sample predictor, then the open-loop prediction from the sample.
    let mut xhat = sc.plant.x0.mu;
    let mut sampled = false;
    let mut samples = vec![false; t_end + 1];
    let mut total = 0.0;
    for t in 0..=t_end {
        if t >= 1 && !sampled {
            if let Decision::Sample(v) = envelope_decide(env, t, x, false) {
                sampled = true;
                samples[t] = true;
                xhat = v;
            }
        }
        let u = match (sampled, pre) {
            (false, PreSample::Zoh { kappa }) => kappa,
            _ => -schedule.k_star[t] * xhat,
        };
        total += stage(&sc.cost, t, x, u);
        x = a * x + u + noise(sc, path, t, &mut s);
        xhat = a * xhat + u;
    }
    total += x * x;
    let comm = comm_cost(&sc.channel, &UsageLog::Samples(samples))?;
    Ok(PathOutcome { cost: total, comm })
}

/// Linear MMSE decoder for `y = ι(e) + χ` with `e ~ N(0, P)`: returns the
/// gain and the posterior error variance.
fn additive_gain(map: &Compander, iota_bar: f64, sigma_chi: f64, p: f64) -> (f64, f64) {
    if p <= 0.0 {
        return (0.0, 0.0);
    }
    let sd = p.sqrt();
    let weight = |z: f64| std_pdf(z);
    let iota = |z: f64| map.apply(sd * z, iota_bar);
    let cov = sd * integrate(&|z| z * iota(z) * weight(z), -12.0, 12.0, 1e-13);
    let var = integrate(&|z| iota(z) * iota(z) * weight(z), -12.0, 12.0, 1e-13);
    let denom = var + sigma_chi * sigma_chi;
    if denom <= 0.0 {
        return (0.0, p);
    }
    let gain = cov / denom;
    (gain, (p - gain * cov).max(0.0))
}

struct AdditiveDecoder {
    gains: Vec<f64>,
}

impl AdditiveDecoder {
    fn new(sc: &Scenario, map: &Compander) -> Self {
        let ChannelSpec::AdditiveNoise { sigma_chi, iota_bar, .. } = sc.channel else {
            unreachable!("validated wiring")
        };
        let mut p = sc.plant.x0.variance();
        let mut gains = Vec::with_capacity(sc.plant.horizon + 1);
        for _ in 0..=sc.plant.horizon {
            let (g, post) = additive_gain(map, iota_bar, sigma_chi, p);
            gains.push(g);
            p = sc.plant.a * sc.plant.a * post + sc.plant.sigma_w * sc.plant.sigma_w;
        }
        AdditiveDecoder { gains }
    }
}

fn additive_path(
    sc: &Scenario,
    schedule: &GainSchedule,
    map: &Compander,
    dec: &AdditiveDecoder,
    path: u64,
    seed: u64,
) -> Result<PathOutcome> {
    let ChannelSpec::AdditiveNoise { sigma_chi, iota_bar, .. } = sc.channel else {
        unreachable!("validated wiring")
    };
    let mut s = streams(seed, path);
    let mut x = initial_state(sc, &mut s);
    let mut prior = sc.plant.x0.mu;
    let mut inputs = Vec::with_capacity(sc.plant.horizon + 1);
    let mut total = 0.0;
    for t in 0..=sc.plant.horizon {
        let iota = map.apply(x - prior, iota_bar);
        let chi: f64 = StandardNormal.sample(&mut s.channel);
        inputs.push(iota);
        let xhat = prior + dec.gains[t] * (iota + sigma_chi * chi);
        let u = match sc.controller {
            ControllerConfig::FixedInitial { u0 } if t == 0 => u0,
            ControllerConfig::Zero => 0.0,
            _ => -schedule.k_star[t] * xhat,
        };
        total += stage(&sc.cost, t, x, u);
        x = sc.plant.a * x + u + noise(sc, path, t, &mut s);
        prior = sc.plant.a * xhat + u;
    }
    total += x * x;
    let comm = comm_cost(&sc.channel, &UsageLog::Inputs(inputs))?;
    Ok(PathOutcome { cost: total, comm })
}

fn reduce(outcomes: Vec<PathOutcome>, n_paths: usize, seed: u64) -> RunResult {
    let mut costs = Vec::with_capacity(outcomes.len());
    let mut comms = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        if let CommCost::Feasible(c) = o.comm {
            costs.push(o.cost + c);
            comms.push(c);
        }
    }
    let (mean_cost, std_error) = mean_and_stderr(&costs);
    let comm_cost_mean = if comms.is_empty() { f64::NAN } else { pairwise_sum(&comms) / comms.len() as f64 };
    RunResult {
        mean_cost,
        std_error,
        n_paths,
        comm_cost_mean,
        infeasible_fraction: (n_paths - costs.len()) as f64 / n_paths as f64,
        seed,
    }
}

fn run_paths(
    n_paths: usize,
    exec: &Executor,
    f: impl Fn(u64) -> Result<PathOutcome> + Sync + Send,
) -> Result<Vec<PathOutcome>> {
    let chunks = n_paths.div_ceil(CHUNK);
    let parts = exec.map(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n_paths);
        (lo..hi).map(|i| f(i as u64)).collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(n_paths);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Runs `n_paths` independent closed-loop paths.
///
/// Quantizer encoders are paired with the exact conditional-mean controller
/// from the history tree. The envelope loop applies its pre-sample law, then
/// CE on the open-loop prediction from the sample. The additive-noise loop
/// uses a linear MMSE decoder.
pub fn simulate(sc: &Scenario, n_paths: usize, seed: u64, exec: &Executor) -> Result<RunResult> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "must be >= 1"));
    }
    sc.validate()?;
    let schedule = gain_schedule(&sc.plant, &sc.cost);
    let outcomes = match &sc.encoder {
        EncoderConfig::Envelope { intervals, pre_sample } => {
            let env = SilenceEnvelope { intervals: intervals.clone() };
            run_paths(n_paths, exec, |i| envelope_path(sc, &schedule, &env, *pre_sample, i, seed))?
        }
        EncoderConfig::Compander { map } => {
            let dec = AdditiveDecoder::new(sc, map);
            run_paths(n_paths, exec, |i| additive_path(sc, &schedule, map, &dec, i, seed))?
        }
        _ => {
            let encoder = build_encoder(sc, &schedule);
            let controller = Controller { config: &sc.controller, schedule: &schedule };
            let tree = HistoryTree::build(&sc.plant, encoder.as_ref(), &controller)?;
            run_paths(n_paths, exec, |i| tree_path(sc, &tree, i, seed))?
        }
    };
    Ok(reduce(outcomes, n_paths, seed))
}

/// Scalar scenario fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    PlantA,
    SigmaW,
    X0Mean,
    X0Sigma,
    CostP,
    CostQ,
    /// `u_0` of a `fixed_initial` controller.
    U0,
    /// `u_0` after time-0 label `i + 1` of an `initial_by_label` controller.
    U0Label(usize),
    /// Threshold `j` of the time-`t` quantizer.
    Threshold { t: usize, j: usize },
}

impl Axis {
    /// Accepts dotted field paths and the short names `u0`, `alpha` (`u_0`
    /// after label 1) and `beta` (after label 2).
    pub fn parse(name: &str) -> Result<Axis> {
        let parts: Vec<&str> = name.split('.').collect();
        let index = |s: &str| s.parse::<usize>().map_err(|_| Error::UnknownAxis(name.to_string()));
        Ok(match parts.as_slice() {
            ["plant", "a"] => Axis::PlantA,
            ["plant", "sigma_w"] => Axis::SigmaW,
            ["plant", "x0", "mu"] => Axis::X0Mean,
            ["plant", "x0", "sigma"] => Axis::X0Sigma,
            ["cost", "p"] => Axis::CostP,
            ["cost", "q"] => Axis::CostQ,
            ["controller", "u0"] | ["u0"] => Axis::U0,
            ["controller", "u0", i] => Axis::U0Label(index(i)?),
            ["alpha"] => Axis::U0Label(0),
            ["beta"] => Axis::U0Label(1),
            ["encoder", "thresholds", t, j] => Axis::Threshold { t: index(t)?, j: index(j)? },
            _ => return Err(Error::UnknownAxis(name.to_string())),
        })
    }

    pub fn apply(&self, sc: &mut Scenario, v: f64) -> Result<()> {
        let wrong = |what: &str| Error::Wiring(format!("axis {self:?} needs {what}"));
        match *self {
            Axis::PlantA => sc.plant.a = v,
            Axis::SigmaW => sc.plant.sigma_w = v,
            Axis::X0Mean => sc.plant.x0.mu = v,
            Axis::X0Sigma => sc.plant.x0.sigma = v,
            Axis::CostP => sc.cost.p = v,
            Axis::CostQ => sc.cost.q = v,
            Axis::U0 => match &mut sc.controller {
                ControllerConfig::FixedInitial { u0 } => *u0 = v,
                c @ ControllerConfig::Ce => *c = ControllerConfig::FixedInitial { u0: v },
                _ => return Err(wrong("a ce or fixed_initial controller")),
            },
            Axis::U0Label(i) => match &mut sc.controller {
                ControllerConfig::InitialByLabel { u0 } if i < u0.len() => u0[i] = v,
                _ => return Err(wrong("an initial_by_label controller with that label")),
            },
            Axis::Threshold { t, j } => match &mut sc.encoder {
                EncoderConfig::StateQuantizer { thresholds } | EncoderConfig::InnovationQuantizer { thresholds } => {
                    let slot = thresholds.get_mut(t).and_then(|th| th.get_mut(j)).ok_or_else(|| wrong("that threshold"))?;
                    *slot = v;
                }
                _ => return Err(wrong("a fixed quantizer encoder")),
            },
        }
        Ok(())
    }
}

/// One [`simulate`] per value, each with seed `derive(seed, [index])`.
pub fn sweep(
    template: &Scenario,
    axis: &str,
    values: &[f64],
    n_paths: usize,
    seed: u64,
    exec: &Executor,
) -> Result<Vec<RunResult>> {
    let axis = Axis::parse(axis)?;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut sc = template.clone();
            axis.apply(&mut sc, v)?;
            simulate(&sc, n_paths, rng::derive(seed, &[i as u64]), exec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::Normal;

    fn deterministic() -> Scenario {
        Scenario {
            plant: PlantParams { a: 1.0, sigma_w: 0.0, x0: Normal::point(1.0), horizon: 2 },
            cost: CostParams { p: 1.0, q: 1.0, m: 0.0 },
            channel: ChannelSpec::FixedRate { n: 1 },
            encoder: EncoderConfig::StateQuantizer { thresholds: vec![vec![]] },
            controller: ControllerConfig::Zero,
            noise: NoiseLaw::Gaussian,
        }
    }

    #[test]
    fn deterministic_path_cost() {
        // x stays at 1: p·1 + p·1 at t = 1, 2 and the terminal x_3² = 1.
        let r = simulate(&deterministic(), 64, 0, &Executor::new(1)).unwrap();
        assert_eq!(r.mean_cost, 3.0);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.infeasible_fraction, 0.0);
    }

    #[test]
    fn wiring_errors_name_both_fields() {
        let mut sc = deterministic();
        sc.channel = ChannelSpec::EventTriggered { n0: 1, m: 0.0 };
        let e = sc.validate().unwrap_err().to_string();
        assert!(e.contains("channel") && e.contains("encoder"), "{e}");
    }

    #[test]
    fn alphabet_larger_than_channel_is_rejected() {
        let mut sc = deterministic();
        sc.encoder = EncoderConfig::StateQuantizer { thresholds: vec![vec![0.0]] };
        assert!(matches!(sc.validate(), Err(Error::Wiring(_))));
    }

    #[test]
    fn projection_prefers_nearest_then_smallest() {
        let set = ConstraintSet::Finite { values: vec![-1.0, 0.0, 1.0] };
        assert_eq!(project(&set, 0.6), 1.0);
        assert_eq!(project(&set, 0.5), 0.0);
        assert_eq!(project(&set, -0.5), 0.0);
        assert_eq!(project(&ConstraintSet::Interval { lo: -2.0, hi: 2.0 }, 3.0), 2.0);
    }

    #[test]
    fn axes_parse() {
        assert_eq!(Axis::parse("alpha").unwrap(), Axis::U0Label(0));
        assert_eq!(Axis::parse("encoder.thresholds.1.0").unwrap(), Axis::Threshold { t: 1, j: 0 });
        assert!(matches!(Axis::parse("plant.b"), Err(Error::UnknownAxis(_))));
    }

    #[test]
    fn empty_sweep_is_empty() {
        let r = sweep(&deterministic(), "u0", &[], 10, 0, &Executor::new(1)).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn noise_laws_have_unit_variance() {
        for law in [NoiseLaw::Gaussian, NoiseLaw::Uniform, NoiseLaw::Laplace] {
            let mut g = rng::stream(1, domain::ORACLE, 0);
            let xs: Vec<f64> = (0..200_000).map(|i| law.sample(0, i, &mut g)).collect();
            let (m, _) = mean_and_stderr(&xs);
            let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
            assert!(m.abs() < 0.01 && (v - 1.0).abs() < 0.02, "{law:?}: {m} {v}");
        }
    }
}
