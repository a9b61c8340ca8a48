//! Encoders, channel models and communication-cost accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::Interval;

/// Scalar quantizer with `N - 1` strictly increasing thresholds and labels
/// `1..=N`. Cells are right-closed: `x = θ_i` gets label `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Quantizer {
    thresholds: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Quantizer {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Quantizer::new(v)
    }
}

impl From<Quantizer> for Vec<f64> {
    fn from(q: Quantizer) -> Self {
        q.thresholds
    }
}

impl Quantizer {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("quantizer.thresholds", "must be finite"));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("quantizer.thresholds", "must be strictly increasing"));
        }
        Ok(Quantizer { thresholds })
    }

    /// The one-cell quantizer: sends nothing.
    pub fn trivial() -> Self {
        Quantizer { thresholds: Vec::new() }
    }

    /// `n` equal cells spanning `[center - half_width, center + half_width]`;
    /// the outer cells extend to infinity.
    pub fn uniform(n: usize, center: f64, half_width: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("quantizer.levels", "must be >= 1"));
        }
        let step = 2.0 * half_width / n as f64;
        Quantizer::new((1..n).map(|k| center - half_width + k as f64 * step).collect())
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Label in `1..=N`.
    pub fn apply(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t < x) + 1
    }

    /// Cell of a label in `1..=N`.
    pub fn cell(&self, label: usize) -> Interval {
        assert!(label >= 1 && label <= self.levels(), "label {label} out of range");
        let lo = if label == 1 { f64::NEG_INFINITY } else { self.thresholds[label - 2] };
        let hi = if label == self.levels() { f64::INFINITY } else { self.thresholds[label - 1] };
        Interval { lo, hi }
    }

    pub fn cells(&self) -> Vec<Interval> {
        (1..=self.levels()).map(|l| self.cell(l)).collect()
    }

    pub fn shifted(&self, c: f64) -> Quantizer {
        Quantizer { thresholds: self.thresholds.iter().map(|t| t + c).collect() }
    }
}

pub fn quantize(qz: &Quantizer, x: f64) -> usize {
    qz.apply(x)
}

/// Running effect of past controls on the state:
/// `accumulated_t = Σ_{j<t} a^{t-1-j} u_j`, so that `ζ_t = x_t - accumulated_t`
/// obeys `ζ_{t+1} = a ζ_t + w_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationTracker {
    pub accumulated: f64,
    pub a: f64,
}

impl InnovationTracker {
    pub fn new(a: f64) -> Self {
        InnovationTracker { accumulated: 0.0, a }
    }

    #[must_use]
    pub fn step(self, u: f64) -> Self {
        InnovationTracker { accumulated: self.a * self.accumulated + u, a: self.a }
    }

    pub fn zeta(&self, x: f64) -> f64 {
        x - self.accumulated
    }
}

pub fn innovation_step(tr: InnovationTracker, u: f64) -> InnovationTracker {
    tr.step(u)
}

/// Label of the control-free state `zeta` against cells translated by the
/// accumulated control.
pub fn innovation_encode(qz: &Quantizer, tr: &InnovationTracker, zeta: f64) -> usize {
    qz.apply(zeta + tr.accumulated)
}

/// Silence intervals for `t = 1..=T`. A sample is sent the first time the
/// state leaves its interval, and at `T` if none was sent before.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SilenceEnvelope {
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Decision {
    Silence,
    Sample(f64),
}

impl SilenceEnvelope {
    pub fn horizon(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval(&self, t: usize) -> Interval {
        self.intervals[t - 1]
    }
}

/// Exactly-one-sample trigger: sample on the first exit, or at `t = T`.
pub fn envelope_decide(env: &SilenceEnvelope, t: usize, x: f64, already_sampled: bool) -> Decision {
    if already_sampled {
        return Decision::Silence;
    }
    if t >= env.horizon() || !env.interval(t).contains(x) {
        Decision::Sample(x)
    } else {
        Decision::Silence
    }
}

/// Channel models. Each variant with a cost carries its multiplier `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// `n`-symbol alphabet at every time, no communication cost.
    FixedRate { n: usize },
    /// Per-time alphabet sizes up to `eta_bar`, total bits capped at
    /// `rate · (T + 1)`.
    VariableRate { eta_bar: u64, rate: f64, m: f64 },
    /// At most `n0` samples over the horizon.
    EventTriggered { n0: usize, m: f64 },
    /// Real-valued input `|ι| <= iota_bar`, Gaussian noise `sigma_chi`,
    /// total power capped at `power · (T + 1)`.
    AdditiveNoise { sigma_chi: f64, iota_bar: f64, power: f64, m: f64 },
}

impl ChannelSpec {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        let nonneg = |v: f64, f: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("channel.{f}"), "must be finite and >= 0"))
            }
        };
        match *self {
            ChannelSpec::FixedRate { n } => {
                if n == 0 {
                    return Err(Error::invalid("channel.n", "must be >= 1"));
                }
            }
            ChannelSpec::VariableRate { eta_bar, rate, m } => {
                if eta_bar == 0 {
                    return Err(Error::invalid("channel.eta_bar", "must be >= 1"));
                }
                nonneg(rate, "rate")?;
                nonneg(m, "m")?;
                if rate > (eta_bar as f64).log2() + 1e-12 {
                    return Err(Error::invalid("channel.rate", "must be <= log2(eta_bar)"));
                }
            }
            ChannelSpec::EventTriggered { n0, m } => {
                nonneg(m, "m")?;
                if n0 > horizon + 1 {
                    return Err(Error::invalid("channel.n0", "must be <= T + 1"));
                }
            }
            ChannelSpec::AdditiveNoise { sigma_chi, iota_bar, power, m } => {
                nonneg(sigma_chi, "sigma_chi")?;
                nonneg(iota_bar, "iota_bar")?;
                nonneg(power, "power")?;
                nonneg(m, "m")?;
            }
        }
        Ok(())
    }

    pub fn multiplier(&self) -> f64 {
        match *self {
            ChannelSpec::FixedRate { .. } => 0.0,
            ChannelSpec::VariableRate { m, .. }
            | ChannelSpec::EventTriggered { m, .. }
            | ChannelSpec::AdditiveNoise { m, .. } => m,
        }
    }
}

/// What the encoder actually used on one path, one entry per time `0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub enum UsageLog {
    AlphabetSizes(Vec<u64>),
    Samples(Vec<bool>),
    Inputs(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CommCost {
    Feasible(f64),
    Infeasible,
}

impl CommCost {
    pub fn value(&self) -> Option<f64> {
        match *self {
            CommCost::Feasible(v) => Some(v),
            CommCost::Infeasible => None,
        }
    }
}

/// Communication cost with `φ(ι) = ι²` for the additive-noise channel.
pub fn comm_cost(spec: &ChannelSpec, usage: &UsageLog) -> Result<CommCost> {
    comm_cost_with(spec, usage, |i| i * i)
}

/// Communication cost with a caller-supplied power map `φ`.
pub fn comm_cost_with(spec: &ChannelSpec, usage: &UsageLog, phi: impl Fn(f64) -> f64) -> Result<CommCost> {
    let mismatch = || Error::Wiring(format!("usage log {usage:?} does not fit channel {spec:?}"));
    Ok(match (spec, usage) {
        (ChannelSpec::FixedRate { .. }, _) => CommCost::Feasible(0.0),
        (&ChannelSpec::VariableRate { eta_bar, rate, m }, UsageLog::AlphabetSizes(eta)) => {
            if eta.iter().any(|&e| e == 0 || e > eta_bar) {
                CommCost::Infeasible
            } else {
                let bits: f64 = eta.iter().map(|&e| (e as f64).log2()).sum();
                if bits > rate * eta.len() as f64 + 1e-12 {
                    CommCost::Infeasible
                } else {
                    CommCost::Feasible(m * bits)
                }
            }
        }
        (&ChannelSpec::EventTriggered { n0, m }, UsageLog::Samples(s)) => {
            let count = s.iter().filter(|&&b| b).count();
            if count > n0 {
                CommCost::Infeasible
            } else {
                CommCost::Feasible(m * count as f64)
            }
        }
        (&ChannelSpec::AdditiveNoise { iota_bar, power, m, .. }, UsageLog::Inputs(iota)) => {
            if iota.iter().any(|i| i.abs() > iota_bar) {
                CommCost::Infeasible
            } else {
                let total: f64 = iota.iter().map(|&i| phi(i)).sum();
                if total > power * iota.len() as f64 + 1e-12 {
                    CommCost::Infeasible
                } else {
                    CommCost::Feasible(m * total)
                }
            }
        }
        _ => return Err(mismatch()),
    })
}

/// Amplitude-limited maps for the additive-noise channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Compander {
    /// `ι = clamp(gain · e, ±iota_bar)`.
    Linear { gain: f64 },
    /// `ι = -level, 0, +level` as `e` falls below `-threshold`, inside, or above `threshold`.
    ThreeLevel { threshold: f64, level: f64 },
}

impl Compander {
    pub fn apply(&self, e: f64, iota_bar: f64) -> f64 {
        let raw = match *self {
            Compander::Linear { gain } => gain * e,
            Compander::ThreeLevel { threshold, level } => {
                if e > threshold {
                    level
                } else if e < -threshold {
                    -level
                } else {
                    0.0
                }
            }
        };
        raw.clamp(-iota_bar, iota_bar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_example_cells() {
        let q = Quantizer::new(vec![-1.6, 1.6]).unwrap();
        assert_eq!(quantize(&q, 2.0), 3);
        assert_eq!(quantize(&q, 0.0), 2);
        assert_eq!(quantize(&q, 1.6), 2);
        assert_eq!(quantize(&q, -1.6), 1);
        let b = Quantizer::new(vec![0.0]).unwrap();
        assert_eq!(b.apply(-5.0), 1);
        assert_eq!(b.apply(0.0), 1);
        assert!(b.cell(1).contains(0.0));
        assert!(Quantizer::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn tracker_sums() {
        let t = innovation_step(InnovationTracker::new(1.0), -1.0);
        assert_eq!(t.accumulated, -1.0);
        let t = (0..3).fold(InnovationTracker::new(2.0), |t, _| t.step(1.0));
        assert_eq!(t.accumulated, 7.0);
        let z = (0..10).fold(InnovationTracker::new(3.0), |t, _| t.step(0.0));
        assert_eq!(z.accumulated, 0.0);
    }

    #[test]
    fn innovation_encode_matches_state_label() {
        let q = Quantizer::new(vec![0.0]).unwrap();
        let tr = InnovationTracker::new(1.0).step(0.7);
        let x1 = -0.3;
        assert_eq!(innovation_encode(&q, &tr, tr.zeta(x1)), q.apply(x1));
        let zero = InnovationTracker::new(1.0);
        assert_eq!(innovation_encode(&q, &zero, 0.4), q.apply(0.4));
    }

    #[test]
    fn channel_costs() {
        let fixed = ChannelSpec::FixedRate { n: 3 };
        assert_eq!(comm_cost(&fixed, &UsageLog::Samples(vec![true; 3])).unwrap(), CommCost::Feasible(0.0));
        let et = ChannelSpec::EventTriggered { n0: 1, m: 0.0 };
        assert_eq!(comm_cost(&et, &UsageLog::Samples(vec![false, true])).unwrap(), CommCost::Feasible(0.0));
        assert_eq!(comm_cost(&et, &UsageLog::Samples(vec![true, true])).unwrap(), CommCost::Infeasible);
        let vr = ChannelSpec::VariableRate { eta_bar: 4, rate: 2.0, m: 1.0 };
        assert_eq!(comm_cost(&vr, &UsageLog::AlphabetSizes(vec![2, 4])).unwrap(), CommCost::Feasible(3.0));
        assert_eq!(comm_cost(&vr, &UsageLog::AlphabetSizes(vec![8, 1])).unwrap(), CommCost::Infeasible);
        let an = ChannelSpec::AdditiveNoise { sigma_chi: 1.0, iota_bar: 1.0, power: 0.5, m: 2.0 };
        assert_eq!(comm_cost(&an, &UsageLog::Inputs(vec![0.5, -0.5])).unwrap(), CommCost::Feasible(1.0));
        assert_eq!(comm_cost(&an, &UsageLog::Inputs(vec![1.5, 0.0])).unwrap(), CommCost::Infeasible);
        assert_eq!(comm_cost(&an, &UsageLog::Inputs(vec![1.0, 1.0])).unwrap(), CommCost::Infeasible);
        assert!(comm_cost(&vr, &UsageLog::Samples(vec![true])).is_err());
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelSpec::VariableRate { eta_bar: 4, rate: 2.5, m: 1.0 }.validate(3).is_err());
        assert!(ChannelSpec::EventTriggered { n0: 5, m: 0.0 }.validate(3).is_err());
        assert!(ChannelSpec::FixedRate { n: 0 }.validate(3).is_err());
    }

    #[test]
    fn envelope_decisions() {
        let env = SilenceEnvelope { intervals: vec![Interval::new(-1.0, 1.0).unwrap(); 3] };
        assert_eq!(envelope_decide(&env, 1, 2.0, false), Decision::Sample(2.0));
        assert_eq!(envelope_decide(&env, 1, 0.0, false), Decision::Silence);
        assert_eq!(envelope_decide(&env, 3, 0.0, false), Decision::Sample(0.0));
        assert_eq!(envelope_decide(&env, 2, 5.0, true), Decision::Silence);
    }

    #[test]
    fn compander_clips() {
        let c = Compander::Linear { gain: 2.0 };
        assert_eq!(c.apply(1.0, 1.5), 1.5);
        let t = Compander::ThreeLevel { threshold: 0.5, level: 1.0 };
        assert_eq!(t.apply(0.2, 2.0), 0.0);
        assert_eq!(t.apply(-0.9, 2.0), -1.0);
    }
}
