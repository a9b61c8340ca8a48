//! Quick invariant suite behind `netlq selftest`.

use rand::Rng;

use netlq::coding::{innovation_encode, quantize, ChannelSpec, InnovationTracker, Quantizer, SilenceEnvelope};
use netlq::design::{
    envelope_cost, gamma1_example4, grid_by_step, min_gamma, verify_ce_optimality, CeEncoder, ConstraintSet,
    EnvelopeOptions, PreSample, SearchWindow, TwoStepSetup,
};
use netlq::estimation::two_step_posterior;
use netlq::exec::Executor;
use netlq::gauss::quadrature::integrate;
use netlq::gauss::{owen_xgG, std_cdf, std_pdf, trunc_moments, Interval, Normal};
use netlq::lqcore::{ce_cost, gain_schedule, CostParams, PlantParams};
use netlq::rng::{self, domain};
use netlq::sim::{simulate, ControllerConfig, EncoderConfig, NoiseLaw, Scenario};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

type Step = fn() -> netlq::Result<Check>;

pub const CHECKS: [(&str, Step); 9] = [
    ("gain_special_case", gain_special_case),
    ("truncated_partition", truncated_partition),
    ("owen_vs_quadrature", owen_vs_quadrature),
    ("posterior_partition", posterior_partition),
    ("translation_symmetry", translation_symmetry),
    ("ce_optimality", ce_optimality),
    ("innovation_equivalence", innovation_equivalence),
    ("envelope_silent_cost", envelope_silent_cost),
    ("simulator", simulator),
];

/// Runs every check; a check that errors counts as failed.
pub fn run() -> Vec<Check> {
    CHECKS
        .iter()
        .map(|(name, f)| f().unwrap_or_else(|e| check(name, false, format!("error: {e}"))))
        .collect()
}

fn example4() -> (PlantParams, CostParams) {
    (
        PlantParams { a: 1.0, sigma_w: 1.0, x0: Normal::standard(), horizon: 1 },
        CostParams { p: 1.0, q: 1.0, m: 0.0 },
    )
}

fn gain_special_case() -> netlq::Result<Check> {
    let mut worst: f64 = 0.0;
    for a in [0.3, 1.0, -2.5] {
        let pl = PlantParams { a, sigma_w: 1.0, x0: Normal::point(0.0), horizon: 8 };
        let s = gain_schedule(&pl, &CostParams { p: 1.0, q: 0.0, m: 0.0 });
        for i in 0..=8 {
            worst = worst.max((s.beta[i] - 1.0).abs()).max((s.lambda[i] - a * a).abs());
        }
    }
    Ok(check("gain_special_case", worst <= 1e-12, format!("q=0 deviation {worst:.1e}")))
}

fn truncated_partition() -> netlq::Result<Check> {
    let mut g = rng::stream(1, domain::ORACLE, 100);
    let (mut prob_err, mut mean_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let n = Normal::new(g.gen_range(-3.0..3.0), g.gen_range(0.1..3.0))?;
        let mut th: Vec<f64> = (0..g.gen_range(1..6)).map(|_| g.gen_range(-5.0..5.0)).collect();
        th.sort_by(f64::total_cmp);
        th.dedup();
        let (mut p, mut m1) = (0.0, 0.0);
        for c in Quantizer::new(th)?.cells() {
            let m = trunc_moments(n, c);
            p += m.prob;
            m1 += m.first_partial();
        }
        prob_err = prob_err.max((p - 1.0).abs());
        mean_err = mean_err.max((m1 - n.mu).abs());
    }
    Ok(check(
        "truncated_partition",
        prob_err <= 1e-12 && mean_err <= 1e-8,
        format!("probability {prob_err:.1e}, mean {mean_err:.1e}"),
    ))
}

fn owen_vs_quadrature() -> netlq::Result<Check> {
    let mut g = rng::stream(2, domain::ORACLE, 100);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a, b): (f64, f64) = (g.gen_range(-4.0..4.0), g.gen_range(-4.0..4.0));
        let (x, y): (f64, f64) = (g.gen_range(-5.0..5.0), g.gen_range(-5.0..5.0));
        let cell = Interval::new(x.min(y), x.max(y))?;
        let q = integrate(|t| t * std_pdf(t) * std_cdf(a - b * t), cell.lo, cell.hi, 1e-14);
        worst = worst.max((owen_xgG(a, b, cell) - q).abs());
    }
    Ok(check("owen_vs_quadrature", worst <= 1e-10, format!("worst error {worst:.1e}")))
}

fn posterior_partition() -> netlq::Result<Check> {
    let (pl, _) = example4();
    let post = two_step_posterior(&pl, 0.4, &Quantizer::new(vec![-0.5, 0.5])?, &Quantizer::new(vec![0.0, 1.0])?)?;
    let total: f64 = post.cells.iter().flatten().map(|c| c.prob).sum();
    let err = (total - 1.0).abs();
    Ok(check("posterior_partition", err <= 1e-12, format!("cell probabilities sum to 1 - {err:.1e}")))
}

fn translation_symmetry() -> netlq::Result<Check> {
    let (pl, c) = example4();
    let setup = TwoStepSetup { delta0: 0.0, z0: 1 };
    let mut mins = Vec::new();
    for u0 in [-1.0, 0.0, 1.0] {
        let f = |d: f64| gamma1_example4(&pl, &c, setup, u0, &[d]).map(|g| g.values[0]).unwrap_or(f64::NAN);
        mins.push(min_gamma(&f, SearchWindow { lo: -6.0, hi: 6.0, step: 0.05 }, &ConstraintSet::Unconstrained)?.min_value);
    }
    let spread = mins.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - mins.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(check("translation_symmetry", spread <= 1e-6, format!("minima spread {spread:.1e}")))
}

fn ce_optimality() -> netlq::Result<Check> {
    let (pl, c) = example4();
    let enc = CeEncoder {
        qz0: Quantizer::new(vec![0.0])?,
        z0: 1,
        qz1: Quantizer::new(vec![-0.9, 0.9])?,
        controls_forgetting: true,
    };
    let r = verify_ce_optimality(&pl, &c, &enc, &grid_by_step(-3.0, 2.0, 1e-2))?;
    Ok(check("ce_optimality", r.gap <= r.grid_step + 1e-12, format!("argmin {:.2} vs CE {:.4}", r.argmin, r.ce_value)))
}

fn innovation_equivalence() -> netlq::Result<Check> {
    let mut g = rng::stream(3, domain::ORACLE, 100);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let a: f64 = g.gen_range(-1.5..1.5);
        let q = Quantizer::new(vec![-1.0, 0.2, 1.5])?;
        let mut x: f64 = g.gen_range(-3.0..3.0);
        let mut zeta = x;
        let mut tr = InnovationTracker::new(a);
        for t in 0..5 {
            let z = quantize(&q, x);
            if z != innovation_encode(&q, &tr, zeta) {
                mismatches += 1;
            }
            let u = (z as f64) * g.gen_range(-1.0..1.0) + (t as f64).sin();
            let w: f64 = g.gen_range(-1.0..1.0);
            x = a * x + u + w;
            zeta = a * zeta + w;
            tr = tr.step(u);
        }
    }
    Ok(check("innovation_equivalence", mismatches == 0, format!("{mismatches} mismatches")))
}

fn envelope_silent_cost() -> netlq::Result<Check> {
    let pl = PlantParams { a: 1.0, sigma_w: 0.5, x0: Normal::point(2.0), horizon: 3 };
    let c = CostParams { p: 1.0, q: 0.2, m: 0.0 };
    let env = SilenceEnvelope { intervals: vec![Interval::REAL_LINE; 3] };
    let d = envelope_cost(&pl, &c, &env, PreSample::PredictorLinear, &EnvelopeOptions::default())?;
    let expected = ce_cost(&pl, &c, &gain_schedule(&pl, &c), &[0.0, 0.25, 0.5, 0.0]);
    let err = (d.expected_cost - expected).abs();
    Ok(check("envelope_silent_cost", err <= 1e-6, format!("evaluator vs closed form {err:.1e}")))
}

fn simulator() -> netlq::Result<Check> {
    let det = Scenario {
        plant: PlantParams { a: 1.0, sigma_w: 0.0, x0: Normal::point(1.0), horizon: 2 },
        cost: CostParams { p: 1.0, q: 1.0, m: 0.0 },
        channel: ChannelSpec::FixedRate { n: 1 },
        encoder: EncoderConfig::StateQuantizer { thresholds: vec![vec![]] },
        controller: ControllerConfig::Zero,
        noise: NoiseLaw::Gaussian,
    };
    let r = simulate(&det, 100, 1, &Executor::new(1))?;
    let noisy = Scenario {
        plant: PlantParams { a: 1.0, sigma_w: 0.7, x0: Normal::point(2.0), horizon: 1 },
        cost: CostParams { p: 0.01, q: 0.01, m: 0.0 },
        channel: ChannelSpec::FixedRate { n: 3 },
        encoder: EncoderConfig::StateQuantizer { thresholds: vec![vec![], vec![-1.6, 1.6]] },
        controller: ControllerConfig::FixedInitial { u0: -1.0 },
        noise: NoiseLaw::Gaussian,
    };
    let one = simulate(&noisy, 20_000, 9, &Executor::new(1))?;
    let many = simulate(&noisy, 20_000, 9, &Executor::new(3))?;
    let pass = r.mean_cost == 3.0 && r.std_error == 0.0 && one == many;
    Ok(check(
        "simulator",
        pass,
        format!("deterministic cost {}, worker-count invariant: {}", r.mean_cost, one == many),
    ))
}
