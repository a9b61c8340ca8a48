use netlq::coding::{Quantizer, SilenceEnvelope};
use netlq::design::{
    envelope_cost, gamma1_example4, greedy_stage_encoder, restricted_control_u1, terminal_control_cost, ConstraintSet,
    EnvelopeOptions, LloydOptions, PreSample, TwoStepSetup,
};
use netlq::estimation::Belief;
use netlq::gauss::{Interval, Normal};
use netlq::lqcore::{gain_schedule, CostParams, GainSchedule, PlantParams};
use proptest::prelude::*;

fn example4() -> (PlantParams, CostParams) {
    (
        PlantParams { a: 1.0, sigma_w: 1.0, x0: Normal::standard(), horizon: 1 },
        CostParams { p: 1.0, q: 1.0, m: 0.0 },
    )
}

fn fast_lloyd() -> LloydOptions {
    LloydOptions { restarts: 1, ..LloydOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shifting_u0_and_threshold_together_changes_nothing(u0 in -2.0..2.0f64, c in -2.0..2.0f64, d in -3.0..3.0f64) {
        let (pl, cost) = example4();
        let s = TwoStepSetup { delta0: 0.0, z0: 1 };
        let g0 = gamma1_example4(&pl, &cost, s, u0, &[d]).unwrap().values[0];
        let g1 = gamma1_example4(&pl, &cost, s, u0 + c, &[d + c]).unwrap().values[0];
        prop_assert!((g0 - g1).abs() <= 1e-10);
    }

    #[test]
    fn greedy_distortion_never_grows_with_levels(mu in -2.0..2.0f64, sigma in 0.3..2.0f64) {
        let (pl, cost) = example4();
        let s = gain_schedule(&pl, &cost);
        let belief = Belief::Gaussian(Normal::new(mu, sigma).unwrap());
        let d: Vec<f64> = (1..=5)
            .map(|n| greedy_stage_encoder(&s, 1, &belief, n, &fast_lloyd()).unwrap().distortion)
            .collect();
        for w in d.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", d);
        }
    }

    #[test]
    fn lloyd_ignores_positive_weight_scaling(a in -2.0..2.0f64, scale in 0.1..10.0f64, n in 2usize..5) {
        // q = 0, p = 1 gives lambda_t = a² at every stage.
        let pl = PlantParams { a, sigma_w: 1.0, x0: Normal::standard(), horizon: 3 };
        let s = gain_schedule(&pl, &CostParams { p: 1.0, q: 0.0, m: 0.0 });
        prop_assume!(a.abs() > 1e-3);
        let scaled = GainSchedule { lambda: s.lambda.iter().map(|l| l * scale).collect(), ..s.clone() };
        let belief = Belief::Gaussian(Normal::new(0.3, 1.2).unwrap());
        let designs: Vec<Vec<f64>> = (0..=3)
            .flat_map(|t| [&s, &scaled].map(|sched| greedy_stage_encoder(sched, t, &belief, n, &fast_lloyd()).unwrap()))
            .map(|d| d.quantizer.thresholds().to_vec())
            .collect();
        for th in &designs[1..] {
            for (x, y) in th.iter().zip(&designs[0]) {
                prop_assert!((x - y).abs() <= 1e-8, "{:?}", designs);
            }
        }
    }

    #[test]
    fn restricted_control_is_the_best_feasible_point(xhat in -4.0..4.0f64, values in prop::collection::vec(-3.0..3.0f64, 1..6)) {
        let cost = CostParams { p: 1.0, q: 0.5, m: 0.0 };
        let set = ConstraintSet::Finite { values: values.clone() };
        let u = restricted_control_u1(1.2, &cost, xhat, &set).unwrap();
        prop_assert!(values.contains(&u));
        let best = terminal_control_cost(1.2, 0.5, xhat, u);
        for v in values {
            prop_assert!(best <= terminal_control_cost(1.2, 0.5, xhat, v) + 1e-12);
        }
        let clamped = restricted_control_u1(1.2, &cost, xhat, &ConstraintSet::Interval { lo: -1.0, hi: 0.5 }).unwrap();
        prop_assert!((-1.0..=0.5).contains(&clamped));
    }
}

#[test]
fn envelope_sample_law_is_a_distribution() {
    let pl = PlantParams { a: 1.0, sigma_w: 0.5, x0: Normal::point(2.0), horizon: 4 };
    let c = CostParams { p: 1.0, q: 0.2, m: 0.0 };
    let iv = |lo: f64, hi: f64| Interval::new(lo, hi).unwrap();
    let env = SilenceEnvelope { intervals: vec![iv(0.0, 1.0), iv(-0.3, 0.4), iv(-1.0, 1.0), Interval::REAL_LINE] };
    for pre in [PreSample::PredictorLinear, PreSample::Zoh { kappa: -0.8 }] {
        let d = envelope_cost(&pl, &c, &env, pre, &EnvelopeOptions::default()).unwrap();
        let total: f64 = d.sample_probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        assert!(d.sample_probs.iter().all(|&p| p >= -1e-12));
        assert!(d.expected_cost > 0.0);
    }
}

#[test]
fn one_cell_greedy_design_is_trivial() {
    let (pl, cost) = example4();
    let s = gain_schedule(&pl, &cost);
    let d = greedy_stage_encoder(&s, 0, &Belief::Gaussian(Normal::standard()), 1, &fast_lloyd()).unwrap();
    assert_eq!(d.quantizer, Quantizer::trivial());
    assert!((d.distortion - s.lambda[0]).abs() < 1e-12);
}
