use netlq::coding::{
    comm_cost, innovation_encode, quantize, ChannelSpec, CommCost, InnovationTracker, Quantizer, UsageLog,
};
use netlq::gauss::Interval;
use proptest::prelude::*;

fn quantizer() -> impl Strategy<Value = Quantizer> {
    prop::collection::vec(-5.0..5.0f64, 0..7).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        Quantizer::new(v).unwrap()
    })
}

/// Larger is worse: `None` stands for infeasible.
fn rank(c: CommCost) -> f64 {
    c.value().unwrap_or(f64::INFINITY)
}

proptest! {
    #[test]
    fn quantize_is_a_monotone_step_function(q in quantizer(), x in -8.0..8.0f64, dx in 0.0..4.0f64) {
        let z = quantize(&q, x);
        prop_assert!(z >= 1 && z <= q.levels());
        prop_assert!(q.cell(z).contains(x));
        prop_assert!(quantize(&q, x + dx) >= z);
    }

    #[test]
    fn innovation_labels_match_state_labels(
        a in -1.5..1.5f64,
        qs in prop::collection::vec(quantizer(), 6),
        x0 in -3.0..3.0f64,
        noise in prop::collection::vec(-2.0..2.0f64, 6),
        gains in prop::collection::vec(-2.0..2.0f64, 6),
    ) {
        let (mut x, mut zeta) = (x0, x0);
        let mut tr = InnovationTracker::new(a);
        for t in 0..6 {
            let z = quantize(&qs[t], x);
            prop_assert_eq!(innovation_encode(&qs[t], &tr, zeta), z);
            // Any law of the past labels and states will do.
            let u = gains[t] * (z as f64) + (x * gains[t]).cos();
            x = a * x + u + noise[t];
            zeta = a * zeta + noise[t];
            tr = tr.step(u);
        }
    }

    #[test]
    fn variable_rate_cost_is_monotone(eta in prop::collection::vec(1u64..9, 1..6), i in 0usize..6, bump in 1u64..4, rate in 0.5..3.0f64) {
        let spec = ChannelSpec::VariableRate { eta_bar: 8, rate, m: 0.3 };
        let i = i % eta.len();
        let mut bigger = eta.clone();
        bigger[i] += bump;
        let before = comm_cost(&spec, &UsageLog::AlphabetSizes(eta)).unwrap();
        let after = comm_cost(&spec, &UsageLog::AlphabetSizes(bigger)).unwrap();
        prop_assert!(rank(after) >= rank(before));
    }

    #[test]
    fn event_cost_is_monotone(samples in prop::collection::vec(any::<bool>(), 1..6), i in 0usize..6, n0 in 0usize..4) {
        let spec = ChannelSpec::EventTriggered { n0, m: 0.7 };
        let mut more = samples.clone();
        let i = i % samples.len();
        more[i] = true;
        let before = comm_cost(&spec, &UsageLog::Samples(samples)).unwrap();
        let after = comm_cost(&spec, &UsageLog::Samples(more)).unwrap();
        prop_assert!(rank(after) >= rank(before));
    }

    #[test]
    fn additive_cost_is_monotone(inputs in prop::collection::vec(-2.0..2.0f64, 1..6), i in 0usize..6, grow in 0.0..1.5f64) {
        let spec = ChannelSpec::AdditiveNoise { sigma_chi: 1.0, iota_bar: 2.5, power: 1.5, m: 0.2 };
        let i = i % inputs.len();
        let mut louder = inputs.clone();
        louder[i] = louder[i].signum() * (louder[i].abs() + grow);
        let before = comm_cost(&spec, &UsageLog::Inputs(inputs)).unwrap();
        let after = comm_cost(&spec, &UsageLog::Inputs(louder)).unwrap();
        prop_assert!(rank(after) >= rank(before));
    }

    #[test]
    fn quantizer_round_trips_through_json(q in quantizer()) {
        let text = serde_json::to_string(&q).unwrap();
        prop_assert_eq!(serde_json::from_str::<Quantizer>(&text).unwrap(), q);
    }
}

#[test]
fn unsorted_thresholds_are_rejected() {
    assert!(Quantizer::new(vec![1.0, 0.0]).is_err());
    assert!(serde_json::from_str::<Quantizer>("[1.0, 0.0]").is_err());
}

#[test]
fn intervals_carry_infinities_as_strings() {
    let iv = Interval::REAL_LINE;
    let text = serde_json::to_string(&iv).unwrap();
    assert_eq!(text, r#"{"lo":"-inf","hi":"inf"}"#);
    assert_eq!(serde_json::from_str::<Interval>(&text).unwrap(), iv);
    assert!(serde_json::from_str::<Interval>(r#"{"lo":0,"hi":1,"mid":0.5}"#).is_err());
}
