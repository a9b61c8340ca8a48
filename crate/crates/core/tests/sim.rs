use netlq::coding::ChannelSpec;
use netlq::exec::Executor;
use netlq::gauss::Normal;
use netlq::lqcore::{ce_cost, full_information_cost, gain_schedule, prior_error_variances, CostParams, PlantParams};
use netlq::sim::{simulate, sweep, ControllerConfig, EncoderConfig, NoiseLaw, Scenario};
use proptest::prelude::*;

fn scenario(channel: ChannelSpec, encoder: EncoderConfig) -> Scenario {
    Scenario {
        plant: PlantParams { a: 1.1, sigma_w: 0.8, x0: Normal::new(0.5, 1.0).unwrap(), horizon: 2 },
        cost: CostParams { p: 1.0, q: 0.5, m: 0.0 },
        channel,
        encoder,
        controller: ControllerConfig::Ce,
        noise: NoiseLaw::Gaussian,
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let sc = scenario(ChannelSpec::FixedRate { n: 4 }, EncoderConfig::Uniform { levels: vec![4], span: 2.0 });
    let base = simulate(&sc, 30_000, 11, &Executor::new(1)).unwrap();
    for w in [2, 5, 8] {
        assert_eq!(simulate(&sc, 30_000, 11, &Executor::new(w)).unwrap(), base);
    }
    let s1 = sweep(&sc, "plant.a", &[0.5, 1.5], 5_000, 3, &Executor::new(1)).unwrap();
    let s4 = sweep(&sc, "plant.a", &[0.5, 1.5], 5_000, 3, &Executor::new(4)).unwrap();
    assert_eq!(s1, s4);
}

#[test]
fn fine_quantization_approaches_full_information() {
    let mut sc = scenario(ChannelSpec::FixedRate { n: 64 }, EncoderConfig::Uniform { levels: vec![64], span: 6.0 });
    // The history tree grows as 64^(T+1).
    sc.plant.horizon = 1;
    let r = simulate(&sc, 200_000, 5, &Executor::from_env()).unwrap();
    let full = full_information_cost(&sc.plant, &sc.cost, &gain_schedule(&sc.plant, &sc.cost));
    assert!((r.mean_cost - full).abs() <= 0.01 * full, "{} vs {full}", r.mean_cost);
}

#[test]
fn one_cell_ce_matches_the_open_loop_formula() {
    let sc = scenario(ChannelSpec::FixedRate { n: 1 }, EncoderConfig::StateQuantizer { thresholds: vec![vec![]] });
    let r = simulate(&sc, 200_000, 6, &Executor::from_env()).unwrap();
    let s = gain_schedule(&sc.plant, &sc.cost);
    let expected = ce_cost(&sc.plant, &sc.cost, &s, &prior_error_variances(&sc.plant));
    assert!((r.mean_cost - expected).abs() <= 3.0 * r.std_error, "{} ± {} vs {expected}", r.mean_cost, r.std_error);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn summary_statistics_are_well_formed(a in -1.5..1.5f64, levels in 1usize..6, seed in 0u64..1000) {
        let mut sc = scenario(ChannelSpec::FixedRate { n: levels }, EncoderConfig::Uniform { levels: vec![levels], span: 2.5 });
        sc.plant.a = a;
        let r = simulate(&sc, 500, seed, &Executor::new(2)).unwrap();
        prop_assert!(r.mean_cost.is_finite() && r.mean_cost >= 0.0);
        prop_assert!(r.std_error >= 0.0);
        prop_assert!((0.0..=1.0).contains(&r.infeasible_fraction));
        prop_assert_eq!(r.n_paths, 500);
        prop_assert_eq!(r.seed, seed);
    }
}
