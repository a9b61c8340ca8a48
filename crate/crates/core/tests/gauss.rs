use netlq::coding::Quantizer;
use netlq::gauss::{
    bivariate_rect_prob, owen_xgG, owen_xgg, std_cdf, std_pdf, trunc_moments, two_step_cell_integrals, Interval, Normal,
};
use proptest::prelude::*;

fn thresholds(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0..6.0f64, 0..max).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    })
}

proptest! {
    #[test]
    fn truncated_moments_partition_the_line(mu in -3.0..3.0f64, sigma in 0.05..4.0f64, th in thresholds(8)) {
        let n = Normal::new(mu, sigma).unwrap();
        let (mut p, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for c in Quantizer::new(th).unwrap().cells() {
            let m = trunc_moments(n, c);
            p += m.prob;
            m1 += m.first_partial();
            m2 += m.second_partial();
        }
        prop_assert!((p - 1.0).abs() <= 1e-12);
        prop_assert!((m1 - mu).abs() <= 1e-8);
        prop_assert!((m2 - n.second_moment()).abs() <= 1e-8);
    }

    #[test]
    fn conditional_mean_stays_in_its_cell(mu in -3.0..3.0f64, sigma in 0.05..4.0f64, x in -8.0..8.0f64, y in -8.0..8.0f64) {
        prop_assume!((x - y).abs() > 1e-6);
        let m = trunc_moments(Normal::new(mu, sigma).unwrap(), Interval::new(x.min(y), x.max(y)).unwrap());
        if !m.is_empty() {
            prop_assert!(m.mean >= x.min(y) - 1e-9 && m.mean <= x.max(y) + 1e-9);
            prop_assert!(m.variance() >= -1e-12);
        }
    }

    #[test]
    fn joint_cells_sum_to_unconditional_moments(
        mu in -2.0..2.0f64,
        s0 in 0.1..2.0f64,
        a in -1.8..1.8f64,
        u0 in -2.0..2.0f64,
        sw in 0.1..2.0f64,
        th0 in thresholds(4),
        th1 in thresholds(4),
    ) {
        let law = Normal::new(mu, s0).unwrap();
        let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for c0 in Quantizer::new(th0).unwrap().cells() {
            for c1 in Quantizer::new(th1.clone()).unwrap().cells() {
                let j = two_step_cell_integrals(law, a, u0, sw, c0, c1);
                p += j.p;
                d1 += j.d1;
                d2 += j.d2;
            }
        }
        let m = a * mu + u0;
        let v = a * a * s0 * s0 + sw * sw;
        prop_assert!((p - 1.0).abs() <= 1e-8);
        prop_assert!((d1 - m).abs() <= 1e-8);
        prop_assert!((d2 - (m * m + v)).abs() <= 1e-8);
    }

    #[test]
    fn owen_forms_differentiate_to_their_integrands(a in -4.0..4.0f64, b in -4.0..4.0f64, lo in -5.0..0.0f64, hi in 0.5..5.0f64) {
        let h = 1e-5;
        let f = |t: f64| owen_xgG(a, b, Interval::new(lo, t).unwrap());
        let g = |t: f64| owen_xgg(a, b, Interval::new(lo, t).unwrap());
        let fd_f = (f(hi + h) - f(hi - h)) / (2.0 * h);
        let fd_g = (g(hi + h) - g(hi - h)) / (2.0 * h);
        prop_assert!((fd_f - hi * std_pdf(hi) * std_cdf(a - b * hi)).abs() <= 1e-6);
        prop_assert!((fd_g - hi * std_pdf(hi) * std_pdf(a - b * hi)).abs() <= 1e-6);
    }

    #[test]
    fn rectangle_probability_is_additive(x0 in -4.0..0.0f64, x1 in 0.0..4.0f64, split in 0.01..0.99f64, y0 in -4.0..0.0f64, y1 in 0.0..4.0f64, rho in -0.99..0.99f64) {
        let mid = x0 + split * (x1 - x0);
        let whole = bivariate_rect_prob((x0, x1), (y0, y1), rho);
        let parts = bivariate_rect_prob((x0, mid), (y0, y1), rho) + bivariate_rect_prob((mid, x1), (y0, y1), rho);
        prop_assert!((0.0..=1.0).contains(&whole));
        prop_assert!((whole - parts).abs() <= 1e-12);
    }
}

#[test]
fn rectangle_over_the_plane_is_one() {
    let inf = f64::INFINITY;
    for rho in [-0.9, 0.0, 0.5, 0.99] {
        assert!((bivariate_rect_prob((-inf, inf), (-inf, inf), rho) - 1.0).abs() < 1e-15);
    }
}
