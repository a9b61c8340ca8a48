//! Joint moments of `x1 = a x0 + u0 + w0` over a pair of cells.
//!
//! The general case reduces the double integral to one dimension in the
//! standardized `s = (x1 - a mu0 - u0) / sigma_tilde`:
//!
//! ```text
//! f(s)  = G(A_hi - B s) - G(A_lo - B s)
//! P     = ∫ g f
//! ∫ s g f              via owen_xgG
//! ∫ s² g f = P - [s g(s) f(s)] - B ∫ s g(s) (g(A_hi - B s) - g(A_lo - B s))
//! ```
//!
//! with `B = a sigma0 / sigma_w` and `A = (theta - mu0) / sigma_bar`.

use super::{owen_xgG, owen_xgg, std_cdf, std_mass, trunc_moments, x_pdf, Interval, Normal, TruncatedMoments};

/// Unnormalized joint cell integrals `P`, `D1 = E[x1 1{cell}]`, `D2 = E[x1² 1{cell}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCell {
    pub p: f64,
    pub d1: f64,
    pub d2: f64,
}

impl JointCell {
    pub const ZERO: JointCell = JointCell { p: 0.0, d1: 0.0, d2: 0.0 };

    pub fn moments(&self) -> TruncatedMoments {
        TruncatedMoments::from_partials(self.p, self.d1, self.d2)
    }
}

/// Lower orthant `P[X <= x, Y <= y]` for standard normals with correlation `rho`.
fn lower_orthant(x: f64, y: f64, rho: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return std_cdf(y);
    }
    if y == f64::INFINITY {
        return std_cdf(x);
    }
    owens_t::biv_norm(-x, -y, rho)
}

fn centered_right(i: (f64, f64)) -> bool {
    if i.0 == f64::NEG_INFINITY {
        false
    } else if i.1 == f64::INFINITY {
        true
    } else {
        i.0 + i.1 > 0.0
    }
}

/// `P[X in x, Y in y]` for standard normals with correlation `rho`.
///
/// Each axis is reflected so the rectangle sits on the side of the origin
/// where the orthant probabilities are small, which keeps inclusion-exclusion
/// free of cancellation in the tails.
pub fn bivariate_rect_prob(x: (f64, f64), y: (f64, f64), rho: f64) -> f64 {
    if x.0 >= x.1 || y.0 >= y.1 {
        return 0.0;
    }
    let mut x = x;
    let mut y = y;
    let mut rho = rho.clamp(-1.0, 1.0);
    if centered_right(x) {
        x = (-x.1, -x.0);
        rho = -rho;
    }
    if centered_right(y) {
        y = (-y.1, -y.0);
        rho = -rho;
    }
    let v = lower_orthant(x.1, y.1, rho) - lower_orthant(x.0, y.1, rho) - lower_orthant(x.1, y.0, rho)
        + lower_orthant(x.0, y.0, rho);
    v.max(0.0)
}

/// `P[x0 in cell0, x1 in cell1]` and the first two moments of `x1` over that
/// event, for `x0 ~ x0_law` and `x1 = a x0 + u0 + w0`, `w0 ~ N(0, sigma_w)`.
pub fn two_step_cell_integrals(
    x0_law: Normal,
    a: f64,
    u0: f64,
    sigma_w: f64,
    cell0: Interval,
    cell1: Interval,
) -> JointCell {
    if cell0.is_degenerate() || cell1.is_degenerate() {
        return JointCell::ZERO;
    }
    let (mu0, s0) = (x0_law.mu, x0_law.sigma);
    if s0 == 0.0 {
        if !cell0.contains(mu0) {
            return JointCell::ZERO;
        }
        let tm = trunc_moments(Normal { mu: a * mu0 + u0, sigma: sigma_w }, cell1);
        return JointCell { p: tm.prob, d1: tm.first_partial(), d2: tm.second_partial() };
    }
    if sigma_w == 0.0 {
        return deterministic_map(x0_law, a, u0, cell0, cell1);
    }
    // Upper-tail cells lose precision to cancellation; mirror them.
    if centered_right((cell0.lo - mu0, cell0.hi - mu0)) {
        let mirror = Normal { mu: -mu0, sigma: s0 };
        let j = two_step_cell_integrals(mirror, a, -u0, sigma_w, cell0.affine(-1.0, 0.0), cell1.affine(-1.0, 0.0));
        return JointCell { p: j.p, d1: -j.d1, d2: j.d2 };
    }

    let m1 = a * mu0 + u0;
    let st = (a * a * s0 * s0 + sigma_w * sigma_w).sqrt();
    let sbar = s0 * sigma_w / st;
    let b = a * s0 / sigma_w;
    let a_hi = (cell0.hi - mu0) / sbar;
    let a_lo = (cell0.lo - mu0) / sbar;
    let lo = (cell1.lo - m1) / st;
    let hi = (cell1.hi - m1) / st;
    let s_cell = Interval { lo, hi };

    let p = bivariate_rect_prob(((cell0.lo - mu0) / s0, (cell0.hi - mu0) / s0), (lo, hi), a * s0 / st);
    let j1 = owen_xgG(a_hi, b, s_cell) - owen_xgG(a_lo, b, s_cell);
    let k = owen_xgg(a_hi, b, s_cell) - owen_xgg(a_lo, b, s_cell);
    let f = |s: f64| std_mass(a_lo - b * s, a_hi - b * s);
    let edge = |s: f64| if s.is_infinite() { 0.0 } else { x_pdf(s) * f(s) };
    let h = edge(hi) - edge(lo);
    let j2 = p - h - b * k;

    JointCell {
        p,
        d1: m1 * p + st * j1,
        d2: st * st * j2 + 2.0 * st * m1 * j1 + m1 * m1 * p,
    }
}

fn deterministic_map(x0_law: Normal, a: f64, u0: f64, cell0: Interval, cell1: Interval) -> JointCell {
    if a == 0.0 {
        if !cell1.contains(u0) {
            return JointCell::ZERO;
        }
        let p = x0_law.mass(cell0);
        return JointCell { p, d1: p * u0, d2: p * u0 * u0 };
    }
    let pre = cell1.affine(1.0 / a, -u0 / a).intersect(cell0);
    let tm = trunc_moments(x0_law, pre);
    if tm.is_empty() {
        return JointCell::ZERO;
    }
    let (m, s) = (tm.mean, tm.second_moment);
    JointCell {
        p: tm.prob,
        d1: tm.prob * (a * m + u0),
        d2: tm.prob * (a * a * s + 2.0 * a * u0 * m + u0 * u0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::quadrature::integrate2;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn unconditional_moments() {
        let x0 = Normal::new(0.4, 1.3).unwrap();
        let c = two_step_cell_integrals(x0, 0.8, -0.3, 0.6, Interval::REAL_LINE, Interval::REAL_LINE);
        let mean = 0.8 * 0.4 - 0.3;
        assert!((c.p - 1.0).abs() < 1e-14);
        assert!((c.d1 - mean).abs() < 1e-13);
        assert!((c.d2 - (mean * mean + 0.64 * 1.69 + 0.36)).abs() < 1e-13);
    }

    #[test]
    fn orthant_probability_closed_form() {
        // P[X < 0, X + W < 0] = 1/4 + asin(1/sqrt 2)/(2 pi) = 3/8.
        let neg = iv(f64::NEG_INFINITY, 0.0);
        let c = two_step_cell_integrals(Normal::standard(), 1.0, 0.0, 1.0, neg, neg);
        assert!((c.p - 0.375).abs() < 1e-15);
    }

    #[test]
    fn point_mass_reduces_to_truncation() {
        let c = two_step_cell_integrals(Normal::point(2.0), 1.0, -1.0, 0.7, iv(1.6, f64::INFINITY), iv(-1.6, 1.6));
        let t = trunc_moments(Normal::new(1.0, 0.7).unwrap(), iv(-1.6, 1.6));
        assert_eq!(c.p, t.prob);
        let off = two_step_cell_integrals(Normal::point(2.0), 1.0, -1.0, 0.7, iv(-1.6, 1.6), iv(-1.6, 1.6));
        assert_eq!(off, JointCell::ZERO);
    }

    #[test]
    fn noiseless_map() {
        let x0 = Normal::standard();
        let c = two_step_cell_integrals(x0, 2.0, 1.0, 0.0, iv(0.0, f64::INFINITY), iv(f64::NEG_INFINITY, 3.0));
        // x0 in (0, 1], x1 = 2 x0 + 1.
        let t = trunc_moments(x0, iv(0.0, 1.0));
        assert!((c.p - t.prob).abs() < 1e-15);
        assert!((c.d1 / c.p - (2.0 * t.mean + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn rectangle_against_quadrature() {
        let x0 = Normal::new(0.5, 1.0).unwrap();
        let (a, u0, sw) = (1.2, -0.4, 0.8);
        for &(c0, c1) in &[
            ((-1.0, 0.3), (-0.5, 1.5)),
            ((0.2, 2.5), (1.0, 4.0)),
            ((-3.0, -1.0), (-6.0, -0.2)),
        ] {
            let got = two_step_cell_integrals(x0, a, u0, sw, iv(c0.0, c0.1), iv(c1.0, c1.1));
            let dens = |x: f64, y: f64| x0.pdf(x) * Normal { mu: a * x + u0, sigma: sw }.pdf(y);
            let p = integrate2(dens, c0, c1, 1e-13);
            let d1 = integrate2(|x, y| y * dens(x, y), c0, c1, 1e-13);
            let d2 = integrate2(|x, y| y * y * dens(x, y), c0, c1, 1e-13);
            assert!((got.p - p).abs() < 1e-8 * p.max(1e-3), "{got:?} vs {p}");
            assert!((got.d1 - d1).abs() < 1e-8 * d1.abs().max(1e-3));
            assert!((got.d2 - d2).abs() < 1e-8 * d2.max(1e-3));
        }
    }

    #[test]
    fn bivariate_tail_rectangle() {
        // Independent axes factor exactly.
        let v = bivariate_rect_prob((3.0, 4.0), (5.0, f64::INFINITY), 0.0);
        let e = std_mass(3.0, 4.0) * std_mass(5.0, f64::INFINITY);
        assert!((v - e).abs() < 1e-12 * e);
    }
}
