//! Scalar Gaussian analytics.
//!
//! Densities and distribution functions, truncated moments over extended-real
//! cells, the two Owen-table antiderivatives and the joint two-step cell
//! integrals used by the posterior computations in [`crate::estimation`].

mod joint;
mod owen;
pub mod quadrature;

pub use joint::{bivariate_rect_prob, two_step_cell_integrals, JointCell};
pub use owen::{owen_xgG, owen_xgg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Below this probability a cell is treated as empty.
pub const EMPTY_CELL_PROB: f64 = 1e-300;

/// Standard normal density.
#[inline]
pub fn std_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function.
#[inline]
pub fn std_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail, `1 - G(x)`, without cancellation.
#[inline]
pub fn std_sf(x: f64) -> f64 {
    std_cdf(-x)
}

/// Density and distribution function at `x` in one call.
pub fn std_pdf_cdf(x: f64) -> (f64, f64) {
    (std_pdf(x), std_cdf(x))
}

/// `G(hi) - G(lo)` evaluated on whichever side avoids cancellation.
pub fn std_mass(lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    if lo > 0.0 {
        (std_sf(lo) - std_sf(hi)).max(0.0)
    } else {
        (std_cdf(hi) - std_cdf(lo)).max(0.0)
    }
}

/// `x g(x)`, with the limit 0 at infinity.
#[inline]
pub(crate) fn x_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x * std_pdf(x)
    }
}

/// Univariate normal law. `sigma == 0` is a point mass at `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normal {
    pub mu: f64,
    pub sigma: f64,
}

impl Normal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let n = Normal { mu, sigma };
        n.validate()?;
        Ok(n)
    }

    pub fn standard() -> Self {
        Normal { mu: 0.0, sigma: 1.0 }
    }

    pub fn point(mu: f64) -> Self {
        Normal { mu, sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::invalid("normal.mu", "must be finite"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("normal.sigma", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn is_point(&self) -> bool {
        self.sigma == 0.0
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn second_moment(&self) -> f64 {
        self.mu * self.mu + self.variance()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        std_pdf((x - self.mu) / self.sigma) / self.sigma
    }

    /// Probability of the cell `(lo, hi]`.
    pub fn mass(&self, cell: Interval) -> f64 {
        if self.is_point() {
            return if cell.contains(self.mu) { 1.0 } else { 0.0 };
        }
        let (lo, hi) = self.standardize(cell);
        std_mass(lo, hi)
    }

    fn standardize(&self, cell: Interval) -> (f64, f64) {
        ((cell.lo - self.mu) / self.sigma, (cell.hi - self.mu) / self.sigma)
    }
}

/// Extended-real interval. Cells are right-closed, `(lo, hi]`, except that
/// an infinite upper end is open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    #[serde(with = "ext_real")]
    pub lo: f64,
    #[serde(with = "ext_real")]
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid("interval", format!("invalid bounds ({lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: Interval) -> Interval {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        Interval { lo, hi: hi.max(lo) }
    }

    pub fn shift(&self, c: f64) -> Interval {
        Interval { lo: self.lo + c, hi: self.hi + c }
    }

    /// Image under `x -> s x + c`; flips the ends when `s < 0`.
    pub fn affine(&self, s: f64, c: f64) -> Interval {
        let (a, b) = (s * self.lo + c, s * self.hi + c);
        if s >= 0.0 {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }
}

/// JSON has no infinities, so they travel as the strings `"-inf"` / `"inf"`.
mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("expected number or \"inf\"/\"-inf\", got {other:?}"))),
            },
        }
    }
}

/// Probability of a cell and the conditional first and second moments.
///
/// For an empty cell (`prob < 1e-300`) the conditional moments are undefined
/// and stored as NaN; use [`TruncatedMoments::is_empty`] or the partial
/// moment accessors, which return 0 in that case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedMoments {
    pub prob: f64,
    pub mean: f64,
    pub second_moment: f64,
}

impl TruncatedMoments {
    pub fn empty() -> Self {
        TruncatedMoments { prob: 0.0, mean: f64::NAN, second_moment: f64::NAN }
    }

    pub fn is_empty(&self) -> bool {
        !(self.prob >= EMPTY_CELL_PROB)
    }

    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }

    /// `E[X 1{X in cell}]`.
    pub fn first_partial(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.prob * self.mean
        }
    }

    /// `E[X^2 1{X in cell}]`.
    pub fn second_partial(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.prob * self.second_moment
        }
    }

    /// Builds from unnormalized partial moments.
    pub fn from_partials(prob: f64, d1: f64, d2: f64) -> Self {
        if !(prob >= EMPTY_CELL_PROB) {
            return Self::empty();
        }
        let mean = d1 / prob;
        let second = (d2 / prob).max(mean * mean);
        TruncatedMoments { prob, mean, second_moment: second }
    }
}

/// `P[X in cell]`, `E[X | X in cell]`, `E[X^2 | X in cell]` for `X ~ n`.
pub fn trunc_moments(n: Normal, cell: Interval) -> TruncatedMoments {
    if cell.is_degenerate() {
        return TruncatedMoments::empty();
    }
    if n.is_point() {
        return if cell.contains(n.mu) {
            TruncatedMoments { prob: 1.0, mean: n.mu, second_moment: n.mu * n.mu }
        } else {
            TruncatedMoments::empty()
        };
    }
    let (lo, hi) = n.standardize(cell);
    let prob = std_mass(lo, hi);
    if !(prob >= EMPTY_CELL_PROB) {
        return TruncatedMoments::empty();
    }
    let (g_lo, g_hi) = (std_pdf(lo), std_pdf(hi));
    let mut z1 = (g_lo - g_hi) / prob;
    // Keep the conditional mean inside the cell under rounding.
    z1 = z1.clamp(lo, hi);
    let z2 = (1.0 + (x_pdf(lo) - x_pdf(hi)) / prob).max(z1 * z1);
    let mean = n.mu + n.sigma * z1;
    let second = n.mu * n.mu + 2.0 * n.mu * n.sigma * z1 + n.variance() * z2;
    TruncatedMoments { prob, mean, second_moment: second.max(mean * mean) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_cdf_at_zero_and_tail() {
        let (g, big_g) = std_pdf_cdf(0.0);
        assert!((g - 0.398_942_280_4).abs() < 1e-10);
        assert_eq!(big_g, 0.5);
        let (g, big_g) = std_pdf_cdf(40.0);
        assert!(g < 1e-300);
        assert!((big_g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cdf_at_one_point_six() {
        // erf(1.6/sqrt 2) from a 50-digit evaluation.
        let expected = 0.945_200_708_300_442_016;
        assert!((std_cdf(1.6) - expected).abs() < 1e-15);
    }

    #[test]
    fn half_normal() {
        let m = trunc_moments(Normal::standard(), Interval::new(0.0, f64::INFINITY).unwrap());
        assert!((m.prob - 0.5).abs() < 1e-15);
        assert!((m.mean - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!((m.second_moment - 1.0).abs() < 1e-14);
    }

    #[test]
    fn point_mass_cells() {
        let m = trunc_moments(Normal::point(2.0), Interval::new(1.6, f64::INFINITY).unwrap());
        assert_eq!((m.prob, m.mean, m.second_moment), (1.0, 2.0, 4.0));
        let e = trunc_moments(Normal::point(2.0), Interval::new(-1.6, 1.6).unwrap());
        assert!(e.is_empty());
        assert_eq!(e.first_partial(), 0.0);
    }

    #[test]
    fn central_cell_at_one_point_six() {
        let m = trunc_moments(Normal::standard(), Interval::new(-1.6, 1.6).unwrap());
        assert!((m.prob - 0.890_401_416_600_884_032).abs() < 1e-14);
        assert!(m.mean.abs() < 1e-15);
        // Independent quadrature of x^2 g(x) over the cell, divided by prob.
        let m2 = quadrature::integrate(|x| x * x * std_pdf(x), -1.6, 1.6, 1e-14) / m.prob;
        assert!((m.second_moment - m2).abs() < 1e-12);
        assert!((m.second_moment - 0.601_363_312_819_885_1).abs() < 1e-13);
    }

    #[test]
    fn deep_tail_mean_stays_in_cell() {
        let m = trunc_moments(Normal::standard(), Interval::new(30.0, f64::INFINITY).unwrap());
        assert!(m.mean > 30.0 && m.mean < 30.1);
        let far = trunc_moments(Normal::standard(), Interval::new(50.0, 60.0).unwrap());
        assert!(far.is_empty());
    }

    #[test]
    fn interval_serde_infinities() {
        let i = Interval::new(f64::NEG_INFINITY, 1.5).unwrap();
        let s = serde_json::to_string(&i).unwrap();
        assert_eq!(s, r#"{"lo":"-inf","hi":1.5}"#);
        let back: Interval = serde_json::from_str(&s).unwrap();
        assert_eq!(back, i);
    }
}
