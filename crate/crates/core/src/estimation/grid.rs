//! Densities tabulated on a uniform grid, with exact Gaussian propagation of
//! the piecewise-linear interpolant.

use crate::gauss::{std_mass, std_pdf, Interval, TruncatedMoments};

pub const DEFAULT_POINTS: usize = 801;

/// Unnormalized density sampled at `lo + k * step`, restricted to `support`.
///
/// Values outside the support are the density's continuous extension, which
/// keeps the linear interpolation accurate right up to a truncation edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    lo: f64,
    step: f64,
    f: Vec<f64>,
    support: Interval,
    norm: f64,
}

impl GridDensity {
    /// Tabulates `density` on `n` points over `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, support: Interval, density: impl Fn(f64) -> f64) -> Self {
        let n = n.max(3);
        let step = (hi - lo) / (n - 1) as f64;
        let f = (0..n).map(|k| density(lo + k as f64 * step).max(0.0)).collect();
        let mut g = GridDensity { lo, step, f, support, norm: 1.0 };
        g.norm = g.raw_integral(0, Interval::REAL_LINE);
        g
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.step * (self.f.len() - 1) as f64
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    fn node(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }

    fn interp(&self, x: f64) -> f64 {
        let pos = ((x - self.lo) / self.step).clamp(0.0, (self.f.len() - 1) as f64);
        let k = (pos.floor() as usize).min(self.f.len() - 2);
        let w = pos - k as f64;
        self.f[k] * (1.0 - w) + self.f[k + 1] * w
    }

    /// Effective integration range: grid ∩ support ∩ cell.
    fn range(&self, cell: Interval) -> Option<(f64, f64)> {
        let c = cell.intersect(self.support);
        let a = c.lo.max(self.lo);
        let b = c.hi.min(self.hi());
        (a < b).then_some((a, b))
    }

    /// `∫ f(x) x^k dx` over the cell for the piecewise-linear interpolant.
    fn raw_integral(&self, k: usize, cell: Interval) -> f64 {
        let Some((a, b)) = self.range(cell) else { return 0.0 };
        tabulated_moments(self.lo, self.step, &self.f, a, b)[k]
    }

    pub fn mean(&self) -> f64 {
        self.raw_integral(1, Interval::REAL_LINE) / self.norm
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.raw_integral(2, Interval::REAL_LINE) / self.norm - m * m).max(0.0)
    }

    pub fn cell_moments(&self, cell: Interval) -> TruncatedMoments {
        if !(self.norm > 0.0) {
            return TruncatedMoments::empty();
        }
        let Some((a, b)) = self.range(cell) else { return TruncatedMoments::empty() };
        let [p, d1, d2] = tabulated_moments(self.lo, self.step, &self.f, a, b).map(|v| v / self.norm);
        TruncatedMoments::from_partials(p.min(1.0), d1, d2)
    }

    pub fn condition(&self, cell: Interval) -> GridDensity {
        let mut g = self.clone();
        g.support = self.support.intersect(cell);
        g.norm = g.raw_integral(0, Interval::REAL_LINE);
        g
    }

    /// Law of `a X + W`, `W ~ N(0, sigma_w)`, on a fresh `n`-point grid
    /// covering ±`width` predictive standard deviations.
    ///
    /// The interpolant is integrated against the kernel exactly, so narrow
    /// kernels are handled without resolving them on the grid.
    pub fn propagate(&self, a: f64, sigma_w: f64, n: usize, width: f64) -> GridDensity {
        let (m, v) = (self.mean(), self.variance());
        let sd = (a * a * v + sigma_w * sigma_w).sqrt();
        let center = a * m;
        if sigma_w == 0.0 {
            // Pure change of variables.
            let density = |y: f64| self.interp(y / a) / a.abs();
            let support = self.support.affine(a, 0.0);
            let lo = center - width * sd;
            let hi = center + width * sd;
            return GridDensity::from_fn(lo, hi, n, support, |y| density(y) / self.norm);
        }
        let Some((xa, xb)) = self.range(Interval::REAL_LINE) else {
            return self.clone();
        };
        // Breakpoints of the interpolant inside the support.
        let mut knots = vec![(xa, self.interp(xa))];
        let first = ((xa - self.lo) / self.step).ceil() as usize;
        let last = (((xb - self.lo) / self.step).floor() as usize).min(self.f.len() - 1);
        for i in first..=last {
            let x = self.node(i);
            if x > xa && x < xb {
                knots.push((x, self.f[i]));
            }
        }
        knots.push((xb, self.interp(xb)));
        let norm = self.norm;
        let density = move |y: f64| {
            let mut acc = 0.0;
            for w in knots.windows(2) {
                let ((x0, f0), (x1, f1)) = (w[0], w[1]);
                if x1 <= x0 {
                    continue;
                }
                acc += segment_kernel(x0, f0, x1, f1, a, sigma_w, y);
            }
            acc / norm
        };
        let lo = center - width * sd;
        let hi = center + width * sd;
        GridDensity::from_fn(lo, hi, n, Interval::REAL_LINE, density)
    }
}

/// Zeroth to second moments over `[a, b]` of the linear interpolant of `f`
/// tabulated at `lo + i * step`; `[a, b]` must lie inside the grid.
pub(crate) fn tabulated_moments(lo: f64, step: f64, f: &[f64], a: f64, b: f64) -> [f64; 3] {
    let n = f.len();
    let interp = |x: f64| {
        let pos = ((x - lo) / step).clamp(0.0, (n - 1) as f64);
        let k = (pos.floor() as usize).min(n - 2);
        let w = pos - k as f64;
        f[k] * (1.0 - w) + f[k + 1] * w
    };
    let mut acc = [0.0; 3];
    if !(a < b) {
        return acc;
    }
    let first = ((a - lo) / step).ceil().max(0.0) as usize;
    let last = (((b - lo) / step).floor().max(0.0) as usize).min(n - 1);
    let mut prev = (a, interp(a));
    let mut add = |p: (f64, f64), q: (f64, f64)| {
        for (k, slot) in acc.iter_mut().enumerate() {
            *slot += linear_moment(k, p, q);
        }
    };
    for i in first..=last {
        let x = lo + i as f64 * step;
        if x <= a || x >= b {
            continue;
        }
        add(prev, (x, f[i]));
        prev = (x, f[i]);
    }
    add(prev, (b, interp(b)));
    acc
}

/// `∫_{x0}^{x1} f(x) x^k dx` for linear `f`.
fn linear_moment(k: usize, (x0, f0): (f64, f64), (x1, f1): (f64, f64)) -> f64 {
    let d = x1 - x0;
    match k {
        0 => 0.5 * d * (f0 + f1),
        1 => d / 6.0 * (f0 * (2.0 * x0 + x1) + f1 * (x0 + 2.0 * x1)),
        _ => {
            let (a2, ab, b2) = (x0 * x0, x0 * x1, x1 * x1);
            d / 12.0 * (f0 * (3.0 * a2 + 2.0 * ab + b2) + f1 * (a2 + 2.0 * ab + 3.0 * b2))
        }
    }
}

/// `∫_{x0}^{x1} f(x) φ((y - a x)/σ)/σ dx` for linear `f` through `(x0,f0)`, `(x1,f1)`.
fn segment_kernel(x0: f64, f0: f64, x1: f64, f1: f64, a: f64, sigma: f64, y: f64) -> f64 {
    if a == 0.0 {
        return 0.5 * (f0 + f1) * (x1 - x0) * std_pdf(y / sigma) / sigma;
    }
    let z0 = (y - a * x0) / sigma;
    let z1 = (y - a * x1) / sigma;
    let (zl, zh) = if z0 < z1 { (z0, z1) } else { (z1, z0) };
    if zl > 9.0 || zh < -9.0 {
        return 0.0;
    }
    // x = (y - σ z)/a, f(x) = f0 + s (x - x0) = c0 + c1 z.
    let s = (f1 - f0) / (x1 - x0);
    let c0 = f0 + s * (y / a - x0);
    let c1 = -s * sigma / a;
    let mass = std_mass(zl, zh);
    let first = std_pdf(zl) - std_pdf(zh);
    (c0 * mass + c1 * first) / a.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{trunc_moments, Normal};

    fn gaussian_grid(mu: f64, sigma: f64) -> GridDensity {
        let n = Normal::new(mu, sigma).unwrap();
        GridDensity::from_fn(mu - 10.0 * sigma, mu + 10.0 * sigma, DEFAULT_POINTS, Interval::REAL_LINE, |x| n.pdf(x))
    }

    #[test]
    fn moments_of_tabulated_gaussian() {
        let g = gaussian_grid(1.0, 2.0);
        assert!((g.mean() - 1.0).abs() < 1e-10);
        assert!((g.variance() - 4.0).abs() < 1e-3);
    }

    #[test]
    fn truncated_cell_matches_closed_form() {
        let g = gaussian_grid(0.0, 1.0);
        let cell = Interval::new(-0.37, 1.21).unwrap();
        let got = g.cell_moments(cell);
        let exact = trunc_moments(Normal::standard(), cell);
        assert!((got.prob - exact.prob).abs() < 1e-4);
        assert!((got.mean - exact.mean).abs() < 1e-4);
    }

    #[test]
    fn propagation_adds_variance() {
        let g = gaussian_grid(0.5, 1.0).propagate(1.5, 0.1, DEFAULT_POINTS, 8.0);
        assert!((g.mean() - 0.75).abs() < 1e-6);
        assert!((g.variance() - (2.25 + 0.01)).abs() < 1e-3);
        let d = gaussian_grid(0.5, 1.0).propagate(-2.0, 0.0, DEFAULT_POINTS, 8.0);
        assert!((d.mean() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn conditioned_then_propagated_keeps_mass() {
        let g = gaussian_grid(0.0, 1.0).condition(Interval::new(0.0, f64::INFINITY).unwrap());
        assert!((g.mean() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-4);
        assert!((g.variance() - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-4);
        let p = g.propagate(1.0, 1.0, DEFAULT_POINTS, 8.0);
        let total = p.cell_moments(Interval::REAL_LINE).prob;
        assert!((total - 1.0).abs() < 1e-6);
        assert!((p.mean() - g.mean()).abs() < 1e-7, "{} {}", p.mean(), g.mean());
        assert!((p.variance() - g.variance() - 1.0).abs() < 3e-4);
    }
}
