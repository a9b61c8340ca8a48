//! Owen-table antiderivatives.
//!
//! With `c = sqrt(1 + B^2)`:
//!
//! ```text
//! ∫ x g(x) G(A - Bx) dx = -(B/c) g(A/c) G(cx - AB/c) - G(A - Bx) g(x)
//! ∫ x g(x) g(A - Bx) dx = -(1/c²) g(A/c) g(cx - AB/c) + (AB/c³) g(A/c) G(cx - AB/c)
//! ```
//!
//! `A = ±inf` is accepted and handled by its limit.

use super::{std_cdf, std_mass, std_pdf, Interval};

/// `∫_cell x g(x) G(A - Bx) dx`.
#[allow(non_snake_case)]
pub fn owen_xgG(A: f64, B: f64, cell: Interval) -> f64 {
    if cell.is_degenerate() || A == f64::NEG_INFINITY {
        return 0.0;
    }
    let (lo, hi) = (cell.lo, cell.hi);
    if A == f64::INFINITY {
        // G(A - Bx) = 1.
        return std_pdf(lo) - std_pdf(hi);
    }
    let c = (1.0 + B * B).sqrt();
    let shift = A * B / c;
    let y = |x: f64| if x.is_infinite() { x } else { c * x - shift };
    let first = -(B / c) * std_pdf(A / c) * std_mass(y(lo), y(hi));
    let tail = |x: f64| {
        if x.is_infinite() {
            0.0
        } else {
            std_cdf(A - B * x) * std_pdf(x)
        }
    };
    first - (tail(hi) - tail(lo))
}

/// `∫_cell x g(x) g(A - Bx) dx`.
#[allow(non_snake_case)]
pub fn owen_xgg(A: f64, B: f64, cell: Interval) -> f64 {
    if cell.is_degenerate() || A.is_infinite() {
        return 0.0;
    }
    let (lo, hi) = (cell.lo, cell.hi);
    let c2 = 1.0 + B * B;
    let c = c2.sqrt();
    let shift = A * B / c;
    let y = |x: f64| if x.is_infinite() { x } else { c * x - shift };
    let (ylo, yhi) = (y(lo), y(hi));
    let ga = std_pdf(A / c);
    ga * (-(std_pdf(yhi) - std_pdf(ylo)) / c2 + A * B / (c2 * c) * std_mass(ylo, yhi))
}
