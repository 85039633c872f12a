//! Closed-form torsion functions used as oracles for the grid solver.
//!
//! The rectangle solution is the classical one-dimensional Fourier series on
//! `R_l = (-1/2, 1/2) × (-l, l)`; general rectangles are reached by scaling.

use std::f64::consts::PI;

use crate::error::{HhError, Result};
use crate::geometry::Point;

/// Odd-index terms retained by default.
pub const DEFAULT_SERIES_TERMS: usize = 100;
/// Smallest accepted number of odd terms.
pub const MIN_SERIES_TERMS: usize = 25;

/// `2⁹ / (9π³)`, the largest admissible constant in the two-dimensional
/// quantitative bound.
pub const QUANTITATIVE_C: f64 = 512.0 / (9.0 * PI * PI * PI);

const BOUNDARY_SLACK: f64 = 1e-12;

/// Torsion function `(R² − |x|²)/(2d)` of the `d`-ball of radius `R`.
pub fn ball_torsion(d: usize, radius: f64, x: &[f64]) -> Result<f64> {
    let r2 = ball_check(d, radius, x)?;
    Ok(((radius * radius - r2) / (2.0 * d as f64)).max(0.0))
}

/// `|∇u| = |x|/d` for the ball torsion function.
pub fn ball_torsion_gradient(d: usize, radius: f64, x: &[f64]) -> Result<f64> {
    let r2 = ball_check(d, radius, x)?;
    Ok(r2.sqrt() / d as f64)
}

fn ball_check(d: usize, radius: f64, x: &[f64]) -> Result<f64> {
    if d < 2 {
        return Err(HhError::InvalidArgument(format!("dimension must be >= 2, got {d}")));
    }
    if x.len() != d {
        return Err(HhError::InvalidArgument(format!(
            "point has {} coordinates, expected {d}",
            x.len()
        )));
    }
    if !(radius > 0.0) {
        return Err(HhError::InvalidArgument("radius must be positive".into()));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2.sqrt() > radius * (1.0 + BOUNDARY_SLACK) {
        return Err(HhError::OutOfDomain {
            what: "ball",
            x: x[0],
            y: x[1],
        });
    }
    Ok(r2)
}

/// Slab `(-r, r) × ℝ` profile `(r² − x₁²)/2`.
pub fn slab_torsion(r: f64, x1: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(HhError::InvalidArgument("slab half-width must be positive".into()));
    }
    if x1.abs() > r * (1.0 + BOUNDARY_SLACK) {
        return Err(HhError::OutOfDomain {
            what: "slab",
            x: x1,
            y: 0.0,
        });
    }
    Ok(((r * r - x1 * x1) / 2.0).max(0.0))
}

/// `|∂u/∂ν|` on the slab boundary.
pub fn slab_normal_derivative(r: f64) -> f64 {
    r
}

/// Strip `{0 < x₁ < 1}` profile `x₁(1 − x₁)/2`.
pub fn unit_strip_torsion(x1: f64) -> Result<f64> {
    if !(-BOUNDARY_SLACK..=1.0 + BOUNDARY_SLACK).contains(&x1) {
        return Err(HhError::OutOfDomain {
            what: "unit strip",
            x: x1,
            y: 0.0,
        });
    }
    Ok((x1 * (1.0 - x1) / 2.0).max(0.0))
}

/// `|∂u/∂ν|` on either face of the unit strip.
pub const UNIT_STRIP_NORMAL_DERIVATIVE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleSeriesParams {
    half_length: f64,
    n_terms: usize,
}

impl RectangleSeriesParams {
    /// `half_length` may be `f64::INFINITY` (the strip limit).
    pub fn new(half_length: f64, n_terms: usize) -> Result<Self> {
        if !(half_length > 0.0) {
            return Err(HhError::InvalidArgument(format!(
                "rectangle half-length must be positive, got {half_length}"
            )));
        }
        if n_terms < MIN_SERIES_TERMS {
            return Err(HhError::InvalidArgument(format!(
                "need at least {MIN_SERIES_TERMS} series terms, got {n_terms}"
            )));
        }
        Ok(RectangleSeriesParams { half_length, n_terms })
    }

    pub fn with_default_terms(half_length: f64) -> Result<Self> {
        Self::new(half_length, DEFAULT_SERIES_TERMS)
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    fn odd(&self) -> impl Iterator<Item = f64> {
        (0..self.n_terms).map(|k| (2 * k + 1) as f64)
    }
}

/// `cosh(a)/cosh(b)` for `0 ≤ a ≤ b`, stable for arguments far beyond the
/// overflow threshold of `cosh`.
fn cosh_ratio(a: f64, b: f64) -> f64 {
    let a = a.abs();
    if b.is_infinite() {
        return 0.0;
    }
    (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp())
}

fn check_in_rectangle(params: &RectangleSeriesParams, x: Point) -> Result<()> {
    let l = params.half_length;
    if x.x.abs() > 0.5 + BOUNDARY_SLACK || x.y.abs() > l * (1.0 + BOUNDARY_SLACK) {
        return Err(HhError::OutOfDomain {
            what: "rectangle",
            x: x.x,
            y: x.y,
        });
    }
    Ok(())
}

/// Torsion function of `R_l` evaluated by its truncated series.
pub fn rectangle_torsion(params: &RectangleSeriesParams, x: Point) -> Result<f64> {
    check_in_rectangle(params, x)?;
    let l = params.half_length;
    let x1 = x.x.clamp(-0.5, 0.5);
    let series: f64 = params
        .odd()
        .map(|n| {
            2.0 / (n * n * n) * cosh_ratio(n * PI * x.y, n * PI * l) * (n * PI * (x1 + 0.5)).sin()
        })
        .sum();
    Ok((1.0 - 4.0 * x1 * x1) / 8.0 - 2.0 / PI.powi(3) * series)
}

/// `u_{R_l}(0, 0)`, the maximum of the rectangle torsion function.
pub fn rectangle_umax(params: &RectangleSeriesParams) -> f64 {
    let l = params.half_length;
    let series: f64 = params
        .odd()
        .enumerate()
        .map(|(k, n)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign / (n * n * n) * cosh_ratio(0.0, n * PI * l)
        })
        .sum();
    0.125 - 4.0 / PI.powi(3) * series
}

/// Magnitude of the first omitted term of the (alternating) center series,
/// a bound on the truncation error of [`rectangle_umax`].
pub fn rectangle_umax_tail_bound(params: &RectangleSeriesParams) -> f64 {
    let n = (2 * params.n_terms + 1) as f64;
    4.0 / PI.powi(3) / (n * n * n) * cosh_ratio(0.0, n * PI * params.half_length)
}

/// `∂u/∂x₁` at the boundary point `(1/2, x₂)`; the magnitude is the normal
/// derivative there.
pub fn rectangle_boundary_gradient(params: &RectangleSeriesParams, x2: f64) -> Result<f64> {
    check_in_rectangle(params, Point::new(0.5, x2))?;
    let l = params.half_length;
    let series: f64 = params
        .odd()
        .map(|n| cosh_ratio(n * PI * x2, n * PI * l) / (n * n))
        .sum();
    Ok(-0.5 + 4.0 / (PI * PI) * series)
}

/// Torsion function of the centered rectangle `(-a, a) × (-b, b)`, obtained
/// from `R_l` by rotation and scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleTorsion {
    half_width: f64,
    half_height: f64,
    n_terms: usize,
}

impl RectangleTorsion {
    pub fn new(half_width: f64, half_height: f64) -> Result<Self> {
        Self::with_terms(half_width, half_height, DEFAULT_SERIES_TERMS)
    }

    pub fn with_terms(half_width: f64, half_height: f64, n_terms: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_height > 0.0) {
            return Err(HhError::InvalidArgument("rectangle sides must be positive".into()));
        }
        if n_terms < MIN_SERIES_TERMS {
            return Err(HhError::InvalidArgument(format!(
                "need at least {MIN_SERIES_TERMS} series terms, got {n_terms}"
            )));
        }
        Ok(RectangleTorsion {
            half_width,
            half_height,
            n_terms,
        })
    }

    /// Short half-side, long half-side.
    fn sides(&self) -> (f64, f64) {
        if self.half_width <= self.half_height {
            (self.half_width, self.half_height)
        } else {
            (self.half_height, self.half_width)
        }
    }

    fn params(&self) -> RectangleSeriesParams {
        let (a, b) = self.sides();
        RectangleSeriesParams {
            half_length: b / (2.0 * a),
            n_terms: self.n_terms,
        }
    }

    pub fn value(&self, x: Point) -> Result<f64> {
        let (a, _) = self.sides();
        let local = if self.half_width <= self.half_height {
            x
        } else {
            Point::new(x.y, x.x)
        };
        let s = 2.0 * a;
        Ok(s * s * rectangle_torsion(&self.params(), local * (1.0 / s))?)
    }

    pub fn umax(&self) -> f64 {
        let s = 2.0 * self.sides().0;
        s * s * rectangle_umax(&self.params())
    }

    /// Maximal gradient, attained at the midpoints of the long sides.
    pub fn grad_max(&self) -> f64 {
        let s = 2.0 * self.sides().0;
        s * rectangle_boundary_gradient(&self.params(), 0.0)
            .expect("x2 = 0 is on the boundary")
            .abs()
    }
}

/// Two-dimensional quantitative bounds in terms of inradius `r` and diameter
/// `D`: returns `(u_bound, c2_bound)` with
/// `u_bound = (r²/2)(1 − c·e^{−(π/2)(D−r)/r})` and
/// `c2_bound = 2·sqrt(1 − c·e^{−(π/2)(D−r)/r})`, `c = 2⁹/(9π³)`.
pub fn quantitative_bound_2d(r: f64, diameter: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && diameter > r) {
        return Err(HhError::InvalidArgument(format!(
            "need D > r > 0, got r = {r}, D = {diameter}"
        )));
    }
    let factor = 1.0 - QUANTITATIVE_C * (-0.5 * PI * (diameter - r) / r).exp();
    Ok((0.5 * r * r * factor, 2.0 * factor.sqrt()))
}
