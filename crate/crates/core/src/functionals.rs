//! Hermite–Hadamard constants `c_{d,α}(Ω)`, the closed-form bounds they
//! satisfy, and test-function ratios.
//!
//! For a convex `Ω ⊂ ℝ^d` with torsion function `u`,
//!
//! ```text
//! c_{d,α}(Ω) = |Ω|^{−α/d} |∂Ω|^{(α−1)/(d−1)} ‖∇u‖_∞
//! ```
//!
//! is the best constant in `∫_Ω f ≤ c |Ω|^{α/d} |∂Ω|^{(1−α)/(d−1)} ∫_{∂Ω} f`
//! over non-negative subharmonic `f`. In the plane `c₂ = c_{2,2}` lies in
//! `[1, 2)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::quantitative_bound_2d;
use crate::error::{HhError, Result};
use crate::geometry::{area, geometry_summary, perimeter, ConvexPolygon, GeometrySummary, Point};
use crate::quadrature::{boundary_rule, domain_rule, integrate_boundary_with_error, integrate_domain_with_error};
use crate::solver::TorsionSummary;

/// Exact-geometry checks use this relative tolerance.
pub const GEOMETRY_TOL: f64 = 1e-10;
/// Minimum number of sample points for the non-negativity check.
pub const MIN_SAMPLES: usize = 10_000;

/// Volume of the unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

fn check_alpha(d: usize, alpha: f64) -> Result<()> {
    if d < 2 {
        return Err(HhError::InvalidArgument(format!("dimension must be at least 2, got {d}")));
    }
    if !alpha.is_finite() || alpha > d as f64 {
        return Err(HhError::InvalidArgument(format!(
            "alpha = {alpha} exceeds d = {d}; no uniform bound holds there"
        )));
    }
    Ok(())
}

/// `c_{d,α}` from volume, surface measure and gradient maximum.
pub fn hh_constant_from(d: usize, volume: f64, surface: f64, grad_max: f64, alpha: f64) -> Result<f64> {
    check_alpha(d, alpha)?;
    let d = d as f64;
    Ok(volume.powf(-alpha / d) * surface.powf((alpha - 1.0) / (d - 1.0)) * grad_max)
}

/// `c_{2,α}(Ω)` of a planar domain.
pub fn hh_constant(geom: &GeometrySummary, tors: &TorsionSummary, alpha: f64) -> Result<f64> {
    hh_constant_from(2, geom.volume, geom.perimeter, tors.grad_max, alpha)
}

/// Upper bound on `c_{d,α}` valid for every convex domain: the sharper of
/// the two forms split at `α = 1`.
pub fn lemma41_bound(d: usize, alpha: f64) -> Result<f64> {
    check_alpha(d, alpha)?;
    let df = d as f64;
    let omega = unit_ball_volume(d).powf((alpha - df) / (df * (df - 1.0)));
    let e = if alpha >= 1.0 {
        (alpha - 1.0) / (df - 1.0) - (df - alpha) / (2.0 * (df - 1.0))
    } else {
        (alpha - 1.0) / (df - 1.0) - 0.5
    };
    Ok(df.powf(e) * omega)
}

/// The bound obtained by combining `c_d < d` with the isoperimetric inequality.
pub fn trivial_bound(d: usize, alpha: f64) -> Result<f64> {
    check_alpha(d, alpha)?;
    let df = d as f64;
    Ok(df.powf((alpha - 1.0) / (df - 1.0)) * unit_ball_volume(d).powf((alpha - df) / (df * (df - 1.0))))
}

/// Relative residual of `c_α = c_{α₁}^{(α₂−α)/(α₂−α₁)} c_{α₂}^{(α−α₁)/(α₂−α₁)}`.
pub fn interpolation_identity_check(
    geom: &GeometrySummary,
    tors: &TorsionSummary,
    alpha1: f64,
    alpha2: f64,
    alpha: f64,
) -> Result<f64> {
    if !(alpha1 <= alpha && alpha <= alpha2 && alpha1 < alpha2) {
        return Err(HhError::InvalidArgument(format!(
            "need alpha1 <= alpha <= alpha2 with alpha1 < alpha2, got {alpha1}, {alpha}, {alpha2}"
        )));
    }
    let c = hh_constant(geom, tors, alpha)?;
    let c1 = hh_constant(geom, tors, alpha1)?;
    let c2 = hh_constant(geom, tors, alpha2)?;
    let t = (alpha - alpha1) / (alpha2 - alpha1);
    let rhs = c1.powf(1.0 - t) * c2.powf(t);
    Ok((c - rhs).abs() / c)
}

/// Relates `c_α` to `c_{α'}` through the isoperimetric ratio. Returns
/// `(c_α recomputed from c_{α'}, the isoperimetric upper bound for c_α)`.
pub fn isoperimetric_chain(
    geom: &GeometrySummary,
    tors: &TorsionSummary,
    alpha: f64,
    alpha_prime: f64,
) -> Result<(f64, f64)> {
    let cp = hh_constant(geom, tors, alpha_prime)?;
    let ratio = geom.volume.sqrt() / geom.perimeter;
    let via = ratio.powf(alpha_prime - alpha) * cp;
    let bound = (2.0 * PI.sqrt()).powf(alpha - alpha_prime) * cp;
    Ok((via, bound))
}

/// One inequality evaluated on a domain. `margin` is the signed slack
/// (positive when the inequality holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub attained: f64,
    pub margin: f64,
    pub error: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn upper(name: &str, attained: f64, bound: f64, error: f64) -> Self {
        Self::from_margin(name, bound, attained, bound - attained, error)
    }

    fn lower(name: &str, attained: f64, bound: f64, error: f64) -> Self {
        Self::from_margin(name, bound, attained, attained - bound, error)
    }

    fn from_margin(name: &str, bound: f64, attained: f64, margin: f64, error: f64) -> Self {
        BoundCheck {
            name: name.to_string(),
            bound,
            attained,
            margin,
            error,
            pass: margin > -error,
        }
    }
}

/// `c_{2,α}` together with the two closed-form upper bounds at that α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub alpha: f64,
    pub c_alpha: f64,
    pub lemma41: f64,
    pub trivial: f64,
}

/// Every checked inequality for one domain and one torsion solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhReport {
    pub dimension: usize,
    pub c2: f64,
    pub c2_error: f64,
    pub alphas: Vec<AlphaEntry>,
    pub geometry: GeometrySummary,
    pub torsion: TorsionSummary,
    pub bound_margins: Vec<BoundCheck>,
    pub all_pass: bool,
}

impl HhReport {
    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.bound_margins.iter().find(|b| b.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.bound_margins.iter().filter(|b| !b.pass)
    }
}

pub fn verify_all_bounds(p: &ConvexPolygon, tors: &TorsionSummary) -> Result<HhReport> {
    verify_all_bounds_with_alphas(p, tors, &[0.0, 1.0, 2.0])
}

/// Builds the full report. Refuses summaries flagged as untrusted.
pub fn verify_all_bounds_with_alphas(p: &ConvexPolygon, tors: &TorsionSummary, alphas: &[f64]) -> Result<HhReport> {
    tors.ensure_trusted()?;
    let geom = geometry_summary(p)?;
    let (a, per, r, dia, w) = (geom.volume, geom.perimeter, geom.inradius, geom.diameter, geom.width);
    let (u, g) = (tors.u_max, tors.grad_max);
    let (eu, eg) = (tors.error_estimate_umax, tors.error_estimate_gradmax);

    let c2 = hh_constant(&geom, tors, 2.0)?;
    let c2_error = per / a * eg;
    let (u_quant, c2_quant) = quantitative_bound_2d(r, dia)?;
    let eps_num = 3.0 * (eu / u + 2.0 * eg / g);
    let geo_err = |v: f64| GEOMETRY_TOL * v.abs();

    let mut checks = vec![
        BoundCheck::upper("c2_upper", c2, 2.0, c2_error),
        BoundCheck::lower("serrin_lower", c2, 1.0, c2_error),
        BoundCheck::upper("sperb", g * g, 2.0 * u, 2.0 * u * eps_num),
        BoundCheck::upper("banuelos_kroger", u, 0.5 * r * r, eu),
        BoundCheck::upper("quant_c2", c2, c2_quant, c2_error),
        BoundCheck::upper("quant_u", u, u_quant, eu),
        BoundCheck::lower("inradius_lower", r, a / per, geo_err(r)),
        BoundCheck::upper("inradius_upper", r, 2.0 * a / per, geo_err(r)),
        BoundCheck::upper("steinhagen", w, 3.0 * r, geo_err(w)),
    ];

    let mut entries = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let c = hh_constant(&geom, tors, alpha)?;
        let err = c * eg / g;
        let lemma = lemma41_bound(2, alpha)?;
        let triv = trivial_bound(2, alpha)?;
        checks.push(BoundCheck::upper(&format!("lemma41_alpha_{alpha}"), c, lemma, err));
        checks.push(BoundCheck::upper(&format!("trivial_alpha_{alpha}"), c, triv, err));
        entries.push(AlphaEntry {
            alpha,
            c_alpha: c,
            lemma41: lemma,
            trivial: triv,
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(HhReport {
        dimension: 2,
        c2,
        c2_error,
        alphas: entries,
        geometry: geom,
        torsion: tors.clone(),
        bound_margins: checks,
        all_pass,
    })
}

/// Why a test function is subharmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Harmonic,
    Convex,
    Explicit(String),
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Harmonic => f.write_str("harmonic"),
            Certificate::Convex => f.write_str("convex"),
            Certificate::Explicit(s) => write!(f, "explicit: {s}"),
        }
    }
}

pub type Evaluator = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// A non-negative subharmonic function with the reason it is subharmonic.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub evaluator: Evaluator,
    pub certificate: Certificate,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("certificate", &self.certificate)
            .finish()
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, certificate: Certificate, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        TestFunction {
            name: name.into(),
            evaluator: Arc::new(f),
            certificate,
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        (self.evaluator)(x)
    }

    /// Samples at least [`MIN_SAMPLES`] points of the closed domain and
    /// reports the first negative value.
    pub fn check_nonnegative(&self, p: &ConvexPolygon) -> Result<()> {
        for x in sample_points(p)? {
            let v = self.eval(x);
            if !(v >= 0.0) {
                return Err(HhError::CertificateViolation {
                    name: self.name.clone(),
                    x: x.x,
                    y: x.y,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

fn sample_points(p: &ConvexPolygon) -> Result<Vec<Point>> {
    let mut refinements = 2;
    loop {
        let mut pts: Vec<Point> = domain_rule(p, refinements)?.into_iter().map(|(x, _)| x).collect();
        pts.extend(boundary_rule(p, refinements + 2).into_iter().map(|(x, _)| x));
        pts.extend_from_slice(p.vertices());
        if pts.len() >= MIN_SAMPLES {
            return Ok(pts);
        }
        refinements += 1;
    }
}

/// The library's certified test functions, scaled to be non-negative on `p`.
pub fn shipped_test_functions(p: &ConvexPolygon) -> Vec<TestFunction> {
    let c = p.centroid();
    let radius = p.vertices().iter().map(|v| v.dist(c)).fold(0.0, f64::max);
    let dir = Point::new(1.0, 0.5) * (1.0 / 1.25f64.sqrt());
    let shift = p.vertices().iter().map(|v| -(*v - c).dot(dir)).fold(f64::NEG_INFINITY, f64::max);

    let mut out = vec![
        TestFunction::new("constant", Certificate::Harmonic, |_| 1.0),
        TestFunction::new("affine", Certificate::Harmonic, move |x| ((x - c).dot(dir) + shift).max(0.0)),
        TestFunction::new("square_distance", Certificate::Convex, move |x| (x - c).dot(x - c)),
    ];
    for k in 2..=4i32 {
        let rk = radius.powi(k);
        let power = move |x: Point| {
            let z = x - c;
            let (m, t) = (z.norm(), z.y.atan2(z.x));
            (m.powi(k) * (k as f64 * t).cos(), m.powi(k) * (k as f64 * t).sin())
        };
        out.push(TestFunction::new(format!("harmonic_re_{k}"), Certificate::Harmonic, move |x| {
            (rk + power(x).0).max(0.0)
        }));
        out.push(TestFunction::new(format!("harmonic_im_{k}"), Certificate::Harmonic, move |x| {
            (rk + power(x).1).max(0.0)
        }));
    }
    let k = 0.99 * PI / (2.0 * radius);
    out.push(TestFunction::new("exp_cos", Certificate::Harmonic, move |x| {
        (k * (x.x - c.x)).exp() * (k * (x.y - c.y)).cos()
    }));
    out
}

/// Hermite–Hadamard ratio with its quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HhRatio {
    /// `(|∂Ω| ∫_Ω f) / (|Ω| ∫_{∂Ω} f)`; `None` when `∫_{∂Ω} f = 0`.
    pub ratio: Option<f64>,
    pub error: f64,
    pub domain_integral: f64,
    pub boundary_integral: f64,
}

pub fn hh_ratio_with_error(p: &ConvexPolygon, f: &TestFunction) -> Result<HhRatio> {
    f.check_nonnegative(p)?;
    let (di, de) = integrate_domain_with_error(p, |x| f.eval(x))?;
    let (bi, be) = integrate_boundary_with_error(p, |x| f.eval(x));
    if bi <= 0.0 {
        return Ok(HhRatio {
            ratio: None,
            error: 0.0,
            domain_integral: di,
            boundary_integral: bi,
        });
    }
    let rho = perimeter(p) * di / (area(p) * bi);
    let rel = de / di.abs().max(f64::MIN_POSITIVE) + be / bi;
    Ok(HhRatio {
        ratio: Some(rho),
        error: rho * rel,
        domain_integral: di,
        boundary_integral: bi,
    })
}

/// `ρ(f)`; `+∞` when `∫_{∂Ω} f = 0`.
pub fn hh_ratio(p: &ConvexPolygon, f: &TestFunction) -> Result<f64> {
    Ok(hh_ratio_with_error(p, f)?.ratio.unwrap_or(f64::INFINITY))
}

/// `∫_Ω f / (‖∇u‖_∞ ∫_{∂Ω} f)`, which never exceeds 1.
pub fn normal_derivative_bound_ratio(p: &ConvexPolygon, tors: &TorsionSummary, f: &TestFunction) -> Result<f64> {
    let r = hh_ratio_with_error(p, f)?;
    Ok(r.domain_integral / (tors.grad_max * r.boundary_integral))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn lemma_examples() {
        assert!((lemma41_bound(2, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((lemma41_bound(2, 1.0).unwrap() - (2.0 * PI).powf(-0.5)).abs() < 1e-15);
        assert!((lemma41_bound(2, 0.0).unwrap() - 2f64.powf(-1.5) / PI).abs() < 1e-15);
        assert!((trivial_bound(2, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((trivial_bound(2, 1.0).unwrap() - PI.powf(-0.5)).abs() < 1e-15);
        assert!((trivial_bound(3, 3.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(lemma41_bound(2, 2.5).is_err());
        assert!(trivial_bound(1, 0.0).is_err());
    }

    #[test]
    fn lemma_endpoint_is_d() {
        for d in 2..=10 {
            assert!((lemma41_bound(d, d as f64).unwrap() - d as f64).abs() < 1e-12 * d as f64);
        }
    }

    #[test]
    fn ratios_on_the_centered_square() {
        let sq = ConvexPolygon::rectangle(0.5, 0.5).unwrap();
        let one = TestFunction::new("one", Certificate::Harmonic, |_| 1.0);
        assert!((hh_ratio(&sq, &one).unwrap() - 1.0).abs() < 1e-12);
        let r2 = TestFunction::new("r2", Certificate::Convex, |x: Point| x.dot(x));
        assert!((hh_ratio(&sq, &r2).unwrap() - 0.5).abs() < 1e-12);
        let zero = TestFunction::new("zero", Certificate::Harmonic, |_| 0.0);
        assert_eq!(hh_ratio(&sq, &zero).unwrap(), f64::INFINITY);
        let neg = TestFunction::new("neg", Certificate::Harmonic, |x: Point| x.x);
        assert!(matches!(hh_ratio(&sq, &neg), Err(HhError::CertificateViolation { .. })));
    }

    #[test]
    fn shipped_functions_are_nonnegative() {
        for p in [
            ConvexPolygon::unit_square(),
            crate::geometry::simplex_family(20.0).unwrap(),
            ConvexPolygon::regular(9, 3.0).unwrap(),
        ] {
            for f in shipped_test_functions(&p) {
                f.check_nonnegative(&p).unwrap();
                let rho = hh_ratio(&p, &f).unwrap();
                assert!(rho > 0.0 && rho < 2.0, "{} {rho}", f.name);
            }
        }
    }

    #[test]
    fn sample_count() {
        assert!(sample_points(&ConvexPolygon::unit_square()).unwrap().len() >= MIN_SAMPLES);
    }
}
