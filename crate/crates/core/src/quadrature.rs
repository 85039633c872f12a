//! Fixed quadrature rules over polygons and their boundaries.
//!
//! Domain integrals use a fan triangulation from the incenter with the
//! 7-point degree-5 rule on each sub-triangle; boundary integrals use
//! 5-point Gauss–Legendre on each sub-segment. Both refine uniformly.

use crate::error::Result;
use crate::geometry::{inradius_incenter, ConvexPolygon, Point};

/// Uniform refinement levels used by default (each level splits triangles
/// in four and segments in two).
pub const DEFAULT_REFINEMENTS: u32 = 2;

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Barycentric points and area-normalised weights of the symmetric 7-point
/// degree-5 triangle rule.
fn triangle_rule() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let a1 = (6.0 - s) / 21.0;
    let b1 = (9.0 + 2.0 * s) / 21.0;
    let w1 = (155.0 - s) / 1200.0;
    let a2 = (6.0 + s) / 21.0;
    let b2 = (9.0 - 2.0 * s) / 21.0;
    let w2 = (155.0 + s) / 1200.0;
    let t = 1.0 / 3.0;
    [
        ([t, t, t], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Fan triangles from the incenter, each subdivided `refinements` times.
pub fn fan_triangles(p: &ConvexPolygon, refinements: u32) -> Result<Vec<[Point; 3]>> {
    let (_, center) = inradius_incenter(p)?;
    let mut tris: Vec<[Point; 3]> = (0..p.len())
        .map(|i| {
            let (a, b) = p.edge(i);
            [center, a, b]
        })
        .collect();
    for _ in 0..refinements {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = a.lerp(b, 0.5);
            let bc = b.lerp(c, 0.5);
            let ca = c.lerp(a, 0.5);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        tris = next;
    }
    Ok(tris)
}

/// Quadrature nodes and weights for `∫_Ω`.
pub fn domain_rule(p: &ConvexPolygon, refinements: u32) -> Result<Vec<(Point, f64)>> {
    let rule = triangle_rule();
    let tris = fan_triangles(p, refinements)?;
    let mut out = Vec::with_capacity(tris.len() * rule.len());
    for [a, b, c] in tris {
        let area = triangle_area(a, b, c);
        for (l, w) in rule {
            let x = Point::new(
                l[0] * a.x + l[1] * b.x + l[2] * c.x,
                l[0] * a.y + l[1] * b.y + l[2] * c.y,
            );
            out.push((x, w * area));
        }
    }
    Ok(out)
}

/// Quadrature nodes and weights for `∫_{∂Ω} dσ`.
pub fn boundary_rule(p: &ConvexPolygon, refinements: u32) -> Vec<(Point, f64)> {
    let pieces = 1usize << refinements;
    let mut out = Vec::with_capacity(p.len() * pieces * 5);
    for i in 0..p.len() {
        let (a, b) = p.edge(i);
        for k in 0..pieces {
            let s0 = a.lerp(b, k as f64 / pieces as f64);
            let s1 = a.lerp(b, (k + 1) as f64 / pieces as f64);
            let half = 0.5 * s0.dist(s1);
            for (t, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                out.push((s0.lerp(s1, 0.5 * (t + 1.0)), w * half));
            }
        }
    }
    out
}

pub fn integrate_domain_with<F: Fn(Point) -> f64>(
    p: &ConvexPolygon,
    f: F,
    refinements: u32,
) -> Result<f64> {
    Ok(domain_rule(p, refinements)?
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum())
}

/// `∫_Ω f dx` with the default refinement.
pub fn integrate_domain<F: Fn(Point) -> f64>(p: &ConvexPolygon, f: F) -> Result<f64> {
    integrate_domain_with(p, f, DEFAULT_REFINEMENTS)
}

pub fn integrate_boundary_with<F: Fn(Point) -> f64>(p: &ConvexPolygon, f: F, refinements: u32) -> f64 {
    boundary_rule(p, refinements)
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum()
}

/// `∫_{∂Ω} f dσ` with the default refinement.
pub fn integrate_boundary<F: Fn(Point) -> f64>(p: &ConvexPolygon, f: F) -> f64 {
    integrate_boundary_with(p, f, DEFAULT_REFINEMENTS)
}

/// Integral together with the change from one refinement level coarser,
/// used as the quadrature error estimate.
pub fn integrate_domain_with_error<F: Fn(Point) -> f64>(p: &ConvexPolygon, f: F) -> Result<(f64, f64)> {
    let fine = integrate_domain_with(p, &f, DEFAULT_REFINEMENTS)?;
    let coarse = integrate_domain_with(p, &f, DEFAULT_REFINEMENTS - 1)?;
    Ok((fine, (fine - coarse).abs()))
}

pub fn integrate_boundary_with_error<F: Fn(Point) -> f64>(p: &ConvexPolygon, f: F) -> (f64, f64) {
    let fine = integrate_boundary_with(p, &f, DEFAULT_REFINEMENTS);
    let coarse = integrate_boundary_with(p, &f, DEFAULT_REFINEMENTS - 1);
    (fine, (fine - coarse).abs())
}
