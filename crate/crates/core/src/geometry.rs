//! Convex polygons and their exact geometric functionals.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{HhError, Result};
use crate::lp;

/// Relative tolerance for the strict-convexity test at each vertex.
pub const CONVEXITY_TOL: f64 = 1e-12;
/// Closed-set tolerance used by [`ConvexPolygon::contains`].
pub const CONTAINS_TOL: f64 = 1e-12;
/// Relative tolerance for the invariants checked in [`geometry_summary`].
pub const SUMMARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A bounded, strictly convex planar domain given by its vertices in
/// counterclockwise order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

fn signed_area_of(v: &[Point]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        s += v[i].cross(v[(i + 1) % n]);
    }
    0.5 * s
}

impl ConvexPolygon {
    /// Validates a counterclockwise vertex list.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        validate(&vertices)?;
        Ok(ConvexPolygon { vertices })
    }

    /// Accepts either orientation; returns the polygon and whether the input
    /// had to be reversed.
    pub fn from_points(mut vertices: Vec<Point>) -> Result<(Self, bool)> {
        if vertices.len() < 3 {
            return Err(HhError::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let reversed = signed_area_of(&vertices) < 0.0;
        if reversed {
            vertices.reverse();
        }
        Ok((ConvexPolygon::new(vertices)?, reversed))
    }

    /// Regular `n`-gon with the given circumradius, centered at the origin,
    /// with a vertex on the positive x-axis.
    pub fn regular(n: usize, circumradius: f64) -> Result<Self> {
        if n < 3 {
            return Err(HhError::InvalidArgument(format!("regular polygon needs n >= 3, got {n}")));
        }
        if !(circumradius > 0.0) {
            return Err(HhError::InvalidArgument("circumradius must be positive".into()));
        }
        let v = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Point::new(circumradius * t.cos(), circumradius * t.sin())
            })
            .collect();
        ConvexPolygon::new(v)
    }

    /// Axis-aligned box `[x0, x1] × [y0, y1]`.
    pub fn axis_box(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(HhError::InvalidArgument(format!(
                "degenerate box [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        ConvexPolygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    /// Centered rectangle `(-a, a) × (-b, b)`.
    pub fn rectangle(half_width: f64, half_height: f64) -> Result<Self> {
        ConvexPolygon::axis_box(-half_width, half_width, -half_height, half_height)
    }

    /// `[0, 1]²`.
    pub fn unit_square() -> Self {
        ConvexPolygon::axis_box(0.0, 1.0, 0.0, 1.0).expect("unit square is valid")
    }

    /// Equilateral triangle with the given side, base on the x-axis.
    pub fn equilateral(side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(HhError::InvalidArgument("side must be positive".into()));
        }
        ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(side, 0.0),
            Point::new(0.5 * side, 0.5 * 3f64.sqrt() * side),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        a.dist(b)
    }

    /// Outward unit normal of edge `i`.
    pub fn outward_normal(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        let t = b - a;
        Point::new(t.y, -t.x) * (1.0 / t.norm())
    }

    /// Signed distance from `x` to the supporting line of edge `i`,
    /// positive on the polygon side.
    pub fn edge_distance(&self, i: usize, x: Point) -> f64 {
        let (a, _) = self.edge(i);
        (a - x).dot(self.outward_normal(i))
    }

    /// Minimum over edges of [`Self::edge_distance`]; positive exactly in the
    /// interior, and equal to the distance to the boundary there.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        (0..self.len())
            .map(|i| self.edge_distance(i, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Interior angle at vertex `i`.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        let prev = self.vertices[(i + n - 1) % n];
        let cur = self.vertices[i];
        let next = self.vertices[(i + 1) % n];
        let a = prev - cur;
        let b = next - cur;
        a.cross(b).abs().atan2(a.dot(b))
    }

    pub fn vertex_centroid(&self) -> Point {
        let s = self
            .vertices
            .iter()
            .fold(Point::ORIGIN, |acc, &v| acc + v);
        s * (1.0 / self.len() as f64)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let n = self.len();
        let v = &self.vertices;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let c = a.cross(b);
            cx += (a.x + b.x) * c;
            cy += (a.y + b.y) * c;
        }
        let k = 1.0 / (6.0 * signed_area_of(v));
        Point::new(cx * k, cy * k)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Scaling about the origin.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(HhError::InvalidArgument("scale factor must be positive".into()));
        }
        ConvexPolygon::new(self.vertices.iter().map(|&v| v * t).collect())
    }

    /// Scaling about `center`.
    pub fn scaled_about(&self, center: Point, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(HhError::InvalidArgument("scale factor must be positive".into()));
        }
        ConvexPolygon::new(
            self.vertices
                .iter()
                .map(|&v| center + (v - center) * t)
                .collect(),
        )
    }

    pub fn translated(&self, d: Point) -> Self {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|&v| v + d).collect(),
        }
    }

    /// Rescaled about its centroid so that the area is 1.
    pub fn area_normalized(&self) -> Result<Self> {
        let a = area(self);
        self.scaled_about(self.centroid(), 1.0 / a.sqrt())
    }

    /// Copy with vertex `i` moved to `p`; fails if the result is not a valid
    /// convex polygon.
    pub fn with_vertex(&self, i: usize, p: Point) -> Result<Self> {
        let mut v = self.vertices.clone();
        v[i] = p;
        ConvexPolygon::new(v)
    }

    pub fn contains(&self, x: Point) -> bool {
        contains(self, x)
    }

    /// Arclength position of a boundary point, measured counterclockwise
    /// from vertex 0. Points off the boundary are projected onto the nearest
    /// edge.
    pub fn arclength_of(&self, x: Point) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut start = 0.0;
        for i in 0..self.len() {
            let (a, b) = self.edge(i);
            let len = a.dist(b);
            let t = ((x - a).dot(b - a) / (len * len)).clamp(0.0, 1.0);
            let d = x.dist(a.lerp(b, t));
            if d < best.0 {
                best = (d, start + t * len);
            }
            start += len;
        }
        best.1
    }

    /// Boundary point at arclength `s` (taken modulo the perimeter).
    pub fn point_at_arclength(&self, s: f64) -> Point {
        let total = perimeter(self);
        let mut s = s.rem_euclid(total);
        for i in 0..self.len() {
            let (a, b) = self.edge(i);
            let len = a.dist(b);
            if s <= len {
                return a.lerp(b, s / len);
            }
            s -= len;
        }
        self.vertices[0]
    }
}

fn validate(v: &[Point]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(HhError::InvalidPolygon(format!(
            "need at least 3 vertices, got {n}"
        )));
    }
    if v.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(HhError::InvalidPolygon("non-finite vertex coordinate".into()));
    }
    let scale = v.iter().fold(0.0_f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let mut turning = 0.0;
    for i in 0..n {
        let e0 = v[(i + 1) % n] - v[i];
        let e1 = v[(i + 2) % n] - v[(i + 1) % n];
        let (l0, l1) = (e0.norm(), e1.norm());
        if l0 <= 1e-14 * scale.max(1e-300) {
            return Err(HhError::InvalidPolygon(format!(
                "duplicate consecutive vertices at index {i} and {}",
                (i + 1) % n
            )));
        }
        let c = e0.cross(e1);
        if c <= CONVEXITY_TOL * l0 * l1 {
            return Err(HhError::InvalidPolygon(format!(
                "not strictly convex counterclockwise at vertex {} (cross product {c:e})",
                (i + 1) % n
            )));
        }
        turning += c.atan2(e0.dot(e1));
    }
    // All left turns but winding more than once (a star polygon).
    if (turning - 2.0 * PI).abs() > 1e-6 {
        return Err(HhError::InvalidPolygon(format!(
            "vertices wind {:.3} times around the interior",
            turning / (2.0 * PI)
        )));
    }
    Ok(())
}

/// Shoelace area.
pub fn area(p: &ConvexPolygon) -> f64 {
    signed_area_of(&p.vertices)
}

pub fn perimeter(p: &ConvexPolygon) -> f64 {
    (0..p.len()).map(|i| p.edge_length(i)).sum()
}

/// Radius and center of the largest inscribed disk.
///
/// Solves the Chebyshev-center LP `max r  s.t.  nᵢ·(x − aᵢ) ≥ r` over the
/// inward edge normals. Coordinates are shifted to the vertex centroid, which
/// is interior, so every right-hand side is a positive distance and the
/// slack basis is feasible.
pub fn inradius_incenter(p: &ConvexPolygon) -> Result<(f64, Point)> {
    let c = p.vertex_centroid();
    let n = p.len();
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let nu = p.outward_normal(i);
        let d = p.edge_distance(i, c);
        if !(d > 0.0) {
            return Err(HhError::LpFailure(format!(
                "reference point {c} is not interior (edge {i} distance {d:e})"
            )));
        }
        // Inward normal is -nu: -nu·(x - a) >= r  <=>  nu·dx + r <= d.
        // dx = (x⁺ - x⁻, y⁺ - y⁻).
        rows.push(vec![nu.x, nu.y, -nu.x, -nu.y, 1.0]);
        rhs.push(d);
    }
    let z = lp::maximize(&[0.0, 0.0, 0.0, 0.0, 1.0], &rows, &rhs)
        .map_err(|e| HhError::LpFailure(format!("{e:?}")))?;
    let r = z[4];
    if !(r > 0.0) {
        return Err(HhError::LpFailure(format!("non-positive optimum r = {r:e}")));
    }
    Ok((r, c + Point::new(z[0] - z[2], z[1] - z[3])))
}

/// Largest distance between two vertices.
pub fn diameter(p: &ConvexPolygon) -> f64 {
    let v = &p.vertices;
    let mut d = 0.0_f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d = d.max(v[i].dist(v[j]));
        }
    }
    d
}

/// Minimal width of a supporting slab. For a polygon one of the two
/// supporting lines always contains an edge.
pub fn width(p: &ConvexPolygon) -> f64 {
    (0..p.len())
        .map(|i| {
            p.vertices
                .iter()
                .map(|&v| p.edge_distance(i, v))
                .fold(0.0_f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Closed-set membership.
pub fn contains(p: &ConvexPolygon, x: Point) -> bool {
    (0..p.len()).all(|i| p.edge_distance(i, x) >= -CONTAINS_TOL)
}

/// Triangle with base `{0} × [-η/2, η/2]` and apex `(1, 0)`.
pub fn simplex_family(eta: f64) -> Result<ConvexPolygon> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(HhError::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    ConvexPolygon::new(vec![
        Point::new(0.0, -0.5 * eta),
        Point::new(1.0, 0.0),
        Point::new(0.0, 0.5 * eta),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub volume: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub incenter: Point,
    pub diameter: f64,
    pub width: f64,
}

impl GeometrySummary {
    /// `D/r`.
    pub fn eccentricity(&self) -> f64 {
        self.diameter / self.inradius
    }
}

pub fn geometry_summary(p: &ConvexPolygon) -> Result<GeometrySummary> {
    let volume = area(p);
    if !(volume > 0.0) {
        return Err(HhError::InvalidPolygon("zero area".into()));
    }
    let per = perimeter(p);
    let (inradius, incenter) = inradius_incenter(p)?;
    let g = GeometrySummary {
        volume,
        perimeter: per,
        inradius,
        incenter,
        diameter: diameter(p),
        width: width(p),
    };
    let ratio = volume / per;
    let tol = 1.0 + SUMMARY_TOL;
    if ratio > g.inradius * tol || g.inradius > 2.0 * ratio * tol {
        return Err(HhError::GeometryInvariant(format!(
            "inradius chain |Ω|/|∂Ω| = {ratio} <= r = {} <= 2|Ω|/|∂Ω| fails",
            g.inradius
        )));
    }
    if g.width > g.diameter * tol {
        return Err(HhError::GeometryInvariant(format!(
            "width {} exceeds diameter {}",
            g.width, g.diameter
        )));
    }
    if 2.0 * g.inradius > g.width * tol {
        return Err(HhError::GeometryInvariant(format!(
            "2r = {} exceeds width {}",
            2.0 * g.inradius,
            g.width
        )));
    }
    Ok(g)
}
