use std::fmt;
use std::path::Path;
use std::sync::Arc;

use log::debug;
use serde::{Deserialize, Serialize};

use super::grid::{opposite, MaskedGrid, DIRECTIONS, EAST, NORTH, SOUTH, WEST};
use super::linear::{self, LinearMethod};
use crate::error::{HhError, Result};
use crate::geometry::Point;
use crate::io::format_f64;

/// Dirichlet data for [`solve_harmonic`].
pub type BoundaryData = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Arms making a smaller angle than this with the outward normal are used
/// for normal derivatives. One axis is always within 45° of the normal.
const MIN_NORMAL_COSINE: f64 = 0.7;
/// Boundary samples within [`CORNER_EXCLUSION`] grid spacings of a vertex
/// are left out of the maximum. Around vertices flatter than
/// `SHARP_VERTEX_FRACTION · π` the zone is also capped at a fraction of the
/// adjacent edges.
const CORNER_EXCLUSION: f64 = 2.0;
const SHARP_VERTEX_FRACTION: f64 = 0.9;
const FLAT_VERTEX_EDGE_FRACTION: f64 = 0.45;
const MAX_SKIPPED_FRACTION: f64 = 0.01;
/// Arms shorter than this fraction of `h` skip their own node in the
/// one-sided difference.
const SHORT_ARM: f64 = 0.5;

/// Discrete solution of `−Δu = c` with Dirichlet data on a [`MaskedGrid`].
#[derive(Clone)]
pub struct TorsionField {
    grid: Arc<MaskedGrid>,
    values: Vec<f64>,
    residual_norm: f64,
    iterations: usize,
    method: LinearMethod,
    rhs_constant: f64,
    boundary: Option<BoundaryData>,
}

impl fmt::Debug for TorsionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorsionField")
            .field("nodes", &self.values.len())
            .field("h", &self.grid.h())
            .field("residual_norm", &self.residual_norm)
            .field("iterations", &self.iterations)
            .field("method", &self.method)
            .field("rhs_constant", &self.rhs_constant)
            .finish()
    }
}

/// Outward normal derivative estimated where a stencil arm meets the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: Point,
    pub arclength: f64,
    pub edge: usize,
    /// Signed `∂u/∂ν`; negative for the torsion function.
    pub dudn: f64,
    /// Within the exclusion zone of a vertex.
    pub near_corner: bool,
}

#[derive(Debug, Clone, Default)]
pub struct BoundaryScan {
    pub samples: Vec<BoundarySample>,
    /// Candidate arms away from vertices whose second interior node was missing.
    pub skipped: usize,
    pub candidates: usize,
}

fn solve_with(
    grid: Arc<MaskedGrid>,
    source: f64,
    boundary: Option<BoundaryData>,
    tol: f64,
    initial: Option<Vec<f64>>,
) -> Result<TorsionField> {
    if !(tol > 0.0) {
        return Err(HhError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let zero = |_: Point| 0.0;
    let data: &dyn Fn(Point) -> f64 = match &boundary {
        Some(b) => b.as_ref(),
        None => &zero,
    };
    let system = linear::assemble(&grid, source, data);
    let mut values = match initial {
        Some(v) if v.len() == grid.len() => v,
        _ => vec![0.0; grid.len()],
    };
    let stats = linear::solve(&system, &grid, &mut values, tol)?;
    debug!(
        "solved {} unknowns at h={:e}: {:?} in {} iterations, residual {:e}",
        grid.len(),
        grid.h(),
        stats.method,
        stats.iterations,
        stats.residual
    );
    Ok(TorsionField {
        grid,
        values,
        residual_norm: stats.residual,
        iterations: stats.iterations,
        method: stats.method,
        rhs_constant: source,
        boundary,
    })
}

/// Solves `−Δu = 1`, `u = 0` on the boundary to relative residual `tol`.
pub fn solve_torsion(grid: impl Into<Arc<MaskedGrid>>, tol: f64) -> Result<TorsionField> {
    solve_with(grid.into(), 1.0, None, tol, None)
}

pub(crate) fn solve_torsion_from(grid: Arc<MaskedGrid>, tol: f64, initial: Vec<f64>) -> Result<TorsionField> {
    solve_with(grid, 1.0, None, tol, Some(initial))
}

/// Solves `Δf = 0` with `f = data` sampled where stencil arms cross the boundary.
pub fn solve_harmonic(grid: impl Into<Arc<MaskedGrid>>, data: BoundaryData, tol: f64) -> Result<TorsionField> {
    solve_with(grid.into(), 0.0, Some(data), tol, None)
}

impl TorsionField {
    pub fn grid(&self) -> &MaskedGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<MaskedGrid> {
        Arc::clone(&self.grid)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn method(&self) -> LinearMethod {
        self.method
    }

    pub fn rhs_constant(&self) -> f64 {
        self.rhs_constant
    }

    pub fn boundary_value(&self, x: Point) -> f64 {
        self.boundary.as_ref().map_or(0.0, |b| b(x))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn value_at(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.grid.nx() || j >= self.grid.ny() {
            return None;
        }
        self.grid.index_of(i, j).map(|k| self.values[k])
    }

    /// Maximum value and its location, refined by a local quadratic fit on
    /// the 3×3 neighborhood of the maximal node.
    pub fn u_max(&self) -> (f64, Point) {
        let (k, &u0) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("grid has at least one node");
        let x0 = self.grid.node_position(k);
        self.refine_max(k, u0).unwrap_or((u0, x0))
    }

    fn refine_max(&self, k: usize, u0: f64) -> Option<(f64, Point)> {
        let g = &self.grid;
        let (i, j) = g.node_ij(k);
        if i == 0 || j == 0 || i + 1 >= g.nx() || j + 1 >= g.ny() {
            return None;
        }
        let v = |di: isize, dj: isize| self.value_at((i as isize + di) as usize, (j as isize + dj) as usize);
        let (ue, uw, un, us) = (v(1, 0)?, v(-1, 0)?, v(0, 1)?, v(0, -1)?);
        let (une, unw, use_, usw) = (v(1, 1)?, v(-1, 1)?, v(1, -1)?, v(-1, -1)?);
        let h = g.h();
        let gx = (ue - uw) / (2.0 * h);
        let gy = (un - us) / (2.0 * h);
        let hxx = (ue - 2.0 * u0 + uw) / (h * h);
        let hyy = (un - 2.0 * u0 + us) / (h * h);
        let hxy = (une - unw - use_ + usw) / (4.0 * h * h);
        let det = hxx * hyy - hxy * hxy;
        if !(hxx < 0.0 && det > 0.0) {
            return None;
        }
        let dx = -(hyy * gx - hxy * gy) / det;
        let dy = -(-hxy * gx + hxx * gy) / det;
        if dx.abs() > h || dy.abs() > h {
            return None;
        }
        let u = u0 + 0.5 * (gx * dx + gy * dy);
        Some((u.max(u0), g.node_position(k) + Point::new(dx, dy)))
    }

    /// One-sided second-order normal derivatives at every usable arm
    /// crossing. Assumes boundary data constant along each edge (zero for
    /// the torsion function), so the tangential part vanishes.
    pub fn scan_boundary(&self) -> BoundaryScan {
        let g = &self.grid;
        let p = g.polygon();
        let h = g.h();
        let n = p.len();
        // Near any vertex |∇u| ~ ρ^{π/β − 1}, which one-sided differences
        // cannot resolve. An acute wedge is only 2ρ sin(β/2) wide, so the
        // zone grows with 1/sin(β/2). Flat vertices keep part of each short edge.
        let zones: Vec<(Point, f64)> = (0..n)
            .map(|i| {
                let beta = p.interior_angle(i);
                let mut radius = CORNER_EXCLUSION * h / (0.5 * beta).sin();
                if beta >= SHARP_VERTEX_FRACTION * std::f64::consts::PI {
                    let shortest = p.edge_length(i).min(p.edge_length((i + n - 1) % n));
                    radius = radius.min(FLAT_VERTEX_EDGE_FRACTION * shortest);
                }
                (p.vertices()[i], radius)
            })
            .collect();
        let mut scan = BoundaryScan::default();
        for k in 0..g.len() {
            if !g.is_boundary_adjacent(k) {
                continue;
            }
            for d in 0..4 {
                let arm = g.arm(k, d);
                let Some(edge) = arm.edge else { continue };
                let e = DIRECTIONS[d];
                let cosine = e.dot(p.outward_normal(edge));
                if cosine < MIN_NORMAL_COSINE {
                    continue;
                }
                scan.candidates += 1;
                let b = g.arm_endpoint(k, d);
                let near_corner = zones.iter().any(|(v, rad)| v.dist(b) < *rad);
                let Some(k2) = g.arm(k, opposite(d)).neighbor else {
                    // Corner samples never enter the maximum, so losing one is harmless.
                    if !near_corner {
                        scan.skipped += 1;
                    }
                    continue;
                };
                let s1 = arm.theta * h;
                // A node very close to the boundary amplifies its own error by
                // h/s1, so short arms step one node further in when possible.
                let deeper = (arm.theta < SHORT_ARM)
                    .then(|| g.arm(k2, opposite(d)).neighbor)
                    .flatten();
                let (a, ua, ub) = match deeper {
                    Some(k3) => (s1 + h, self.values[k2], self.values[k3]),
                    None => (s1, self.values[k], self.values[k2]),
                };
                let inward = one_sided_derivative(self.boundary_value(b), ua, ub, a, a + h);
                scan.samples.push(BoundarySample {
                    point: b,
                    arclength: p.arclength_of(b),
                    edge,
                    dudn: -inward / cosine,
                    near_corner,
                });
            }
        }
        scan
    }

    /// Largest `|∂u/∂ν|` over boundary samples away from vertices.
    pub fn grad_max(&self) -> Result<(f64, Point)> {
        let scan = self.scan_boundary();
        if scan.skipped as f64 > MAX_SKIPPED_FRACTION * scan.candidates as f64 {
            return Err(HhError::StencilFailure {
                skipped: scan.skipped,
                total: scan.candidates,
            });
        }
        if scan.skipped > 0 {
            debug!("{} of {} boundary stencils skipped", scan.skipped, scan.candidates);
        }
        let best = |corners: bool| {
            scan.samples
                .iter()
                .filter(|s| corners || !s.near_corner)
                .map(|s| (s.dudn.abs(), s.point))
                .max_by(|a, b| a.0.total_cmp(&b.0))
        };
        // Polygons with many short edges can have every sample inside some
        // vertex zone on coarse grids.
        best(false)
            .or_else(|| {
                debug!("all boundary samples lie near vertices; using all of them");
                best(true)
            })
            .ok_or(HhError::StencilFailure {
                skipped: scan.skipped,
                total: scan.candidates,
            })
    }

    /// Largest central-difference gradient over nodes with four interior neighbors.
    pub fn interior_grad_max(&self) -> f64 {
        let g = &self.grid;
        let h = g.h();
        let mut best: f64 = 0.0;
        for k in 0..g.len() {
            let a = g.arms(k);
            let (Some(e), Some(w), Some(n), Some(s)) =
                (a[EAST].neighbor, a[WEST].neighbor, a[NORTH].neighbor, a[SOUTH].neighbor)
            else {
                continue;
            };
            let gx = (self.values[e] - self.values[w]) / (2.0 * h);
            let gy = (self.values[n] - self.values[s]) / (2.0 * h);
            best = best.max(gx.hypot(gy));
        }
        best
    }

    /// `∫_Ω u` from the piecewise interpolant: bilinear on full cells,
    /// linear on the clipped pieces of cut cells.
    pub fn integrate(&self) -> f64 {
        let g = &self.grid;
        let p = g.polygon();
        let h = g.h();
        // Cells must cover the whole bounding box, including a last partial strip.
        let (lo, hi) = p.bounding_box();
        let cells_x = ((hi.x - lo.x) / h - 1e-9).ceil() as usize;
        let cells_y = ((hi.y - lo.y) / h - 1e-9).ceil() as usize;
        let mut total = 0.0;
        for j in 0..cells_y {
            let y0 = g.origin().y + j as f64 * h;
            let Some((xlo, xhi)) = g.band_extent(y0, y0 + h) else {
                continue;
            };
            for i in 0..cells_x {
                let x0 = g.origin().x + i as f64 * h;
                if x0 + h < xlo || x0 > xhi {
                    continue;
                }
                let ij = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let vals = ij.map(|(a, b)| self.value_at(a, b));
                if vals.iter().all(Option::is_some) {
                    total += h * h * vals.iter().map(|v| v.unwrap()).sum::<f64>() / 4.0;
                    continue;
                }
                let mut poly: Vec<(Point, Option<f64>)> =
                    ij.iter().zip(vals).map(|(&(a, b), v)| (g.lattice_point(a, b), v)).collect();
                for q in 0..p.len() {
                    poly = clip(&poly, |x| p.edge_distance(q, x));
                    if poly.len() < 3 {
                        break;
                    }
                }
                if poly.len() < 3 {
                    continue;
                }
                let val = |(x, v): (Point, Option<f64>)| v.unwrap_or_else(|| self.boundary_value(x));
                let v0 = val(poly[0]);
                for w in poly[1..].windows(2) {
                    let area = 0.5 * (w[0].0 - poly[0].0).cross(w[1].0 - poly[0].0);
                    total += area * (v0 + val(w[0]) + val(w[1])) / 3.0;
                }
            }
        }
        total
    }

    /// Writes `x,y,u` for every interior node.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y", "u"])?;
        for (k, v) in self.values.iter().enumerate() {
            let x = self.grid.node_position(k);
            w.write_record([format_f64(x.x), format_f64(x.y), format_f64(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `s,x,y,dudn` for every boundary sample, sorted by arclength.
    pub fn write_gradient_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut samples = self.scan_boundary().samples;
        samples.sort_by(|a, b| a.arclength.total_cmp(&b.arclength));
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["s", "x", "y", "dudn"])?;
        for s in samples {
            w.write_record([
                format_f64(s.arclength),
                format_f64(s.point.x),
                format_f64(s.point.y),
                format_f64(s.dudn),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Derivative at 0 of the quadratic through `(0, u0)`, `(a, ua)`, `(b, ub)`.
fn one_sided_derivative(u0: f64, ua: f64, ub: f64, a: f64, b: f64) -> f64 {
    -u0 * (a + b) / (a * b) + ua * b / (a * (b - a)) - ub * a / (b * (b - a))
}

/// Sutherland–Hodgman step against `{x : dist(x) ≥ 0}`. Vertices created by
/// the cut carry no grid value.
fn clip<F: Fn(Point) -> f64>(poly: &[(Point, Option<f64>)], dist: F) -> Vec<(Point, Option<f64>)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (dc, dn) = (dist(cur.0), dist(next.0));
        if dc >= 0.0 {
            out.push(cur);
        }
        if (dc >= 0.0) != (dn >= 0.0) {
            let t = dc / (dc - dn);
            out.push((cur.0.lerp(next.0, t), None));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::RectangleTorsion;
    use crate::geometry::{area, simplex_family, ConvexPolygon};

    #[test]
    fn one_sided_derivative_is_exact_on_quadratics() {
        let q = |s: f64| 0.3 - 1.7 * s + 0.9 * s * s;
        for (a, b) in [(0.01, 1.01), (0.5, 1.5), (1.2, 2.2)] {
            assert!((one_sided_derivative(q(0.0), q(a), q(b), a, b) + 1.7).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_source_and_data_gives_zero() {
        let g = MaskedGrid::build(&ConvexPolygon::unit_square(), 1.0 / 16.0).unwrap();
        let f = solve_with(Arc::new(g), 0.0, None, 1e-10, None).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_data_is_reproduced() {
        let p = ConvexPolygon::regular(7, 1.0).unwrap();
        let g = MaskedGrid::build(&p, 1.0 / 32.0).unwrap();
        let f = solve_harmonic(g, Arc::new(|_| 1.0), 1e-12).unwrap();
        for v in f.values() {
            assert!((v - 1.0).abs() < 1e-8, "{v}");
        }
        assert!((f.integrate() - area(&p)).abs() < 1e-9);
    }

    #[test]
    fn affine_data_is_reproduced() {
        let p = ConvexPolygon::unit_square();
        let g = MaskedGrid::build(&p, 1.0 / 32.0).unwrap();
        let f = solve_harmonic(g, Arc::new(|x: Point| x.x), 1e-12).unwrap();
        for (k, v) in f.values().iter().enumerate() {
            assert!((v - f.grid().node_position(k).x).abs() < 1e-9);
        }
        assert!((f.integrate() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn torsion_is_positive_and_bounded_by_data() {
        let p = simplex_family(8.0).unwrap();
        let g = MaskedGrid::build(&p, 1.0 / 64.0).unwrap();
        let f = solve_torsion(g, 1e-10).unwrap();
        assert!(f.min_value() > 0.0);
        assert!(f.residual_norm() <= 1e-9);
    }

    #[test]
    fn square_center_and_gradient_match_series() {
        let p = ConvexPolygon::unit_square();
        let g = MaskedGrid::build(&p, 1.0 / 128.0).unwrap();
        let f = solve_torsion(g, 1e-12).unwrap();
        let exact = RectangleTorsion::new(0.5, 0.5).unwrap();
        let (u, loc) = f.u_max();
        assert!((u - exact.umax()).abs() < 2e-5, "{u}");
        assert!(loc.dist(Point::new(0.5, 0.5)) < 1e-9);
        let (gm, at) = f.grad_max().unwrap();
        assert!((gm - exact.grad_max()).abs() < 0.01 * exact.grad_max(), "{gm}");
        assert!(p.boundary_distance(at).abs() < 1e-12);
    }

    #[test]
    fn disk_values() {
        let p = ConvexPolygon::regular(256, 1.0).unwrap();
        let g = MaskedGrid::build(&p, 1.0 / 64.0).unwrap();
        let f = solve_torsion(g, 1e-11).unwrap();
        let (u, loc) = f.u_max();
        assert!((u - 0.25).abs() < 1e-3, "{u}");
        assert!(loc.norm() < 1.0 / 64.0);
        let (gm, _) = f.grad_max().unwrap();
        assert!((gm - 0.5).abs() < 5e-3, "{gm}");
        assert!(f.interior_grad_max() <= gm);
        // ∫ (1 - |x|²)/4 over the unit disk is π/8.
        assert!((f.integrate() - std::f64::consts::PI / 8.0).abs() < 1e-3);
    }
}
