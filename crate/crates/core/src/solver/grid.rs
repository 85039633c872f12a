use std::collections::VecDeque;

use crate::error::{HhError, Result};
use crate::geometry::{inradius_incenter, ConvexPolygon, Point};

pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

/// Unit vectors of the four stencil arms, indexed by [`EAST`] .. [`SOUTH`].
pub const DIRECTIONS: [Point; 4] = [
    Point::new(1.0, 0.0),
    Point::new(-1.0, 0.0),
    Point::new(0.0, 1.0),
    Point::new(0.0, -1.0),
];

pub const fn opposite(dir: usize) -> usize {
    dir ^ 1
}

/// Nodes closer than this fraction of `h` to the boundary are treated as
/// boundary nodes, which keeps every arm fraction away from zero.
pub const INTERIOR_MARGIN: f64 = 1e-6;

const NONE: u32 = u32::MAX;

/// One arm of the five-point stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    /// Arm length as a fraction of `h`, in `(0, 1]`.
    pub theta: f64,
    /// Unknown index of the neighbor, when it is interior.
    pub neighbor: Option<usize>,
    /// Polygon edge hit by the arm, when the neighbor is not interior.
    pub edge: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct PackedArm {
    theta: f64,
    neighbor: u32,
    edge: u32,
}

/// Axis-aligned lattice over a convex polygon with Shortley–Weller arm
/// fractions at every interior node.
#[derive(Debug, Clone)]
pub struct MaskedGrid {
    polygon: ConvexPolygon,
    h: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    node_index: Vec<u32>,
    nodes: Vec<(u32, u32)>,
    arms: Vec<[PackedArm; 4]>,
}

/// Interval of `x` on the horizontal line `y` where every edge distance
/// exceeds `margin`.
fn row_interval(p: &ConvexPolygon, y: f64, margin: f64) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..p.len() {
        let n = p.outward_normal(i);
        let (a, _) = p.edge(i);
        // (a - x)·n > margin  <=>  n.x * x < a·n - n.y * y - margin
        let c = a.dot(n) - n.y * y - margin;
        if n.x > 1e-15 {
            hi = hi.min(c / n.x);
        } else if n.x < -1e-15 {
            lo = lo.max(c / n.x);
        } else if c <= 0.0 {
            return None;
        }
    }
    (lo < hi).then_some((lo, hi))
}

impl MaskedGrid {
    /// Builds the grid. `h` must resolve the inscribed disk: `h <= r(Ω)/4`.
    pub fn build(p: &ConvexPolygon, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(HhError::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        let (r, _) = inradius_incenter(p)?;
        let suggested = r / 4.0;
        if h > suggested * (1.0 + 1e-12) {
            return Err(HhError::GridTooCoarse {
                h,
                suggested,
                reason: "fewer than 8 nodes across the inscribed disk",
            });
        }

        let grid = Self::build_unchecked(p, h)?;
        if !grid.is_connected() {
            return Err(HhError::GridTooCoarse {
                h,
                suggested,
                reason: "interior nodes are not edge-connected",
            });
        }
        Ok(grid)
    }

    /// Grid without the resolution and connectivity checks, used for
    /// multigrid coarse levels.
    pub(crate) fn build_unchecked(p: &ConvexPolygon, h: f64) -> Result<Self> {
        let suggested = h / 2.0;
        let (lo, hi) = p.bounding_box();
        let nx = ((hi.x - lo.x) / h + 1e-9).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / h + 1e-9).floor() as usize + 1;
        if nx.saturating_mul(ny) >= NONE as usize {
            return Err(HhError::InvalidArgument(format!("grid of {nx} x {ny} nodes is too large")));
        }
        let margin = INTERIOR_MARGIN * h;

        let mut node_index = vec![NONE; nx * ny];
        let mut nodes = Vec::new();
        for j in 0..ny {
            let y = lo.y + j as f64 * h;
            let Some((xl, xr)) = row_interval(p, y, margin) else {
                continue;
            };
            let i0 = (((xl - lo.x) / h).floor().max(0.0)) as usize;
            let i1 = (((xr - lo.x) / h).ceil() as usize).min(nx - 1);
            for i in i0..=i1 {
                let x = lo.x + i as f64 * h;
                if x > xl && x < xr {
                    node_index[j * nx + i] = nodes.len() as u32;
                    nodes.push((i as u32, j as u32));
                }
            }
        }
        if nodes.is_empty() {
            return Err(HhError::GridTooCoarse {
                h,
                suggested,
                reason: "no interior nodes",
            });
        }

        let mut grid = MaskedGrid {
            polygon: p.clone(),
            h,
            origin: lo,
            nx,
            ny,
            node_index,
            nodes,
            arms: Vec::new(),
        };
        grid.arms = (0..grid.nodes.len()).map(|k| grid.compute_arms(k)).collect();
        Ok(grid)
    }

    fn compute_arms(&self, k: usize) -> [PackedArm; 4] {
        let (i, j) = self.nodes[k];
        let (i, j) = (i as i64, j as i64);
        let x = self.node_position(k);
        let offsets = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        let mut out = [PackedArm {
            theta: 1.0,
            neighbor: NONE,
            edge: NONE,
        }; 4];
        for (d, (di, dj)) in offsets.into_iter().enumerate() {
            if let Some(nb) = self.index_of_signed(i + di, j + dj) {
                out[d].neighbor = nb as u32;
                continue;
            }
            let e = DIRECTIONS[d];
            let mut best = (f64::INFINITY, NONE);
            for q in 0..self.polygon.len() {
                let c = self.polygon.outward_normal(q).dot(e);
                if c > 1e-15 {
                    let t = self.polygon.edge_distance(q, x) / c;
                    if t < best.0 {
                        best = (t, q as u32);
                    }
                }
            }
            out[d].theta = (best.0 / self.h).min(1.0);
            out[d].edge = best.1;
        }
        out
    }

    fn index_of_signed(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            return None;
        }
        self.index_of(i as usize, j as usize)
    }

    fn is_connected(&self) -> bool {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for a in &self.arms[k] {
                if a.neighbor != NONE && !seen[a.neighbor as usize] {
                    seen[a.neighbor as usize] = true;
                    count += 1;
                    queue.push_back(a.neighbor as usize);
                }
            }
        }
        count == n
    }

    pub fn polygon(&self) -> &ConvexPolygon {
        &self.polygon
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Number of interior nodes (unknowns).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let v = self.node_index[j * self.nx + i];
        (v != NONE).then_some(v as usize)
    }

    pub fn node_ij(&self, k: usize) -> (usize, usize) {
        let (i, j) = self.nodes[k];
        (i as usize, j as usize)
    }

    pub fn lattice_point(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    pub fn node_position(&self, k: usize) -> Point {
        let (i, j) = self.node_ij(k);
        self.lattice_point(i, j)
    }

    pub fn arm(&self, k: usize, dir: usize) -> Arm {
        let a = self.arms[k][dir];
        Arm {
            theta: a.theta,
            neighbor: (a.neighbor != NONE).then_some(a.neighbor as usize),
            edge: (a.edge != NONE).then_some(a.edge as usize),
        }
    }

    pub fn arms(&self, k: usize) -> [Arm; 4] {
        [0, 1, 2, 3].map(|d| self.arm(k, d))
    }

    /// Boundary point reached by a non-interior arm.
    pub fn arm_endpoint(&self, k: usize, dir: usize) -> Point {
        self.node_position(k) + DIRECTIONS[dir] * (self.arms[k][dir].theta * self.h)
    }

    /// Whether any arm of node `k` ends on the boundary.
    pub fn is_boundary_adjacent(&self, k: usize) -> bool {
        self.arms[k].iter().any(|a| a.neighbor == NONE)
    }

    /// x-range of the polygon over the horizontal band `[y0, y1]`.
    pub(crate) fn band_extent(&self, y0: f64, y1: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for y in [y0, y1] {
            if let Some((a, b)) = row_interval(&self.polygon, y, 0.0) {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        for v in self.polygon.vertices() {
            if v.y >= y0 && v.y <= y1 {
                lo = lo.min(v.x);
                hi = hi.max(v.x);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// Free-function form of [`MaskedGrid::build`].
pub fn build_grid(p: &ConvexPolygon, h: f64) -> Result<MaskedGrid> {
    MaskedGrid::build(p, h)
}
