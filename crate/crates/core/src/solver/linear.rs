//! Shortley–Weller assembly and the sparse solvers used on it.
//!
//! The system is stored row-wise with at most four off-diagonal entries per
//! row. Rows are scaled by `h²`, so `A u = b` reads
//! `diag_k u_k − Σ_d coef_kd u_{nbr_kd} = b_k`.

use log::debug;

use super::grid::{MaskedGrid, EAST, NORTH, SOUTH, WEST};
use super::multigrid::Multigrid;
use crate::error::{HhError, Result};
use crate::geometry::Point;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub(crate) struct System {
    pub diag: Vec<f64>,
    pub coef: Vec<[f64; 4]>,
    pub nbr: Vec<[u32; 4]>,
    pub rhs: Vec<f64>,
}

/// Which iteration produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearMethod {
    Trivial,
    IluBicgstab,
    MultigridBicgstab,
    Sor,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub method: LinearMethod,
}

pub(crate) fn assemble(grid: &MaskedGrid, source: f64, boundary: &dyn Fn(Point) -> f64) -> System {
    let n = grid.len();
    let h2 = grid.h() * grid.h();
    let mut diag = Vec::with_capacity(n);
    let mut coef = Vec::with_capacity(n);
    let mut nbr = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for k in 0..n {
        let arms = grid.arms(k);
        let (te, tw) = (arms[EAST].theta, arms[WEST].theta);
        let (tn, ts) = (arms[NORTH].theta, arms[SOUTH].theta);
        let c = [
            2.0 / (te * (te + tw)),
            2.0 / (tw * (te + tw)),
            2.0 / (tn * (tn + ts)),
            2.0 / (ts * (tn + ts)),
        ];
        let mut b = h2 * source;
        let mut row_c = [0.0; 4];
        let mut row_n = [NONE; 4];
        for d in 0..4 {
            match arms[d].neighbor {
                Some(j) => {
                    row_c[d] = c[d];
                    row_n[d] = j as u32;
                }
                None => {
                    let g = boundary(grid.arm_endpoint(k, d));
                    if g != 0.0 {
                        b += c[d] * g;
                    }
                }
            }
        }
        diag.push(2.0 / (te * tw) + 2.0 / (tn * ts));
        coef.push(row_c);
        nbr.push(row_n);
        rhs.push(b);
    }
    System { diag, coef, nbr, rhs }
}

impl System {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for k in 0..self.len() {
            let mut s = self.diag[k] * x[k];
            let (c, nb) = (&self.coef[k], &self.nbr[k]);
            for d in 0..4 {
                if nb[d] != NONE {
                    s -= c[d] * x[nb[d] as usize];
                }
            }
            y[k] = s;
        }
    }

}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// ILU(0) factor of the five-point matrix. Unknowns are numbered row by row,
/// so west/south neighbors precede a node and east/north ones follow it.
pub(crate) struct Ilu0 {
    d: Vec<f64>,
}

impl Ilu0 {
    fn new(a: &System) -> Self {
        let mut d = a.diag.clone();
        for k in 0..a.len() {
            let mut v = a.diag[k];
            for (dir, back) in [(WEST, EAST), (SOUTH, NORTH)] {
                let j = a.nbr[k][dir];
                if j != NONE {
                    let j = j as usize;
                    v -= a.coef[k][dir] * a.coef[j][back] / d[j];
                }
            }
            d[k] = v;
        }
        Ilu0 { d }
    }

    fn solve(&self, a: &System, r: &[f64], z: &mut [f64]) {
        let n = a.len();
        for k in 0..n {
            let mut v = r[k];
            for dir in [WEST, SOUTH] {
                let j = a.nbr[k][dir];
                if j != NONE {
                    v += a.coef[k][dir] * z[j as usize];
                }
            }
            z[k] = v / self.d[k];
        }
        for k in (0..n).rev() {
            let mut v = 0.0;
            for dir in [EAST, NORTH] {
                let j = a.nbr[k][dir];
                if j != NONE {
                    v += a.coef[k][dir] * z[j as usize];
                }
            }
            z[k] += v / self.d[k];
        }
    }
}

pub(crate) enum Preconditioner {
    Ilu(Ilu0),
    Multigrid(Multigrid),
}

impl Preconditioner {
    pub fn new(a: &System, grid: &MaskedGrid) -> Self {
        match Multigrid::new(grid) {
            Some(mg) => Preconditioner::Multigrid(mg),
            None => Preconditioner::Ilu(Ilu0::new(a)),
        }
    }

    fn solve(&self, a: &System, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Ilu(m) => m.solve(a, r, z),
            Preconditioner::Multigrid(m) => m.apply(a, r, z),
        }
    }

    fn method(&self) -> LinearMethod {
        match self {
            Preconditioner::Ilu(_) => LinearMethod::IluBicgstab,
            Preconditioner::Multigrid(_) => LinearMethod::MultigridBicgstab,
        }
    }
}

/// Preconditioned BiCGSTAB. Returns `None` on breakdown or stagnation.
fn bicgstab(a: &System, m: &Preconditioner, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Option<usize> {
    let n = a.len();
    let bnorm = norm(b);
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    if norm(&r) <= tol * bnorm {
        return Some(0);
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return None;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        m.solve(a, &p, &mut y);
        a.apply(&y, &mut v);
        let denom = dot(&r0, &v);
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        alpha = rho / denom;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) <= tol * bnorm {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            return Some(it);
        }
        m.solve(a, &s, &mut z);
        a.apply(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return None;
        }
        omega = dot(&t, &s) / tt;
        for k in 0..n {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        let rn = norm(&r);
        if !rn.is_finite() {
            return None;
        }
        if rn <= tol * bnorm {
            return Some(it);
        }
    }
    None
}

/// Successive over-relaxation with the model-problem optimal factor.
fn sor(a: &System, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize, extent: usize) -> (usize, f64) {
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / extent.max(2) as f64).sin());
    let bnorm = norm(&b);
    let mut res = f64::INFINITY;
    for it in 1..=max_iter {
        for k in 0..a.len() {
            let mut s = b[k];
            for d in 0..4 {
                let j = a.nbr[k][d];
                if j != NONE {
                    s += a.coef[k][d] * x[j as usize];
                }
            }
            x[k] += omega * (s / a.diag[k] - x[k]);
        }
        if it % 25 == 0 || it == max_iter {
            let mut r = vec![0.0; a.len()];
            a.residual_into(b, x, &mut r);
            res = norm(&r) / bnorm;
            if res <= tol {
                return (it, res);
            }
        }
    }
    (max_iter, res)
}

/// Error-free `a·b = p + e`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl System {
    /// `ε ‖ |A| |x| ‖`: residual left by rounding `x` to working precision.
    fn rounding_floor(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.len() {
            let mut v = self.diag[k] * x[k].abs();
            for d in 0..4 {
                let j = self.nbr[k][d];
                if j != NONE {
                    v += self.coef[k][d] * x[j as usize].abs();
                }
            }
            acc += v * v;
        }
        0.5 * f64::EPSILON * acc.sqrt()
    }

    /// `b − A x` evaluated in compensated arithmetic, so the result is
    /// accurate even when it is far below `ε‖A‖‖x‖`.
    fn residual_into(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        for k in 0..self.len() {
            let (mut s, mut c) = (b[k], 0.0);
            let (p, e) = two_prod(-self.diag[k], x[k]);
            let (t, e2) = two_sum(s, p);
            s = t;
            c += e + e2;
            for d in 0..4 {
                let j = self.nbr[k][d];
                if j != NONE {
                    let (p, e) = two_prod(self.coef[k][d], x[j as usize]);
                    let (t, e2) = two_sum(s, p);
                    s = t;
                    c += e + e2;
                }
            }
            r[k] = s + c;
        }
    }
}

/// Relative reduction asked of each inner solve.
const INNER_TOL: f64 = 1e-7;
const MAX_REFINEMENTS: usize = 8;
/// Stagnation within this factor of the rounding floor counts as converged.
const FLOOR_FACTOR: f64 = 8.0;

fn inner_solve(a: &System, m: &Preconditioner, r: &[f64], d: &mut [f64], extent: usize) -> Option<(usize, LinearMethod)> {
    d.iter_mut().for_each(|v| *v = 0.0);
    let cap = 50 * extent;
    if let Some(it) = bicgstab(a, m, r, d, INNER_TOL, cap) {
        return Some((it, m.method()));
    }
    debug!("bicgstab failed, falling back to SOR");
    d.iter_mut().for_each(|v| *v = 0.0);
    let (it, res) = sor(a, r, d, INNER_TOL, cap, extent);
    (res <= 0.5).then_some((it, LinearMethod::Sor))
}

/// Solves `A x = b` to relative residual `tol`, starting from `x`, by
/// iterative refinement around inner Krylov solves.
pub(crate) fn solve(a: &System, grid: &MaskedGrid, x: &mut [f64], tol: f64) -> Result<SolveStats> {
    let extent = grid.nx() + grid.ny();
    let bnorm = norm(&a.rhs);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
            method: LinearMethod::Trivial,
        });
    }
    let n = a.len();
    let mut r = vec![0.0; n];
    let mut d = vec![0.0; n];
    let precond = Preconditioner::new(a, grid);
    let mut iterations = 0;
    let mut method = precond.method();
    a.residual_into(&a.rhs, x, &mut r);
    let mut residual = norm(&r) / bnorm;
    for _ in 0..MAX_REFINEMENTS {
        if residual <= tol {
            return Ok(SolveStats {
                iterations,
                residual,
                method,
            });
        }
        let Some((it, m)) = inner_solve(a, &precond, &r, &mut d, extent) else {
            break;
        };
        iterations += it;
        if m == LinearMethod::Sor {
            method = m;
        }
        for k in 0..n {
            x[k] += d[k];
        }
        a.residual_into(&a.rhs, x, &mut r);
        let next = norm(&r) / bnorm;
        if !(next < 0.5 * residual) {
            residual = next;
            break;
        }
        residual = next;
    }
    // Even the correctly rounded solution leaves a residual of about
    // ε‖|A||x|‖, which on fine grids can exceed a tight `tol`.
    let floor = a.rounding_floor(x) / bnorm;
    if residual <= tol.max(FLOOR_FACTOR * floor) {
        if residual > tol {
            debug!("residual {residual:e} stopped at the rounding floor {floor:e}");
        }
        Ok(SolveStats {
            iterations,
            residual,
            method,
        })
    } else {
        Err(HhError::NotConverged { iterations, residual })
    }
}
