//! Shortley–Weller finite differences for Dirichlet Poisson problems on
//! convex polygons, with Richardson extrapolation over grid levels.

mod field;
mod grid;
mod linear;
mod multigrid;

use std::sync::Arc;

use log::debug;
use serde::{Deserialize, Serialize};

pub use field::{solve_harmonic, solve_torsion, BoundaryData, BoundarySample, BoundaryScan, TorsionField};
pub use grid::{build_grid, opposite, Arm, MaskedGrid, DIRECTIONS, EAST, INTERIOR_MARGIN, NORTH, SOUTH, WEST};
pub use linear::LinearMethod;

pub use crate::quadrature::{integrate_boundary, integrate_domain};

use crate::error::{HhError, Result};
use crate::geometry::{inradius_incenter, ConvexPolygon, Point};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_LEVELS: usize = 3;
/// The coarsest spacing never exceeds `r(Ω) / CELLS_PER_INRADIUS`.
pub const CELLS_PER_INRADIUS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Requested coarsest spacing; capped at `r(Ω)/12`.
    pub h0: f64,
    pub levels: usize,
    /// Relative residual tolerance of every linear solve.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h0: 1.0 / 64.0,
            levels: DEFAULT_LEVELS,
            tol: DEFAULT_TOL,
        }
    }
}

impl SolverConfig {
    pub fn new(h0: f64, levels: usize) -> Self {
        SolverConfig {
            h0,
            levels,
            ..Default::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0) || !self.h0.is_finite() {
            return Err(HhError::InvalidArgument(format!("h0 must be positive, got {}", self.h0)));
        }
        if self.levels < 2 {
            return Err(HhError::InvalidArgument(format!(
                "at least 2 levels are needed for extrapolation, got {}",
                self.levels
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(HhError::InvalidArgument(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        Ok(())
    }

    /// Coarsest spacing actually used on `p`.
    pub fn effective_h0(&self, p: &ConvexPolygon) -> Result<f64> {
        let (r, _) = inradius_incenter(p)?;
        Ok(self.h0.min(r / CELLS_PER_INRADIUS))
    }
}

/// Raw values measured on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub h: f64,
    pub unknowns: usize,
    pub iterations: usize,
    pub method: LinearMethod,
    pub residual: f64,
    pub u_max: f64,
    pub grad_max: f64,
    pub interior_grad_max: f64,
}

/// Extrapolated maxima of the torsion function and of its gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionSummary {
    pub u_max: f64,
    pub u_max_location: Point,
    pub grad_max: f64,
    pub grad_max_location: Point,
    pub h_finest: f64,
    pub error_estimate_umax: f64,
    pub error_estimate_gradmax: f64,
    /// Observed convergence order of `u_max`, when measurable.
    pub observed_order: Option<f64>,
    pub observed_order_grad: Option<f64>,
    pub trusted: bool,
    pub notes: Vec<String>,
    pub levels: Vec<LevelResult>,
}

impl TorsionSummary {
    pub fn ensure_trusted(&self) -> Result<()> {
        if self.trusted {
            Ok(())
        } else {
            Err(HhError::Untrusted(self.notes.join("; ")))
        }
    }
}

pub(crate) struct Extrapolated {
    pub value: f64,
    pub error: f64,
    pub order: Option<f64>,
    pub monotone: bool,
    /// Non-monotone, but every difference is below the oscillation tolerance.
    pub settled: bool,
}

/// Relative size below which an oscillating level sequence counts as
/// converged. Shortley–Weller errors on oblique edges are not smooth in `h`,
/// so sequences wobble at this level once the leading error is gone.
pub const OSCILLATION_TOL: f64 = 1e-4;

/// Same for `grad_max`, which is sampled on the boundary. When the edges are
/// no longer than a few cells (fine polygonal disks) the vertex zones cover
/// most of every edge and the sampled maximum wobbles far above the `u_max`
/// level. The whole spread is reported as the error.
pub const GRAD_OSCILLATION_TOL: f64 = 5e-3;

/// Differences at or below this size are indistinguishable from solver noise.
fn noise_floor(v: f64, tol: f64) -> f64 {
    100.0 * tol * v.abs() + 1e-15
}

/// Richardson extrapolation of a sequence measured at `h, h/2, h/4, …`.
/// With `fixed_order = None` the observed order is used, clamped to `[1, 3]`.
pub(crate) fn extrapolate(values: &[f64], fixed_order: Option<f64>, tol: f64, oscillation_tol: f64) -> Extrapolated {
    let n = values.len();
    let last = values[n - 1];
    let noise = noise_floor(last, tol);
    let d_last = last - values[n - 2];
    let mut order = None;
    let mut monotone = true;
    if n >= 3 {
        let d_prev = values[n - 2] - values[n - 3];
        if d_prev.abs() > noise && d_last.abs() > noise {
            if d_prev.signum() == d_last.signum() {
                order = Some((d_prev / d_last).log2());
            } else {
                monotone = false;
            }
        }
    }
    if !monotone {
        let spread = values[n - 3..]
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        if spread <= oscillation_tol * last.abs() {
            return Extrapolated {
                value: last,
                error: spread,
                order,
                monotone,
                settled: true,
            };
        }
    }
    let p = fixed_order.unwrap_or_else(|| order.map_or(2.0, |o| o.clamp(1.0, 3.0)));
    let value = last + d_last / (2f64.powf(p) - 1.0);
    Extrapolated {
        value,
        error: (last - value).abs().max(noise),
        order,
        monotone,
        settled: false,
    }
}

/// Interpolates a coarse solution onto the grid with half the spacing.
fn prolong(coarse: &TorsionField, fine: &MaskedGrid) -> Vec<f64> {
    let cg = coarse.grid();
    let value = |i: usize, j: usize| cg.index_of(i, j).map_or(0.0, |k| coarse.values()[k]);
    (0..fine.len())
        .map(|k| {
            let (i, j) = fine.node_ij(k);
            let (ci, cj) = (i / 2, j / 2);
            let (ri, rj) = (i % 2, j % 2);
            let ci1 = (ci + ri).min(cg.nx() - 1);
            let cj1 = (cj + rj).min(cg.ny() - 1);
            0.25 * (value(ci, cj) + value(ci1, cj) + value(ci, cj1) + value(ci1, cj1))
        })
        .collect()
}

/// Solves on `levels` successively halved grids and extrapolates. Returns
/// the finest field alongside the summary.
pub fn refine_and_extrapolate_with_field(
    p: &ConvexPolygon,
    config: &SolverConfig,
) -> Result<(TorsionSummary, TorsionField)> {
    config.validate()?;
    let h0 = config.effective_h0(p)?;
    let mut levels = Vec::with_capacity(config.levels);
    let mut locations = (Point::ORIGIN, Point::ORIGIN);
    let mut previous: Option<TorsionField> = None;
    for l in 0..config.levels {
        let h = h0 / f64::powi(2.0, l as i32);
        let grid = Arc::new(MaskedGrid::build(p, h)?);
        let field = match &previous {
            Some(c) => field::solve_torsion_from(Arc::clone(&grid), config.tol, prolong(c, &grid))?,
            None => solve_torsion(Arc::clone(&grid), config.tol)?,
        };
        if !(field.min_value() > 0.0) {
            return Err(HhError::GeometryInvariant(format!(
                "discrete torsion function not positive at h={h:e} (min {:e})",
                field.min_value()
            )));
        }
        let (u, u_at) = field.u_max();
        let (g, g_at) = field.grad_max()?;
        locations = (u_at, g_at);
        levels.push(LevelResult {
            h,
            unknowns: grid.len(),
            iterations: field.iterations(),
            method: field.method(),
            residual: field.residual_norm(),
            u_max: u,
            grad_max: g,
            interior_grad_max: field.interior_grad_max(),
        });
        previous = Some(field);
    }
    let field = previous.expect("at least two levels");

    let us: Vec<f64> = levels.iter().map(|l| l.u_max).collect();
    let gs: Vec<f64> = levels.iter().map(|l| l.grad_max).collect();
    let eu = extrapolate(&us, Some(2.0), config.tol, OSCILLATION_TOL);
    let eg = extrapolate(&gs, None, config.tol, GRAD_OSCILLATION_TOL);

    let mut notes = Vec::new();
    let mut trusted = true;
    for (name, e) in [("u_max", &eu), ("grad_max", &eg)] {
        if e.settled {
            notes.push(format!(
                "{name} oscillates within {:.1e}; finest value used without extrapolation",
                e.error
            ));
        } else if !e.monotone {
            notes.push(format!("{name} converges non-monotonically"));
            trusted = false;
        }
    }
    let finest = levels.last().unwrap();
    if finest.interior_grad_max > finest.grad_max + eg.error {
        notes.push(format!(
            "interior gradient {:.6e} exceeds boundary maximum {:.6e}",
            finest.interior_grad_max, finest.grad_max
        ));
        trusted = false;
    }
    if !trusted {
        debug!("untrusted summary: {}", notes.join("; "));
    }
    let summary = TorsionSummary {
        u_max: eu.value,
        u_max_location: locations.0,
        grad_max: eg.value,
        grad_max_location: locations.1,
        h_finest: finest.h,
        error_estimate_umax: eu.error,
        error_estimate_gradmax: eg.error,
        observed_order: eu.order,
        observed_order_grad: eg.order,
        trusted,
        notes,
        levels,
    };
    Ok((summary, field))
}

pub fn refine_and_extrapolate(p: &ConvexPolygon, config: &SolverConfig) -> Result<TorsionSummary> {
    refine_and_extrapolate_with_field(p, config).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_recovers_quadratic_error() {
        let exact = 0.3;
        let hs = [0.1, 0.05, 0.025];
        let vals: Vec<f64> = hs.iter().map(|h| exact + 2.0 * h * h).collect();
        let e = extrapolate(&vals, Some(2.0), 1e-12, OSCILLATION_TOL);
        assert!((e.value - exact).abs() < 1e-14);
        let e = extrapolate(&vals, None, 1e-12, OSCILLATION_TOL);
        assert!((e.order.unwrap() - 2.0).abs() < 1e-9);
        assert!((e.value - exact).abs() < 1e-14);
    }

    #[test]
    fn oscillation_is_flagged() {
        let e = extrapolate(&[1.0, 1.1, 1.05], None, 1e-12, OSCILLATION_TOL);
        assert!(!e.monotone && !e.settled);
        assert!(e.order.is_none());
        let e = extrapolate(&[1.0, 1.0 + 2e-5, 1.0 + 1e-5], None, 1e-12, OSCILLATION_TOL);
        assert!(e.settled);
        assert_eq!(e.value, 1.0 + 1e-5);
        assert!((e.error - 2e-5).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, 3).validate().is_err());
        assert!(SolverConfig::new(0.1, 1).validate().is_err());
        assert!(SolverConfig::default().with_tol(0.0).validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn square_summary() {
        let p = ConvexPolygon::unit_square();
        let s = refine_and_extrapolate(&p, &SolverConfig::new(1.0 / 32.0, 3).with_tol(1e-12)).unwrap();
        assert!(s.trusted, "{:?}", s.notes);
        assert!((s.u_max - 0.073_671_353_281_513_81).abs() < 1e-6, "{}", s.u_max);
        let o = s.observed_order.unwrap();
        assert!((1.8..=2.2).contains(&o), "{o}");
        assert_eq!(s.h_finest, 1.0 / 128.0);
    }
}
