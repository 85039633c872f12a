//! Batch experiments: the thin-triangle sweep, the box limit, the rectangle
//! decay sweep, the near-equality bump and a local shape search.
//!
//! Sweep rows are independent and run in parallel on the global rayon pool;
//! results keep the order of the input parameters.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    rectangle_boundary_gradient, rectangle_umax_tail_bound, RectangleSeriesParams, RectangleTorsion,
    DEFAULT_SERIES_TERMS,
};
use crate::error::{HhError, Result};
use crate::functionals::{hh_constant_from, verify_all_bounds_with_alphas, AlphaEntry, BoundCheck, HhReport};
use crate::geometry::{area, diameter, geometry_summary, perimeter, simplex_family, ConvexPolygon, GeometrySummary, Point};
use crate::io::{format_f64, to_json_line};
use crate::solver::{
    extrapolate, GRAD_OSCILLATION_TOL, OSCILLATION_TOL, refine_and_extrapolate, solve_harmonic, solve_torsion, BoundaryData, MaskedGrid, SolverConfig,
    TorsionSummary,
};

const REPORT_ALPHAS: [f64; 3] = [0.0, 1.0, 2.0];

/// One domain of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `η` for triangle sweeps, `R` for rectangle sweeps.
    pub parameter: f64,
    pub geometry: GeometrySummary,
    pub torsion: Option<TorsionSummary>,
    pub c2: f64,
    pub c2_error: f64,
    pub c_alpha: Vec<AlphaEntry>,
    pub margins: Vec<BoundCheck>,
    pub all_pass: bool,
    /// Set when the solve failed or was untrusted; the row then carries no report.
    pub failure: Option<String>,
}

impl SweepRow {
    fn from_report(parameter: f64, report: HhReport, c2: f64, c2_error: f64) -> Self {
        SweepRow {
            parameter,
            geometry: report.geometry,
            torsion: Some(report.torsion),
            c2,
            c2_error,
            c_alpha: report.alphas,
            margins: report.bound_margins,
            all_pass: report.all_pass,
            failure: None,
        }
    }

    fn failed(parameter: f64, geometry: GeometrySummary, torsion: Option<TorsionSummary>, reason: String) -> Self {
        warn!("sweep row {parameter}: {reason}");
        SweepRow {
            parameter,
            geometry,
            torsion,
            c2: f64::NAN,
            c2_error: f64::NAN,
            c_alpha: Vec::new(),
            margins: Vec::new(),
            all_pass: false,
            failure: Some(reason),
        }
    }

    /// Verified and every bound passed.
    pub fn is_ok(&self) -> bool {
        self.failure.is_none() && self.all_pass
    }

    pub fn margin(&self, name: &str) -> Option<f64> {
        self.margins.iter().find(|b| b.name == name).map(|b| b.margin)
    }

    pub fn c_alpha(&self, alpha: f64) -> Option<f64> {
        self.c_alpha.iter().find(|e| e.alpha == alpha).map(|e| e.c_alpha)
    }
}

fn check_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(HhError::InvalidArgument(format!("{what} must not be empty")));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(HhError::InvalidArgument(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

fn with_alpha(alpha: f64) -> Vec<f64> {
    let mut alphas = REPORT_ALPHAS.to_vec();
    if !alphas.contains(&alpha) {
        alphas.push(alpha);
    }
    alphas
}

/// Solves and verifies one domain. Solver failures and untrusted summaries
/// become flagged rows; geometry errors propagate.
fn verified_row(
    parameter: f64,
    p: &ConvexPolygon,
    solve: impl FnOnce() -> Result<TorsionSummary>,
    alphas: &[f64],
) -> Result<SweepRow> {
    let geometry = geometry_summary(p)?;
    let summary = match solve() {
        Ok(s) => s,
        Err(e) => return Ok(SweepRow::failed(parameter, geometry, None, e.to_string())),
    };
    if !summary.trusted {
        let reason = format!("untrusted solve: {}", summary.notes.join("; "));
        return Ok(SweepRow::failed(parameter, geometry, Some(summary), reason));
    }
    let report = verify_all_bounds_with_alphas(p, &summary, alphas)?;
    let (c2, c2_error) = (report.c2, report.c2_error);
    Ok(SweepRow::from_report(parameter, report, c2, c2_error))
}

/// Solves the triangles `Ω_η` and records `c₂(Ω_η) = 2·‖∇u‖∞/r`, which
/// equals `c₂` for triangles since `|∂Ω|/|Ω| = 2/r`.
pub fn eta_sweep(etas: &[f64], config: &SolverConfig) -> Result<Vec<SweepRow>> {
    check_increasing(etas, "etas")?;
    config.validate()?;
    let polygons = etas.iter().map(|&e| simplex_family(e)).collect::<Result<Vec<_>>>()?;
    etas.par_iter()
        .zip(polygons.par_iter())
        .map(|(&eta, p)| {
            let mut row = verified_row(eta, p, || refine_and_extrapolate(p, config), &REPORT_ALPHAS)?;
            if let (None, Some(t)) = (&row.failure, &row.torsion) {
                let r = row.geometry.inradius;
                row.c2 = 2.0 * t.grad_max / r;
                row.c2_error = 2.0 * t.error_estimate_gradmax / r;
                info!("eta = {eta}: c2 = {:.10} ± {:.1e}", row.c2, row.c2_error);
            }
            Ok(row)
        })
        .collect()
}

pub fn write_eta_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    write_eta_csv_to(rows, File::create(path)?)
}

pub fn write_eta_csv_to<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "eta",
        "area",
        "perimeter",
        "inradius",
        "diameter",
        "umax",
        "gradmax",
        "c2",
        "margin_c2_upper",
        "margin_quant",
    ])?;
    for row in rows {
        let (u, g) = row.torsion.as_ref().map_or((f64::NAN, f64::NAN), |t| (t.u_max, t.grad_max));
        let g_ = &row.geometry;
        let fields = [
            row.parameter,
            g_.volume,
            g_.perimeter,
            g_.inradius,
            g_.diameter,
            u,
            g,
            row.c2,
            row.margin("c2_upper").unwrap_or(f64::NAN),
            row.margin("quant_c2").unwrap_or(f64::NAN),
        ];
        w.write_record(fields.iter().map(|&v| format_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// The box `(0, 1−ε) × (−r, r)`.
pub fn box_limit_domain(eps: f64, r: f64) -> Result<ConvexPolygon> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(HhError::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(HhError::InvalidArgument(format!("r must be positive, got {r}")));
    }
    ConvexPolygon::axis_box(0.0, 1.0 - eps, -r, r)
}

/// Series value of `|∂u/∂ν|` at the midpoint `(0, 0)` of the face `x = 0`.
pub fn box_limit_series(eps: f64, r: f64) -> Result<f64> {
    box_limit_domain(eps, r)?;
    let s = 1.0 - eps;
    let params = RectangleSeriesParams::new(r / s, DEFAULT_SERIES_TERMS)?;
    Ok(s * rectangle_boundary_gradient(&params, 0.0)?.abs())
}

/// `|∂u/∂ν|` at `(0, 0)` interpolated from the boundary samples of one face.
fn face_derivative_at(field: &crate::solver::TorsionField, face: usize, y: f64) -> Result<f64> {
    let scan = field.scan_boundary();
    let mut pts: Vec<(f64, f64)> = scan
        .samples
        .iter()
        .filter(|s| s.edge == face)
        .map(|s| (s.point.y, s.dudn.abs()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = pts.partition_point(|q| q.0 < y);
    if k == 0 || k == pts.len() {
        return Err(HhError::StencilFailure {
            skipped: 1,
            total: pts.len(),
        });
    }
    let ((y0, v0), (y1, v1)) = (pts[k - 1], pts[k]);
    Ok(v0 + (v1 - v0) * (y - y0) / (y1 - y0))
}

/// Solves the torsion problem on `(0, 1−ε) × (−r, r)` and returns the
/// extrapolated `|∂u/∂ν|` at the midpoint of the face `x = 0`. The value
/// tends to `1/2` as `ε → 0`, `r → ∞`.
pub fn box_limit_check(eps: f64, r: f64, config: &SolverConfig) -> Result<f64> {
    let p = box_limit_domain(eps, r)?;
    config.validate()?;
    let h0 = config.effective_h0(&p)?;
    let face = (0..p.len())
        .find(|&i| p.outward_normal(i).x < -0.5)
        .expect("an axis box has a face x = 0");
    let values = (0..config.levels)
        .map(|l| {
            let h = h0 / f64::powi(2.0, l as i32);
            let field = solve_torsion(MaskedGrid::build(&p, h)?, config.tol)?;
            face_derivative_at(&field, face, 0.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let e = extrapolate(&values, None, config.tol, GRAD_OSCILLATION_TOL);
    debug!("box limit eps={eps} r={r}: levels {values:?} -> {} ± {:.1e}", e.value, e.error);
    Ok(e.value)
}

/// Where the torsion data of a rectangle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RectangleOracle {
    Series,
    Solver(SolverConfig),
}

/// Torsion summary of `(−a, a) × (−b, b)` from the Fourier series.
pub fn rectangle_series_summary(half_width: f64, half_height: f64) -> Result<TorsionSummary> {
    let t = RectangleTorsion::new(half_width, half_height)?;
    let (short, long) = if half_width <= half_height {
        (half_width, half_height)
    } else {
        (half_height, half_width)
    };
    let params = RectangleSeriesParams::with_default_terms(long / (2.0 * short))?;
    let (u, g) = (t.umax(), t.grad_max());
    let rounding = 16.0 * f64::EPSILON;
    let grad_location = if half_width <= half_height {
        Point::new(half_width, 0.0)
    } else {
        Point::new(0.0, half_height)
    };
    Ok(TorsionSummary {
        u_max: u,
        u_max_location: Point::ORIGIN,
        grad_max: g,
        grad_max_location: grad_location,
        h_finest: 0.0,
        error_estimate_umax: 4.0 * short * short * rectangle_umax_tail_bound(&params) + rounding * u,
        error_estimate_gradmax: rounding * g,
        observed_order: None,
        observed_order_grad: None,
        trusted: true,
        notes: Vec::new(),
        levels: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySweep {
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log c_{2,α}` against `log(D/r)`.
    pub slope: f64,
    /// `(α − 2)/2`.
    pub expected_slope: f64,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `c_{2,α}` on the rectangles `(−1, 1) × (−R, R)` and the fitted decay
/// exponent in `D/r`.
pub fn rectangle_decay_sweep(rs: &[f64], alpha: f64, oracle: RectangleOracle) -> Result<DecaySweep> {
    check_increasing(rs, "Rs")?;
    hh_constant_from(2, 1.0, 1.0, 1.0, alpha)?;
    if let RectangleOracle::Solver(config) = &oracle {
        config.validate()?;
    }
    let alphas = with_alpha(alpha);
    let rows = rs
        .par_iter()
        .map(|&big_r| {
            let p = ConvexPolygon::rectangle(1.0, big_r)?;
            let solve = || match &oracle {
                RectangleOracle::Series => rectangle_series_summary(1.0, big_r),
                RectangleOracle::Solver(config) => refine_and_extrapolate(&p, config),
            };
            verified_row(big_r, &p, solve, &alphas)
        })
        .collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.failure.is_none())
        .map(|r| (r.geometry.eccentricity().ln(), r.c_alpha(alpha).expect("alpha in report").ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(HhError::InvalidArgument(
            "fewer than two rectangles were solved; cannot fit a slope".into(),
        ));
    }
    let slope = fit_slope(&xs, &ys);
    info!("decay sweep alpha = {alpha}: slope {slope:.6}");
    Ok(DecaySweep {
        alpha,
        rows,
        slope,
        expected_slope: 0.5 * (alpha - 2.0),
    })
}

pub fn write_decay_csv(sweep: &DecaySweep, path: impl AsRef<Path>) -> Result<()> {
    write_decay_csv_to(sweep, File::create(path)?)
}

pub fn write_decay_csv_to<W: Write>(sweep: &DecaySweep, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["R", "c_alpha", "D_over_r"])?;
    for row in &sweep.rows {
        let c = row.c_alpha(sweep.alpha).unwrap_or(f64::NAN);
        w.write_record([format_f64(row.parameter), format_f64(c), format_f64(row.geometry.eccentricity())])?;
    }
    w.flush()?;
    Ok(())
}

/// Harmonic extension of one boundary bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearEqualityRow {
    /// Arclength support of the bump.
    pub width: f64,
    /// `(|∂Ω| ∫_Ω f) / (|Ω| ∫_∂Ω f)`.
    pub rho: f64,
    /// `∫_Ω f / (‖∇u‖∞ ∫_∂Ω f)`; at most 1.
    pub mechanism_ratio: f64,
    pub mechanism_error: f64,
    pub domain_integral: f64,
    pub boundary_integral: f64,
}

/// Triangular bump of height 1 and arclength support `width`, centered at
/// arclength `center`.
pub fn boundary_bump(p: &ConvexPolygon, center: f64, width: f64) -> BoundaryData {
    let p = p.clone();
    let per = perimeter(&p);
    Arc::new(move |x: Point| {
        let d = (p.arclength_of(x) - center).rem_euclid(per);
        let d = d.min(per - d);
        (1.0 - 2.0 * d / width).max(0.0)
    })
}

/// Solves the torsion problem on `p`, then runs [`near_equality_with`].
pub fn near_equality(p: &ConvexPolygon, widths: &[f64], config: &SolverConfig) -> Result<Vec<NearEqualityRow>> {
    let summary = refine_and_extrapolate(p, config)?;
    summary.ensure_trusted()?;
    near_equality_with(p, &summary, widths, config)
}

/// For each width, extends a boundary bump centered at the gradient maximum
/// harmonically and compares `∫_Ω f` with `‖∇u‖∞ ∫_∂Ω f`. The domain
/// integral is extrapolated from spacings `2h` and `h`, with `h` at most a
/// sixteenth of the width.
pub fn near_equality_with(
    p: &ConvexPolygon,
    summary: &TorsionSummary,
    widths: &[f64],
    config: &SolverConfig,
) -> Result<Vec<NearEqualityRow>> {
    summary.ensure_trusted()?;
    let geom = geometry_summary(p)?;
    let center = p.arclength_of(summary.grad_max_location);
    let h_max = if summary.h_finest > 0.0 {
        summary.h_finest
    } else {
        config.effective_h0(p)? / f64::powi(2.0, config.levels as i32 - 1)
    };
    widths
        .par_iter()
        .map(|&s| {
            if !(s > 0.0 && s <= geom.perimeter) {
                return Err(HhError::InvalidArgument(format!(
                    "bump width must lie in (0, |∂Ω|], got {s}"
                )));
            }
            let data = boundary_bump(p, center, s);
            let h = h_max.min(s / 16.0);
            let integrals = [2.0 * h, h]
                .iter()
                .map(|&hl| {
                    let f = solve_harmonic(MaskedGrid::build(p, hl)?, Arc::clone(&data), config.tol)?;
                    Ok(f.integrate())
                })
                .collect::<Result<Vec<_>>>()?;
            let e = extrapolate(&integrals, Some(2.0), config.tol, OSCILLATION_TOL);
            // Exact for piecewise-linear data in arclength.
            let boundary = 0.5 * s;
            let mechanism = e.value / (summary.grad_max * boundary);
            let row = NearEqualityRow {
                width: s,
                rho: geom.perimeter * e.value / (geom.volume * boundary),
                mechanism_ratio: mechanism,
                mechanism_error: mechanism * (e.error / e.value + summary.error_estimate_gradmax / summary.grad_max),
                domain_integral: e.value,
                boundary_integral: boundary,
            };
            debug!("bump width {s}: {row:?}");
            Ok(row)
        })
        .collect()
}

/// Initial and final Gaussian step, as fractions of the current diameter.
pub const SIGMA_START: f64 = 0.1;
pub const SIGMA_END: f64 = 0.005;

/// One accepted state of the shape search; iteration 0 is the start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedMove {
    pub iteration: usize,
    pub vertex: Option<usize>,
    pub objective: f64,
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchState {
    /// Best polygon found, area-normalized to 1.
    pub polygon: ConvexPolygon,
    /// `c_{2,α}` of `polygon`.
    pub objective: f64,
    pub alpha: f64,
    pub iteration: usize,
    pub seed: u64,
    pub history: Vec<AcceptedMove>,
    pub rejected_nonconvex: usize,
    pub rejected_solver: usize,
    pub rejected_worse: usize,
}

fn search_objective(p: &ConvexPolygon, alpha: f64, config: &SolverConfig) -> Result<f64> {
    let s = refine_and_extrapolate(p, config)?;
    s.ensure_trusted()?;
    hh_constant_from(2, area(p), perimeter(p), s.grad_max, alpha)
}

fn accepted(iteration: usize, vertex: Option<usize>, objective: f64, p: &ConvexPolygon) -> AcceptedMove {
    AcceptedMove {
        iteration,
        vertex,
        objective,
        vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
    }
}

/// Local search for large `c_{2,α}` starting from the regular `n`-gon of area 1.
pub fn shape_search(n_vertices: usize, alpha: f64, iters: usize, seed: u64, config: &SolverConfig) -> Result<SearchState> {
    if n_vertices < 4 {
        return Err(HhError::InvalidArgument(format!(
            "shape search needs at least 4 vertices, got {n_vertices}"
        )));
    }
    let start = ConvexPolygon::regular(n_vertices, 1.0)?.area_normalized()?;
    shape_search_from(start, alpha, iters, seed, config)
}

/// Hill climbing on `c_{2,α}`: each iteration moves one random vertex by a
/// Gaussian step whose size decays geometrically from `SIGMA_START` to
/// `SIGMA_END` times the diameter. Non-convex proposals and failed solves
/// are rejected; the area is renormalized to 1 before evaluation.
pub fn shape_search_from(
    start: ConvexPolygon,
    alpha: f64,
    iters: usize,
    seed: u64,
    config: &SolverConfig,
) -> Result<SearchState> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(HhError::InvalidArgument(format!(
            "shape search needs 0 <= alpha < 2, got {alpha}"
        )));
    }
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let current = start.area_normalized()?;
    let objective = search_objective(&current, alpha, config)?;
    let mut state = SearchState {
        history: vec![accepted(0, None, objective, &current)],
        polygon: current,
        objective,
        alpha,
        iteration: 0,
        seed,
        rejected_nonconvex: 0,
        rejected_solver: 0,
        rejected_worse: 0,
    };
    for it in 1..=iters {
        state.iteration = it;
        let t = if iters > 1 {
            (it - 1) as f64 / (iters - 1) as f64
        } else {
            0.0
        };
        let sigma = SIGMA_START * (SIGMA_END / SIGMA_START).powf(t) * diameter(&state.polygon);
        let normal = Normal::new(0.0, sigma).expect("positive step size");
        let k = rng.random_range(0..state.polygon.len());
        let step = Point::new(normal.sample(&mut rng), normal.sample(&mut rng));
        let moved = state.polygon.vertices()[k] + step;
        let proposal = match state.polygon.with_vertex(k, moved).and_then(|q| q.area_normalized()) {
            Ok(q) => q,
            Err(_) => {
                state.rejected_nonconvex += 1;
                continue;
            }
        };
        match search_objective(&proposal, alpha, config) {
            Ok(v) if v > state.objective => {
                debug!("iteration {it}: accepted {v:.10}");
                state.history.push(accepted(it, Some(k), v, &proposal));
                state.objective = v;
                state.polygon = proposal;
            }
            Ok(_) => state.rejected_worse += 1,
            Err(e) => {
                debug!("iteration {it}: solver rejected proposal: {e}");
                state.rejected_solver += 1;
            }
        }
    }
    info!(
        "search seed {seed}: c = {:.8} after {iters} iterations ({} accepted)",
        state.objective,
        state.history.len() - 1
    );
    Ok(state)
}

/// Independent searches, one per seed, run concurrently.
pub fn shape_search_seeds(
    n_vertices: usize,
    alpha: f64,
    iters: usize,
    seeds: &[u64],
    config: &SolverConfig,
) -> Result<Vec<SearchState>> {
    seeds
        .par_iter()
        .map(|&seed| shape_search(n_vertices, alpha, iters, seed, config))
        .collect()
}

/// Writes the accepted states as JSON lines.
pub fn write_search_jsonl(state: &SearchState, path: impl AsRef<Path>) -> Result<()> {
    write_search_jsonl_to(state, File::create(path)?)
}

pub fn write_search_jsonl_to<W: Write>(state: &SearchState, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    for m in &state.history {
        writeln!(w, "{}", to_json_line(m)?)?;
    }
    w.flush()?;
    Ok(())
}

/// Random convex `n`-gon of area 1: jittered points on a randomly rotated
/// ellipse with aspect ratio in `[1, 2.5)`.
pub fn random_convex_polygon<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ConvexPolygon> {
    if n < 3 {
        return Err(HhError::InvalidArgument(format!("need at least 3 vertices, got {n}")));
    }
    let stretch = rng.random_range(1.0..2.5);
    let rotation: f64 = rng.random_range(0.0..PI);
    let (c, s) = (rotation.cos(), rotation.sin());
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let t = 2.0 * PI * (k as f64 + rng.random_range(-0.35..0.35)) / n as f64;
        let (x, y) = (stretch * t.cos(), t.sin());
        pts.push(Point::new(c * x - s * y, s * x + c * y));
    }
    ConvexPolygon::new(pts)?.area_normalized()
}

/// Named test domains: a 512-gon disk, the unit square, five random
/// octagons of area 1, rectangles `(−1, 1) × (−R, R)` for `R ∈ {1, 4, 16}`
/// and triangles `Ω_η` for `η ∈ {2, 8, 32}`.
pub fn battery(seed: u64) -> Result<Vec<(String, ConvexPolygon)>> {
    let mut out = vec![
        ("disk".to_string(), ConvexPolygon::regular(512, 1.0)?),
        ("square".to_string(), ConvexPolygon::unit_square()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..5 {
        out.push((format!("octagon_{k}"), random_convex_polygon(8, &mut rng)?));
    }
    for big_r in [1.0, 4.0, 16.0] {
        out.push((format!("rect_{big_r}"), ConvexPolygon::rectangle(1.0, big_r)?));
    }
    for eta in [2.0, 8.0, 32.0] {
        out.push((format!("simplex_{eta}"), simplex_family(eta)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> SolverConfig {
        SolverConfig::new(1.0 / 32.0, 3).with_tol(1e-11)
    }

    #[test]
    fn slope_of_a_line() {
        assert!((fit_slope(&[0.0, 1.0, 2.0], &[1.0, -1.0, -3.0]) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn sweeps_reject_unordered_parameters() {
        assert!(eta_sweep(&[4.0, 2.0], &fast()).is_err());
        assert!(rectangle_decay_sweep(&[], 1.0, RectangleOracle::Series).is_err());
        assert!(box_limit_check(1.0, 1.0, &fast()).is_err());
    }

    #[test]
    fn bump_is_a_tent_in_arclength() {
        let p = ConvexPolygon::unit_square();
        let f = boundary_bump(&p, 0.5, 0.5);
        assert!((f(Point::new(0.5, 0.0)) - 1.0).abs() < 1e-15);
        assert!((f(Point::new(0.375, 0.0)) - 0.5).abs() < 1e-15);
        assert_eq!(f(Point::new(0.0, 0.5)), 0.0);
        // Wraps around vertex 0.
        let g = boundary_bump(&p, 0.0, 0.5);
        assert!((g(Point::new(0.0, 0.125)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_polygons_are_convex_with_unit_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = random_convex_polygon(8, &mut rng).unwrap();
            assert_eq!(p.len(), 8);
            assert!((area(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn series_summary_matches_square_value() {
        let s = rectangle_series_summary(0.5, 0.5).unwrap();
        assert!((s.u_max - 0.073_671_353_281_513_81).abs() < 1e-12);
        let wide = rectangle_series_summary(3.0, 1.0).unwrap();
        let tall = rectangle_series_summary(1.0, 3.0).unwrap();
        assert_eq!(wide.u_max, tall.u_max);
        assert_eq!(wide.grad_max_location, Point::new(0.0, 1.0));
    }

    #[test]
    fn box_limit_matches_series() {
        let v = box_limit_check(0.5, 0.25, &fast()).unwrap();
        let s = box_limit_series(0.5, 0.25).unwrap();
        assert!(v < 0.5);
        assert!((v - s).abs() < 0.01 * s, "{v} {s}");
    }

    #[test]
    fn search_is_monotone_and_reproducible() {
        let config = SolverConfig::new(1.0 / 16.0, 2).with_tol(1e-10);
        let a = shape_search(5, 1.0, 20, 3, &config).unwrap();
        let b = shape_search(5, 1.0, 20, 3, &config).unwrap();
        assert_eq!(a, b);
        assert!(a.history.windows(2).all(|w| w[0].objective < w[1].objective));
        assert!((area(&a.polygon) - 1.0).abs() < 1e-10);
        assert_eq!(
            a.rejected_nonconvex + a.rejected_solver + a.rejected_worse + a.history.len() - 1,
            20
        );
    }
}
