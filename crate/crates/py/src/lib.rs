//! Python bindings. Structured results (summaries, reports, sweeps) cross the
//! boundary as plain dicts and lists decoded from the fixed-precision JSON.

use hh_core::experiments::{
    box_limit_series as core_box_limit_series, eta_sweep as core_eta_sweep, random_convex_polygon,
    rectangle_decay_sweep as core_decay_sweep, rectangle_series_summary as core_series_summary,
    shape_search as core_shape_search, RectangleOracle,
};
use hh_core::functionals::{self, hh_ratio_with_error, shipped_test_functions, verify_all_bounds_with_alphas};
use hh_core::geometry::{self, geometry_summary, simplex_family};
use hh_core::io::{parse_polygon, polygon_to_json, to_json_string};
use hh_core::solver::{refine_and_extrapolate, DEFAULT_LEVELS, DEFAULT_TOL};
use hh_core::{analytic, ConvexPolygon, HhError, Point, SolverConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const DEFAULT_H0: f64 = 1.0 / 64.0;

fn to_py(e: HhError) -> PyErr {
    match e {
        HhError::NotConverged { .. } | HhError::StencilFailure { .. } | HhError::Untrusted(_) | HhError::LpFailure(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_object<'py, T: Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = to_json_string(value).map_err(to_py)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn config(h0: f64, levels: usize, tol: f64) -> PyResult<SolverConfig> {
    let c = SolverConfig::new(h0, levels).with_tol(tol);
    c.validate().map_err(to_py)?;
    Ok(c)
}

/// Convex polygon with counter-clockwise vertices.
#[pyclass(name = "Polygon", module = "hh_torsion", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPolygon {
    inner: ConvexPolygon,
}

impl From<ConvexPolygon> for PyPolygon {
    fn from(inner: ConvexPolygon) -> Self {
        PyPolygon { inner }
    }
}

#[pymethods]
impl PyPolygon {
    /// Clockwise input is reversed; non-convex input raises `ValueError`.
    #[new]
    fn new(vertices: Vec<(f64, f64)>) -> PyResult<Self> {
        let pts = vertices.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        Ok(ConvexPolygon::from_points(pts).map_err(to_py)?.0.into())
    }

    #[staticmethod]
    fn regular(n: usize, circumradius: f64) -> PyResult<Self> {
        Ok(ConvexPolygon::regular(n, circumradius).map_err(to_py)?.into())
    }

    /// `(-half_width, half_width) x (-half_height, half_height)`.
    #[staticmethod]
    fn rectangle(half_width: f64, half_height: f64) -> PyResult<Self> {
        Ok(ConvexPolygon::rectangle(half_width, half_height).map_err(to_py)?.into())
    }

    #[staticmethod]
    fn unit_square() -> Self {
        ConvexPolygon::unit_square().into()
    }

    /// Triangle with base `eta` on the y-axis and apex `(1, 0)`.
    #[staticmethod]
    fn simplex(eta: f64) -> PyResult<Self> {
        Ok(simplex_family(eta).map_err(to_py)?.into())
    }

    /// Random convex `n`-gon of area 1.
    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(random_convex_polygon(n, &mut rng).map_err(to_py)?.into())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(parse_polygon(text).map_err(to_py)?.into())
    }

    fn to_json(&self) -> PyResult<String> {
        polygon_to_json(&self.inner).map_err(to_py)
    }

    #[getter]
    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|v| (v.x, v.y)).collect()
    }

    #[getter]
    fn area(&self) -> f64 {
        geometry::area(&self.inner)
    }

    #[getter]
    fn perimeter(&self) -> f64 {
        geometry::perimeter(&self.inner)
    }

    #[getter]
    fn diameter(&self) -> f64 {
        geometry::diameter(&self.inner)
    }

    #[getter]
    fn width(&self) -> f64 {
        geometry::width(&self.inner)
    }

    /// `(r, (x, y))`: inradius and Chebyshev center.
    fn inradius(&self) -> PyResult<(f64, (f64, f64))> {
        let (r, c) = geometry::inradius_incenter(&self.inner).map_err(to_py)?;
        Ok((r, (c.x, c.y)))
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.inner.contains(Point::new(x, y))
    }

    fn area_normalized(&self) -> PyResult<Self> {
        Ok(self.inner.area_normalized().map_err(to_py)?.into())
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_object(py, &geometry_summary(&self.inner).map_err(to_py)?)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Polygon({:?})", self.vertices())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Extrapolated torsion summary on `levels` grids starting at `h0`.
#[pyfunction]
#[pyo3(signature = (polygon, h0 = DEFAULT_H0, levels = DEFAULT_LEVELS, tol = DEFAULT_TOL))]
fn solve<'py>(py: Python<'py>, polygon: &PyPolygon, h0: f64, levels: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let c = config(h0, levels, tol)?;
    let s = py.detach(|| refine_and_extrapolate(&polygon.inner, &c)).map_err(to_py)?;
    to_object(py, &s)
}

/// Full inequality report; raises `RuntimeError` on untrusted solves.
#[pyfunction]
#[pyo3(signature = (polygon, h0 = DEFAULT_H0, levels = DEFAULT_LEVELS, tol = DEFAULT_TOL, alphas = vec![0.0, 1.0, 2.0]))]
fn verify<'py>(
    py: Python<'py>,
    polygon: &PyPolygon,
    h0: f64,
    levels: usize,
    tol: f64,
    alphas: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let c = config(h0, levels, tol)?;
    let p = &polygon.inner;
    let report = py
        .detach(|| refine_and_extrapolate(p, &c).and_then(|s| verify_all_bounds_with_alphas(p, &s, &alphas)))
        .map_err(to_py)?;
    to_object(py, &report)
}

#[pyfunction]
fn hh_constant(d: usize, volume: f64, surface: f64, grad_max: f64, alpha: f64) -> PyResult<f64> {
    functionals::hh_constant_from(d, volume, surface, grad_max, alpha).map_err(to_py)
}

#[pyfunction]
fn lemma41_bound(d: usize, alpha: f64) -> PyResult<f64> {
    functionals::lemma41_bound(d, alpha).map_err(to_py)
}

#[pyfunction]
fn trivial_bound(d: usize, alpha: f64) -> PyResult<f64> {
    functionals::trivial_bound(d, alpha).map_err(to_py)
}

/// `(u bound, c2 bound)` from inradius and diameter.
#[pyfunction]
fn quantitative_bound_2d(r: f64, diameter: f64) -> PyResult<(f64, f64)> {
    analytic::quantitative_bound_2d(r, diameter).map_err(to_py)
}

#[derive(Serialize)]
struct Ratio {
    name: String,
    ratio: Option<f64>,
    error: f64,
}

/// Hermite-Hadamard ratios of the shipped test functions.
#[pyfunction]
fn hh_ratios<'py>(py: Python<'py>, polygon: &PyPolygon) -> PyResult<Bound<'py, PyAny>> {
    let mut out = Vec::new();
    for f in shipped_test_functions(&polygon.inner) {
        let r = hh_ratio_with_error(&polygon.inner, &f).map_err(to_py)?;
        out.push(Ratio {
            name: f.name.clone(),
            ratio: r.ratio,
            error: r.error,
        });
    }
    to_object(py, &out)
}

/// Series summary for `(-a, a) x (-b, b)`.
#[pyfunction]
fn rectangle_series_summary<'py>(py: Python<'py>, half_width: f64, half_height: f64) -> PyResult<Bound<'py, PyAny>> {
    to_object(py, &core_series_summary(half_width, half_height).map_err(to_py)?)
}

#[pyfunction]
fn box_limit_series(eps: f64, r: f64) -> PyResult<f64> {
    core_box_limit_series(eps, r).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (etas, h0 = DEFAULT_H0, levels = DEFAULT_LEVELS, tol = DEFAULT_TOL))]
fn eta_sweep<'py>(py: Python<'py>, etas: Vec<f64>, h0: f64, levels: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let c = config(h0, levels, tol)?;
    let rows = py.detach(|| core_eta_sweep(&etas, &c)).map_err(to_py)?;
    to_object(py, &rows)
}

/// Decay of `c_{2,alpha}` on `(-1,1) x (-R,R)` from the series oracle.
#[pyfunction]
fn rectangle_decay_sweep<'py>(py: Python<'py>, rs: Vec<f64>, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    let sweep = py.detach(|| core_decay_sweep(&rs, alpha, RectangleOracle::Series)).map_err(to_py)?;
    to_object(py, &sweep)
}

#[pyfunction]
#[pyo3(signature = (n, alpha, iters, seed, h0 = DEFAULT_H0, levels = DEFAULT_LEVELS, tol = DEFAULT_TOL))]
#[allow(clippy::too_many_arguments)]
fn shape_search<'py>(
    py: Python<'py>,
    n: usize,
    alpha: f64,
    iters: usize,
    seed: u64,
    h0: f64,
    levels: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let c = config(h0, levels, tol)?;
    let state = py.detach(|| core_shape_search(n, alpha, iters, seed, &c)).map_err(to_py)?;
    to_object(py, &state)
}

#[pymodule]
fn hh_torsion(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolygon>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(hh_constant, m)?)?;
    m.add_function(wrap_pyfunction!(lemma41_bound, m)?)?;
    m.add_function(wrap_pyfunction!(trivial_bound, m)?)?;
    m.add_function(wrap_pyfunction!(quantitative_bound_2d, m)?)?;
    m.add_function(wrap_pyfunction!(hh_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(rectangle_series_summary, m)?)?;
    m.add_function(wrap_pyfunction!(box_limit_series, m)?)?;
    m.add_function(wrap_pyfunction!(eta_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(rectangle_decay_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(shape_search, m)?)?;
    Ok(())
}
