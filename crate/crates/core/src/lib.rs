//! Numerical toolkit for the Saint Venant torsion problem on convex polygons
//! and the Hermite–Hadamard constants built from it.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: convex polygons and their exact functionals (area,
//!   perimeter, inradius by Chebyshev-center LP, diameter, width).
//! * [`analytic`]: closed-form torsion functions (ball, slab, strip,
//!   rectangle Fourier series) and the two-dimensional quantitative bound.
//! * [`quadrature`]: fixed Gauss rules on triangles and segments.
//! * [`solver`]: Shortley–Weller finite differences on masked grids,
//!   boundary normal derivatives and Richardson extrapolation.
//! * [`functionals`]: the constants `c_{d,α}(Ω)`, closed-form bounds and
//!   the full inequality report.
//! * [`experiments`]: parameter sweeps, the near-equality bump experiment
//!   and the local shape search.
//! * [`io`]: polygon files and fixed-precision JSON output.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod geometry;
pub mod io;
mod lp;
pub mod quadrature;
pub mod solver;

pub use error::{HhError, Result};
pub use functionals::{BoundCheck, HhReport, TestFunction};
pub use geometry::{ConvexPolygon, GeometrySummary, Point};
pub use solver::{MaskedGrid, SolverConfig, TorsionField, TorsionSummary};
