//! Derived values checked against oracles written independently of the
//! library code paths they test.

use std::f64::consts::PI;

use hh_core::analytic::{rectangle_torsion, rectangle_umax, RectangleSeriesParams, RectangleTorsion};
use hh_core::experiments::{box_limit_check, box_limit_series, eta_sweep, write_eta_csv};
use hh_core::functionals::{
    hh_constant, hh_ratio, lemma41_bound, normal_derivative_bound_ratio, trivial_bound, verify_all_bounds,
    Certificate, TestFunction,
};
use hh_core::geometry::{
    area, diameter, geometry_summary, inradius_incenter, perimeter, simplex_family, width, ConvexPolygon, Point,
};
use hh_core::solver::{
    integrate_domain, refine_and_extrapolate, solve_torsion, MaskedGrid, SolverConfig, TorsionSummary,
};

/// Eigenfunction expansion of the torsion function of `(0,1)²` at its
/// center: `Σ_{m,n odd} 16 sin(mπ/2) sin(nπ/2) / (π⁴ m n (m² + n²))`.
fn square_center_double_series(max_index: usize) -> f64 {
    let mut total = 0.0;
    for m in (1..=max_index).step_by(2) {
        let sm = if m % 4 == 1 { 1.0 } else { -1.0 };
        let mut row = 0.0;
        for n in (1..=max_index).step_by(2) {
            let sn = if n % 4 == 1 { 1.0 } else { -1.0 };
            let (mf, nf) = (m as f64, n as f64);
            row += sn / (nf * (mf * mf + nf * nf));
        }
        total += sm / m as f64 * row;
    }
    16.0 / PI.powi(4) * total
}

fn heron_inradius(a: Point, b: Point, c: Point) -> f64 {
    let (x, y, z) = (a.dist(b), b.dist(c), c.dist(a));
    let s = 0.5 * (x + y + z);
    ((s - x) * (s - y) * (s - z) / s).sqrt()
}

fn pairwise_diameter(p: &ConvexPolygon) -> f64 {
    let v = p.vertices();
    let mut best: f64 = 0.0;
    for i in 0..v.len() {
        for j in 0..i {
            best = best.max(v[i].dist(v[j]));
        }
    }
    best
}

fn fine() -> SolverConfig {
    SolverConfig::default().with_tol(1e-12)
}

#[test]
fn square_center_matches_double_series() {
    let oracle = square_center_double_series(4001);
    let params = RectangleSeriesParams::with_default_terms(0.5).unwrap();
    let single = rectangle_torsion(&params, Point::ORIGIN).unwrap();
    assert!((single - oracle).abs() < 1e-10, "{single} vs {oracle}");
    assert!((rectangle_umax(&params) - oracle).abs() < 1e-10);
}

#[test]
fn triangle_inradius_matches_heron() {
    for eta in [0.5, 2.0, 4.0, 20.0] {
        let p = simplex_family(eta).unwrap();
        let v = p.vertices();
        let (r, _) = inradius_incenter(&p).unwrap();
        assert!((r - heron_inradius(v[0], v[1], v[2])).abs() < 1e-12);
    }
    let r4 = inradius_incenter(&simplex_family(4.0).unwrap()).unwrap().0;
    assert!((r4 - 4.0 / (4.0 + 2.0 * 5f64.sqrt())).abs() < 1e-14);
}

#[test]
fn diameter_and_width_against_brute_force() {
    let p = ConvexPolygon::regular(7, 1.3).unwrap();
    assert!((diameter(&p) - pairwise_diameter(&p)).abs() < 1e-15);
    // Width as the minimum over many directions of the projection extent.
    let extent = |t: f64| {
        let d = Point::new(t.cos(), t.sin());
        let proj: Vec<f64> = p.vertices().iter().map(|v| v.dot(d)).collect();
        proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - proj.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let sampled = (0..200_000).map(|k| extent(PI * k as f64 / 200_000.0)).fold(f64::INFINITY, f64::min);
    let w = width(&p);
    assert!(w <= sampled + 1e-12 && sampled - w < 1e-8, "{w} {sampled}");
    let rect = ConvexPolygon::rectangle(1.0, 10.0).unwrap();
    assert!((diameter(&rect) - 2.0 * 101f64.sqrt()).abs() < 1e-13);
    assert!((width(&rect) - 2.0).abs() < 1e-14);
}

#[test]
fn second_moment_of_the_disk() {
    let p = ConvexPolygon::regular(512, 1.0).unwrap();
    let v = integrate_domain(&p, |x| x.dot(x)).unwrap();
    assert!((v - PI / 2.0).abs() < 1e-3);
}

#[test]
fn square_solves_match_series() {
    let p = ConvexPolygon::unit_square();
    let exact = RectangleTorsion::new(0.5, 0.5).unwrap();
    let field = solve_torsion(MaskedGrid::build(&p, 1.0 / 128.0).unwrap(), 1e-12).unwrap();
    let (u, at) = field.u_max();
    assert!((u - exact.umax()).abs() < 1e-4);
    assert!(at.dist(Point::new(0.5, 0.5)) < 1.0 / 128.0);
    let (g, g_at) = field.grad_max().unwrap();
    assert!((g - exact.grad_max()).abs() < 0.01 * exact.grad_max());
    assert!((g_at.x - 0.5).abs() < 0.05 || (g_at.y - 0.5).abs() < 0.05);
    let s = refine_and_extrapolate(&p, &fine()).unwrap();
    assert!((s.u_max - exact.umax()).abs() < 1e-6);
}

#[test]
fn rectangle_at_side_over_256() {
    let p = ConvexPolygon::rectangle(0.5, 1.0).unwrap();
    let exact = RectangleTorsion::new(0.5, 1.0).unwrap();
    let field = solve_torsion(MaskedGrid::build(&p, 1.0 / 256.0).unwrap(), 1e-12).unwrap();
    assert!((field.u_max().0 - exact.umax()).abs() < 0.01 * exact.umax());
    assert!((field.grad_max().unwrap().0 - exact.grad_max()).abs() < 0.01 * exact.grad_max());
}

#[test]
fn long_rectangle_is_nearly_a_slab() {
    let exact = RectangleTorsion::new(1.0, 20.0).unwrap();
    assert!(exact.umax() < 0.5 && 0.5 - exact.umax() < 1e-6);
    let p = ConvexPolygon::rectangle(1.0, 20.0).unwrap();
    let s = refine_and_extrapolate(&p, &SolverConfig::new(1.0 / 16.0, 3).with_tol(1e-12)).unwrap();
    assert!((s.u_max - exact.umax()).abs() < 1e-5);
    let r = verify_all_bounds(&p, &s).unwrap();
    assert!(r.check("banuelos_kroger").unwrap().pass);
}

#[test]
fn disk_report() {
    let p = ConvexPolygon::regular(512, 1.0).unwrap();
    let s = refine_and_extrapolate(&p, &fine()).unwrap();
    assert!((s.u_max - 0.25).abs() < 3e-4);
    let r = verify_all_bounds(&p, &s).unwrap();
    assert!(r.all_pass, "{:?}", r.failures().collect::<Vec<_>>());
    assert!(r.check("serrin_lower").unwrap().margin.abs() < 1e-2);
    assert!((r.check("c2_upper").unwrap().margin - 1.0).abs() < 1e-2);
    let one = TestFunction::new("one", Certificate::Harmonic, |_| 1.0);
    assert!((normal_derivative_bound_ratio(&p, &s, &one).unwrap() - 1.0).abs() < 1e-2);
    let affine = TestFunction::new("1 + x", Certificate::Harmonic, |x: Point| 1.0 + x.x);
    assert!((hh_ratio(&p, &affine).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn square_report() {
    let p = ConvexPolygon::unit_square();
    let s = refine_and_extrapolate(&p, &fine()).unwrap();
    let r = verify_all_bounds(&p, &s).unwrap();
    assert!(r.all_pass);
    // Sperb is strict away from the slab: g² < 2u by the series margin.
    let exact = RectangleTorsion::new(0.5, 0.5).unwrap();
    let series_margin = 2.0 * exact.umax() - exact.grad_max().powi(2);
    assert!(series_margin > 0.03);
    assert!((r.check("sperb").unwrap().margin - series_margin).abs() < 1e-5);
    let g = geometry_summary(&p).unwrap();
    assert!((hh_constant(&g, &s, 1.0).unwrap() - s.grad_max).abs() < 1e-15);
    let one = TestFunction::new("one", Certificate::Harmonic, |_| 1.0);
    assert!(normal_derivative_bound_ratio(&p, &s, &one).unwrap() < 0.9);
}

#[test]
fn triangle_reports() {
    let p = simplex_family(8.0).unwrap();
    let s = refine_and_extrapolate(&p, &fine()).unwrap();
    let r = verify_all_bounds(&p, &s).unwrap();
    assert!(r.all_pass);
    let serrin = r.check("serrin_lower").unwrap();
    assert!(serrin.margin > 0.05 * serrin.bound);

    let p = simplex_family(20.0).unwrap();
    let s = refine_and_extrapolate(&p, &fine()).unwrap();
    let r = verify_all_bounds(&p, &s).unwrap();
    assert!(r.all_pass);
    let upper = r.check("c2_upper").unwrap();
    assert!(upper.margin > 0.0 && upper.margin < 0.1);
    // Maximum near the base midpoint, below the inradius it tends to as η grows.
    assert!(s.grad_max_location.x.abs() < 1e-9 && s.grad_max_location.y.abs() < 0.1);
    let rr = inradius_incenter(&p).unwrap().0;
    assert!(s.grad_max < rr && s.grad_max > 0.9 * rr);
}

#[test]
fn long_rectangle_c2_approaches_one() {
    let p = ConvexPolygon::rectangle(1.0, 32.0).unwrap();
    let exact = RectangleTorsion::new(1.0, 32.0).unwrap();
    let c2 = exact.grad_max() * perimeter(&p) / area(&p);
    let slab = 1.0 + 1.0 / 32.0;
    assert!((c2 - slab).abs() < 1e-9);
}

#[test]
fn lemma_plug_ins() {
    assert!((lemma41_bound(2, 0.0).unwrap() - 2f64.powf(-1.5) / PI).abs() < 1e-15);
    assert!((trivial_bound(2, 1.0).unwrap() - PI.powf(-0.5)).abs() < 1e-15);
    assert!((trivial_bound(3, 3.0).unwrap() - 3.0).abs() < 1e-14);
}

#[test]
fn box_limit_values() {
    let cfg = fine();
    let v = box_limit_check(0.1, 4.0, &cfg).unwrap();
    let s = box_limit_series(0.1, 4.0).unwrap();
    assert!((v - s).abs() < 0.01 * s);
    assert!(v <= 0.5);
    // The face gradient approaches (1 − ε)/2.
    assert!((s - 0.45).abs() < 0.02 * 0.45);
}

#[test]
fn eta_sweep_csv_round_trips() {
    let rows = eta_sweep(&[2.0, 4.0], &SolverConfig::new(1.0 / 32.0, 3).with_tol(1e-11)).unwrap();
    assert!(rows.iter().all(|r| r.is_ok()));
    assert!(rows[0].c2 < rows[1].c2 && rows[1].c2 < 2.0);
    let dir = std::env::temp_dir().join(format!("hh-eta-{}.csv", std::process::id()));
    write_eta_csv(&rows, &dir).unwrap();
    let mut reader = csv::Reader::from_path(&dir).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "eta");
    assert_eq!(header.len(), 10);
    let parsed: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[7].parse().unwrap())
        .collect();
    assert_eq!(parsed, vec![rows[0].c2, rows[1].c2]);
    std::fs::remove_file(dir).ok();
}

#[test]
fn series_summary_is_usable_everywhere() {
    let s: TorsionSummary = hh_core::experiments::rectangle_series_summary(1.0, 4.0).unwrap();
    let p = ConvexPolygon::rectangle(1.0, 4.0).unwrap();
    let r = verify_all_bounds(&p, &s).unwrap();
    assert!(r.all_pass);
}
