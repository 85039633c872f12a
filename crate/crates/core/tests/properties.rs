use std::f64::consts::PI;

use hh_core::analytic::{
    quantitative_bound_2d, rectangle_boundary_gradient, rectangle_torsion, rectangle_umax, RectangleSeriesParams,
};
use hh_core::experiments::{box_limit_series, random_convex_polygon};
use hh_core::functionals::{
    hh_ratio_with_error, interpolation_identity_check, lemma41_bound, shipped_test_functions, trivial_bound,
};
use hh_core::geometry::{
    area, diameter, geometry_summary, inradius_incenter, perimeter, width, ConvexPolygon, GeometrySummary, Point,
};
use hh_core::io::{parse_polygon, polygon_to_json};
use hh_core::solver::{opposite, solve_harmonic, MaskedGrid, TorsionSummary, DIRECTIONS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn polygon(seed: u64, n: usize) -> ConvexPolygon {
    random_convex_polygon(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn summary_with_gradient(g: f64) -> TorsionSummary {
    TorsionSummary {
        u_max: 0.1,
        u_max_location: Point::ORIGIN,
        grad_max: g,
        grad_max_location: Point::ORIGIN,
        h_finest: 0.01,
        error_estimate_umax: 0.0,
        error_estimate_gradmax: 0.0,
        observed_order: None,
        observed_order_grad: None,
        trusted: true,
        notes: Vec::new(),
        levels: Vec::new(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #[test]
    fn geometry_chain(seed in any::<u64>(), n in 3usize..12) {
        let p = polygon(seed, n);
        let g: GeometrySummary = geometry_summary(&p).unwrap();
        let tol = 1.0 + 1e-10;
        prop_assert!(g.volume / g.perimeter <= g.inradius * tol);
        prop_assert!(g.inradius <= 2.0 * g.volume / g.perimeter * tol);
        prop_assert!(g.width <= g.diameter * tol);
        prop_assert!(2.0 * g.inradius <= g.width * tol);
        prop_assert!(g.width <= 3.0 * g.inradius * tol);
        prop_assert!(g.perimeter * g.perimeter >= 4.0 * PI * g.volume);
        prop_assert!(p.contains(g.incenter));
    }

    #[test]
    fn incenter_is_optimal(seed in any::<u64>(), n in 3usize..10, samples in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 64)) {
        let p = polygon(seed, n);
        let (r, c) = inradius_incenter(&p).unwrap();
        prop_assert!((p.boundary_distance(c) - r).abs() < 1e-10);
        let (lo, hi) = p.bounding_box();
        for (s, t) in samples {
            let x = Point::new(lo.x + s * (hi.x - lo.x), lo.y + t * (hi.y - lo.y));
            if p.contains(x) {
                prop_assert!(p.boundary_distance(x) <= r + 1e-12);
            }
        }
    }

    #[test]
    fn triangles_are_tangential(seed in any::<u64>()) {
        let p = polygon(seed, 3);
        let g = geometry_summary(&p).unwrap();
        prop_assert!(rel(g.inradius, 2.0 * g.volume / g.perimeter) < 1e-10);
    }

    #[test]
    fn scaling_covariance(seed in any::<u64>(), n in 3usize..10, t in 0.1f64..10.0) {
        let p = polygon(seed, n);
        let q = p.scaled(t).unwrap();
        prop_assert!(rel(area(&q), t * t * area(&p)) < 1e-12);
        prop_assert!(rel(perimeter(&q), t * perimeter(&p)) < 1e-12);
        prop_assert!(rel(diameter(&q), t * diameter(&p)) < 1e-12);
        prop_assert!(rel(width(&q), t * width(&p)) < 1e-12);
        prop_assert!(rel(inradius_incenter(&q).unwrap().0, t * inradius_incenter(&p).unwrap().0) < 1e-10);
    }

    #[test]
    fn polygon_json_is_byte_stable(seed in any::<u64>(), n in 3usize..10) {
        let p = polygon(seed, n);
        let text = polygon_to_json(&p).unwrap();
        let back = parse_polygon(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(polygon_to_json(&back).unwrap(), text);
    }

    #[test]
    fn lemma_bound_never_exceeds_trivial(d in 2usize..=10, s in 0.0f64..=1.0) {
        let alpha = 1.0 + s * (d as f64 - 1.0);
        prop_assert!(lemma41_bound(d, alpha).unwrap() <= trivial_bound(d, alpha).unwrap() * (1.0 + 1e-12));
        prop_assert!((lemma41_bound(d, d as f64).unwrap() - d as f64).abs() < 1e-12);
    }

    #[test]
    fn interpolation_identity(seed in any::<u64>(), g in 0.1f64..2.0, a1 in -4.0f64..1.0, t in 0.0f64..=1.0) {
        let p = polygon(seed, 6);
        let geom = geometry_summary(&p).unwrap();
        let a2 = 2.0;
        let alpha = a1 + t * (a2 - a1);
        let r = interpolation_identity_check(&geom, &summary_with_gradient(g), a1, a2, alpha).unwrap();
        prop_assert!(r <= 1e-12);
    }

    #[test]
    fn series_truncation_is_negligible(l in 0.5f64..20.0, x1 in -0.5f64..0.5, s in -1.0f64..1.0) {
        // Away from the far edges, where the cosh ratios decay.
        let x2 = s * (l - 0.25).max(0.0);
        let a = RectangleSeriesParams::new(l, 50).unwrap();
        let b = RectangleSeriesParams::new(l, 200).unwrap();
        let p = Point::new(x1, x2);
        prop_assert!((rectangle_torsion(&a, p).unwrap() - rectangle_torsion(&b, p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rectangle_oracle_inequalities(l in 0.05f64..30.0) {
        let params = RectangleSeriesParams::with_default_terms(l).unwrap();
        let u = rectangle_umax(&params);
        let g = rectangle_boundary_gradient(&params, 0.0).unwrap();
        // Bañuelos–Kröger with r = 1/2, and Sperb.
        prop_assert!(u < 0.125 || l > 10.0 && u <= 0.125);
        prop_assert!(g * g <= 2.0 * u * (1.0 + 1e-12));
    }

    #[test]
    fn quantitative_chain_on_rectangles(r in 0.1f64..5.0, excess in 0.01f64..20.0) {
        // R(Ω) = (−r, r) × (−(D − r), D − r).
        let d = r * (2.0 + excess);
        let params = RectangleSeriesParams::with_default_terms((d - r) / (2.0 * r)).unwrap();
        let u = 4.0 * r * r * rectangle_umax(&params);
        let (u_bound, c2_bound) = quantitative_bound_2d(r, d).unwrap();
        prop_assert!(u <= u_bound * (1.0 + 1e-12));
        prop_assert!(c2_bound < 2.0);
    }

    #[test]
    fn cosh_bound(x in 1e-6f64..700.0) {
        prop_assert!(1.0 / x.cosh() <= 2.0 * (-x).exp() * (1.0 + 1e-14));
    }

    #[test]
    fn box_limit_below_half(eps in 0.01f64..0.99, r in 0.05f64..20.0) {
        let v = box_limit_series(eps, r).unwrap();
        prop_assert!(v > 0.0 && v <= 0.5 * (1.0 - eps) * (1.0 + 1e-12));
    }

    #[test]
    fn hh_ratios_stay_below_two(seed in any::<u64>(), n in 3usize..10) {
        let p = polygon(seed, n);
        for f in shipped_test_functions(&p) {
            let r = hh_ratio_with_error(&p, &f).unwrap();
            if let Some(rho) = r.ratio {
                prop_assert!(rho <= 2.0 + r.error, "{} {}", f.name, rho);
                prop_assert!(rho > 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_invariants(seed in any::<u64>(), n in 3usize..9, cells in 6.0f64..20.0) {
        let p = polygon(seed, n);
        let (r, _) = inradius_incenter(&p).unwrap();
        // Thin triangles can disconnect at coarse h; rejection is the documented outcome.
        let g = MaskedGrid::build(&p, r / cells);
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        for k in 0..g.len() {
            let x = g.node_position(k);
            prop_assert!((0..p.len()).all(|i| p.edge_distance(i, x) > 0.0));
            for d in 0..4 {
                let arm = g.arm(k, d);
                prop_assert!(arm.theta > 0.0 && arm.theta <= 1.0);
                match arm.neighbor {
                    Some(j) => {
                        prop_assert_eq!(arm.theta, 1.0);
                        prop_assert_eq!(g.arm(j, opposite(d)).neighbor, Some(k));
                    }
                    None => {
                        let b = x + DIRECTIONS[d] * (arm.theta * g.h());
                        prop_assert!(p.boundary_distance(b).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn harmonic_max_principle(seed in any::<u64>(), n in 3usize..8, a in 0.0f64..2.0, b in -1.0f64..1.0) {
        let p = polygon(seed, n);
        let (r, _) = inradius_incenter(&p).unwrap();
        let g = MaskedGrid::build(&p, r / 10.0);
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let data = std::sync::Arc::new(move |x: Point| a + (3.0 * x.x + b * x.y).sin().abs());
        let f = solve_harmonic(g, data, 1e-12).unwrap();
        let lo = a;
        let hi = a + 1.0;
        prop_assert!(f.min_value() >= lo - 1e-9 && f.max_value() <= hi + 1e-9);
    }
}
