use std::f64::consts::TAU;

use proptest::prelude::*;

use toric_core::analysis::{lemma14_ratio, lemma17_identity, LEMMA17_FLAT_RATIO};
use toric_core::functionals::{l_functional, probe_family, probe_min, PLConvexFunction};
use toric_core::geometry::v_statistic;
use toric_core::polygon::{
    balance_report, canonical_weights, corner_cut, mu_invariant, rescale_polygon, ScalarField, WeightedPolygon,
};
use toric_core::potential::{guillemin_potential, quarter_plane_model};
use toric_core::{Affine, Point};

/// Convex polygon with vertices on the unit circle at angle gaps drawn from
/// `gaps` (normalized to a full turn), rotated by `phase`.
fn polygon_on_circle(gaps: &[f64], phase: f64) -> Vec<Point> {
    let total: f64 = gaps.iter().sum();
    let mut angle = phase;
    gaps.iter()
        .map(|g| {
            angle += g / total * TAU;
            Point::new(angle.cos(), angle.sin())
        })
        .collect()
}

fn gaps() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..1.5, 3..=7)
}

fn hexagon() -> WeightedPolygon {
    WeightedPolygon::with_unit_weights(vec![
        Point::new(1.0, 0.0),
        Point::new(2.0, 0.0),
        Point::new(2.0, 1.0),
        Point::new(1.0, 2.0),
        Point::new(0.0, 2.0),
        Point::new(0.0, 1.0),
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_weights_are_balanced_for_constant_one(g in gaps(), phase in 0.0..TAU) {
        let p = canonical_weights(polygon_on_circle(&g, phase)).unwrap();
        prop_assert!(balance_report(&p, &ScalarField::constant(1.0)).max_residual() < 1e-12);
    }

    #[test]
    fn rescaling_round_trips_and_keeps_mu(g in gaps(), phase in 0.0..TAU, s in 0.1f64..10.0) {
        let p = canonical_weights(polygon_on_circle(&g, phase)).unwrap();
        let q = rescale_polygon(&p, s).unwrap();
        let back = rescale_polygon(&q, 1.0 / s).unwrap();
        for (a, b) in back.vertices().iter().zip(p.vertices()) {
            prop_assert!((a - b).abs().max() <= 1e-14);
        }
        for (a, b) in back.weights().iter().zip(p.weights()) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
        let (m0, m1) = (mu_invariant(&p), mu_invariant(&q));
        prop_assert!((m0 - m1).abs() <= 1e-12 * m0.abs().max(1.0), "{} vs {}", m0, m1);
    }

    #[test]
    fn corner_cut_mass_rule(vertex in 0usize..6, eps in 0.01f64..0.5) {
        let p = hexagon();
        let cut = corner_cut(&p, vertex, eps).unwrap();
        let n = p.n_edges();
        let prev = (vertex + n - 1) % n;
        // the cut inserts the new edge at index `vertex`
        let new_mass = cut.weights()[vertex];
        let removed_prev = p.weights()[prev] - cut.weights()[if prev < vertex { prev } else { prev + 1 }];
        let removed_next = p.weights()[vertex] - cut.weights()[vertex + 1];
        prop_assert!((removed_prev - removed_next).abs() < 1e-12);
        prop_assert!((new_mass - removed_prev).abs() < 1e-12);
        let before: f64 = p.weights().iter().sum();
        let after: f64 = cut.weights().iter().sum();
        prop_assert!((after - (before - removed_prev - removed_next + new_mass)).abs() < 1e-12);
    }

    #[test]
    fn l_functional_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x0 in 0.3f64..1.7, y0 in 0.3f64..1.7) {
        let p = hexagon();
        let one = ScalarField::constant(1.0);
        let c = Point::new(x0, y0);
        let f = |x: &Point| (x - c).norm_squared();
        let g = |x: &Point| (x.x * x.y).exp();
        let lhs = l_functional(&p, &one, |x| a * f(x) + b * g(x));
        let rhs = a * l_functional(&p, &one, f) + b * l_functional(&p, &one, g);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn affine_shifts_leave_the_probe_minimum(c in -1.0f64..1.0, gx in -1.0f64..1.0, gy in -1.0f64..1.0) {
        let p = canonical_weights(hexagon().vertices().to_vec()).unwrap();
        let one = ScalarField::constant(1.0);
        let family = probe_family(&p, &p.centroid(), 40, 3);
        let shift = Affine::new(c, gx, gy);
        let shifted: Vec<PLConvexFunction> = family.iter().map(|f| f.map_pieces(|a| a.add(&shift))).collect();
        let (_, m0) = probe_min(&p, &one, &family).unwrap();
        let (_, m1) = probe_min(&p, &one, &shifted).unwrap();
        prop_assert!((m0 - m1).abs() < 1e-12, "{} vs {}", m0, m1);
    }

    #[test]
    fn curvature_samples_satisfy_their_identities(x in 0.05f64..1.95, y in 0.05f64..1.95) {
        let p = hexagon();
        let at = Point::new(x, y);
        prop_assume!(p.min_defining(&at) > 1e-3);
        let c = guillemin_potential(&p).curvature_at(&at).unwrap();
        let id = (c.inv * c.hess - nalgebra::Matrix2::identity()).abs().max();
        prop_assert!(id < 1e-10);
        prop_assert!((c.inv.determinant() * c.det - 1.0).abs() < 1e-10);
        for k in 0..2 {
            for l in 0..2 {
                prop_assert_eq!(c.f[k][l], c.f[l][k]);
                prop_assert_eq!(c.f[k][l], c.f[k][l].transpose());
            }
        }
    }

    #[test]
    fn v_is_nonnegative_and_additive(px in 1.0f64..2.0, py in 1.0f64..2.0, dx in -0.3f64..0.3, dy in -0.3f64..0.3, t in 0.1f64..0.9) {
        let u = quarter_plane_model(8.0).unwrap();
        let p = Point::new(px, py);
        let r = p + Point::new(dx, dy);
        prop_assume!((r - p).norm() > 1e-3);
        let q = p + (r - p) * t;
        let (pr, pq, qr) = (
            v_statistic(&u, &p, &r).unwrap(),
            v_statistic(&u, &p, &q).unwrap(),
            v_statistic(&u, &q, &r).unwrap(),
        );
        prop_assert!(pr >= 0.0 && pq >= 0.0 && qr >= 0.0);
        prop_assert!((pr - pq - qr).abs() < 1e-12 * (1.0 + pr));
    }

    #[test]
    fn identity_reports_are_reproducible(px in 1.5f64..3.0, py in 1.5f64..3.0, l in 0.2f64..1.0) {
        let u = quarter_plane_model(8.0).unwrap();
        let p = Point::new(px, py);
        let a = lemma14_ratio(&u, &p, l, l).unwrap();
        let b = lemma14_ratio(&u, &p, l, l).unwrap();
        prop_assert_eq!(a.to_json_line(), b.to_json_line());
        let kd = a.details["kappa_dilated"].as_f64().unwrap();
        prop_assert!((kd - a.ratio).abs() <= 1e-8 * a.ratio);
    }

    #[test]
    fn lemma17_ratio_does_not_depend_on_the_radius(r in 0.1f64..8.0) {
        let u = quarter_plane_model(8.0).unwrap();
        let rep = lemma17_identity(&u, &[r]).unwrap();
        prop_assert!((rep[0].ratio - LEMMA17_FLAT_RATIO).abs() <= 1e-8);
    }

    #[test]
    fn pl_evaluation_is_the_max_of_pieces(
        coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), 1..6),
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
    ) {
        let pieces: Vec<Affine> = coeffs.iter().map(|&(c, gx, gy)| Affine::new(c, gx, gy)).collect();
        let f = PLConvexFunction::new(pieces.clone()).unwrap();
        let at = Point::new(x, y);
        let expect = pieces.iter().map(|a| a.eval(&at)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(f.eval(&at), expect);
    }
}
