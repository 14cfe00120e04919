//! Maximum-principle bounds on `det(u_ij)` over a disc on which `∇u`
//! vanishes at the centre.

use std::f64::consts::TAU;

use super::{digest_of, IdentityReport};
use crate::potential::{rescale_potential, PotentialField};
use crate::{Error, Point, Result};

const RINGS: usize = 24;
const RAYS: usize = 64;

fn disc_points(centre: &Point, radius: f64) -> Vec<Point> {
    let mut out = vec![*centre];
    for k in 1..=RINGS {
        let r = radius * k as f64 / RINGS as f64;
        for a in 0..RAYS {
            let t = TAU * a as f64 / RAYS as f64;
            out.push(centre + Point::new(t.cos(), t.sin()) * r);
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
struct Measured {
    /// Largest `|∇u|` on the disc.
    rho: f64,
    /// Smallest `|∇u|` on the bounding circle.
    rho_onto: f64,
    a_plus: f64,
    a_minus: f64,
    sup_det: f64,
    inf_det: f64,
    /// `sup det · (R/ρ)² = c₁ + c₂ R²ρ²(A⁻)²`.
    upper: f64,
    /// `(ρ/R) / √inf det`, a lower bound for `c₃ + c₄ R²ρ² A⁺`.
    lower: f64,
}

fn measure(u: &PotentialField, centre: &Point, radius: f64) -> Result<Measured> {
    let disc = disc_points(centre, radius);
    let grads: Vec<f64> = disc.iter().map(|x| Ok(u.gradient(x)?.norm())).collect::<Result<_>>()?;
    let rho = grads.iter().copied().fold(0.0, f64::max);
    let rho_onto = grads[grads.len() - RAYS..].iter().copied().fold(f64::INFINITY, f64::min);
    let mut a_plus: f64 = 0.0;
    let mut a_minus: f64 = 0.0;
    let mut inf_det = f64::INFINITY;
    for (x, g) in disc.iter().zip(&grads) {
        let c = u.curvature_at(x)?;
        let a = -c.abreu;
        if a > a_plus {
            a_plus = a;
        }
        if -a > a_minus {
            a_minus = -a;
        }
        if *g <= rho_onto / 4.0 {
            inf_det = inf_det.min(c.det);
        }
    }
    let sup_det = disc_points(centre, radius / 4.0)
        .iter()
        .map(|x| Ok(u.hessian(x)?.determinant()))
        .try_fold(0.0, |m: f64, d: Result<f64>| d.map(|d| m.max(d)))?;
    Ok(Measured {
        rho,
        rho_onto,
        a_plus,
        a_minus,
        sup_det,
        inf_det,
        upper: sup_det * (radius / rho).powi(2),
        lower: (rho_onto / radius) / inf_det.sqrt(),
    })
}

const GRADIENT_TOL: f64 = 1e-9;
const INVARIANCE_TOL: f64 = 1e-8;
/// `A^±` below this count as zero.
const CURVATURE_TOL: f64 = 1e-8;

/// Upper bound of `det(u_ij)` on `|x - c| ≤ R/4` and lower bound on
/// `{|∇u| ≤ ρ/4}`. The report has `lhs = sup det`, `rhs = (ρ/R)²`, so the
/// ratio is `c₁ + c₂ R²ρ²(A⁻)²`; `c₁` and `c₃` are stated outright when the
/// corresponding `A^∓` vanishes. The same measurement on the potential
/// dilated by 2 must reproduce both implied constants to 1e-8.
pub fn det_bounds(u: &PotentialField, centre: &Point, radius: f64) -> Result<IdentityReport> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    if !u.domain.contains(centre) || u.domain.distance_to_edges(centre) < radius {
        return Err(Error::Precondition(format!(
            "disc of radius {radius} about ({}, {}) leaves the domain",
            centre.x, centre.y
        )));
    }
    let g0 = u.gradient(centre)?.norm();
    let m = measure(u, centre, radius)?;
    if g0 > GRADIENT_TOL * (1.0 + m.rho) {
        return Err(Error::Precondition(format!("∇u(centre) = {g0:e} is not zero")));
    }
    let s = 2.0;
    let d = measure(&rescale_potential(u, s)?, &(centre * s), radius * s)?;
    let close = |a: f64, b: f64| (a - b).abs() <= INVARIANCE_TOL * a.abs().max(b.abs());
    let invariant = close(m.upper, d.upper) && close(m.lower, d.lower);
    let c1 = (m.a_minus <= CURVATURE_TOL).then_some(m.upper);
    let c3 = (m.a_plus <= CURVATURE_TOL).then_some(m.lower);
    Ok(IdentityReport::new(
        "det_bounds",
        digest_of("det_bounds", Some(u), &[centre.x, centre.y, radius]),
        m.sup_det,
        (m.rho / radius).powi(2),
        INVARIANCE_TOL,
        invariant && m.upper.is_finite() && m.lower.is_finite(),
    )
    .with_details(serde_json::json!({
        "rho": m.rho,
        "rho_onto": m.rho_onto,
        "A_plus": m.a_plus,
        "A_minus": m.a_minus,
        "sup_det_inner": m.sup_det,
        "inf_det_low_gradient": m.inf_det,
        "upper_combination": m.upper,
        "upper_scale": (radius * m.rho * m.a_minus).powi(2),
        "lower_combination": m.lower,
        "lower_scale": (radius * m.rho).powi(2) * m.a_plus,
        "c1": c1,
        "c3": c3,
        "upper_dilated": d.upper,
        "lower_dilated": d.lower,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::WeightedPolygon;
    use crate::potential::{quarter_plane_model, AnalyticPotential, Domain};
    use crate::Affine;
    use nalgebra::Matrix2;

    #[test]
    fn euclidean_quadratic() {
        let sq = WeightedPolygon::with_unit_weights(vec![
            Point::new(-2.0, -2.0),
            Point::new(2.0, -2.0),
            Point::new(2.0, 2.0),
            Point::new(-2.0, 2.0),
        ])
        .unwrap();
        let u = PotentialField::new(
            Domain::Polygon(sq),
            AnalyticPotential::from_terms(vec![]).with_quadratic(Matrix2::identity()),
        );
        let r = det_bounds(&u, &Point::new(0.0, 0.0), 1.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.details["rho"].as_f64().unwrap() - 1.0).abs() < 1e-14);
        assert!((r.details["c1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((r.details["c3"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let u = quarter_plane_model(4.0).unwrap();
        assert!(matches!(det_bounds(&u, &Point::new(1.0, 1.0), 0.5), Err(Error::Precondition(_))));
        let mut v = u.clone();
        v.analytic = v.analytic.with_linear(Affine::new(0.0, -1.0, -1.0));
        assert!(matches!(det_bounds(&v, &Point::new(1.0, 1.0), 1.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn flat_model_disc_regression() {
        let mut u = quarter_plane_model(4.0).unwrap();
        u.analytic = u.analytic.with_linear(Affine::new(0.0, -1.0, -1.0));
        let r = det_bounds(&u, &Point::new(1.0, 1.0), 0.5).unwrap();
        assert!(r.pass);
        let d = &r.details;
        let get = |k: &str| d[k].as_f64().unwrap();
        // sup det at x = y = 1 - 1/(8√2), ρ = log 2 at (1, 0.5)
        let x = 1.0 - 0.125 / 2f64.sqrt();
        assert!((r.lhs - 1.0 / (x * x)).abs() < 1e-12);
        assert!((get("rho") - 2f64.ln()).abs() < 1e-12);
        assert!((get("rho_onto") - 1.5f64.ln()).abs() < 1e-12);
        assert!((get("c1") - 0.6261369754545499).abs() < 1e-12);
        assert!((get("c3") - 0.8706608677742079).abs() < 1e-12);
        // the continuous infimum is exp(-√2 ρ/4), attained off the grid
        let inf = (-(2f64.sqrt()) * get("rho_onto") / 4.0).exp();
        let c3 = (get("rho_onto") / 0.5) / inf.sqrt();
        assert!((get("c3") - c3).abs() < 1e-3);

        let scaled = rescale_potential(&u, 3.0).unwrap();
        let s = det_bounds(&scaled, &Point::new(3.0, 3.0), 1.5).unwrap();
        assert!((s.details["c1"].as_f64().unwrap() - get("c1")).abs() < 1e-8);
        assert!((s.details["c3"].as_f64().unwrap() - get("c3")).abs() < 1e-8);
    }
}
