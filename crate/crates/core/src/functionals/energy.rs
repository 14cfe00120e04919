//! The functional `𝓕(u) = -∫_P log det(u_ij) dμ + L_{A,σ} u`.
//!
//! For the canonical part `Σ c_E λ_E log λ_E`,
//! `det(u_ij) · Π λ_E = Σ_{E<E'} c_E c_E' (a_E × a_E')² Π_{others} λ`,
//! a polynomial that stays positive on the closed polygon, so
//! `log det` splits into `-Σ log λ_E` (integrated in closed form over level
//! sets of `λ_E`) and a smooth remainder. Integrals of `λ log λ` are done
//! the same way.

use nalgebra::Matrix2;
use serde::Serialize;

use super::smooth_area_rule;
use crate::affine::Affine;
use crate::polygon::{ScalarField, WeightedPolygon};
use crate::potential::{checked_inverse, PotentialField};
use crate::quadrature::GaussRule;
use crate::{Error, Point, Result};

/// `∫_0^t s^n log s ds`.
fn t_pow_log(n: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let k = (n + 1) as f64;
    t.powi(n as i32 + 1) * (t.ln() / k - 1.0 / (k * k))
}

/// `∫_{λ = t} g dℓ / |∇λ|` over the polygon's cross-section.
fn cross_section(vertices: &[Point], lambda: &Affine, g: &Affine, t: f64) -> f64 {
    let n = vertices.len();
    let dir = Point::new(-lambda.grad.y, lambda.grad.x);
    let mut lo: Option<(f64, Point)> = None;
    let mut hi: Option<(f64, Point)> = None;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        let (la, lb) = (lambda.eval(&a) - t, lambda.eval(&b) - t);
        if (la <= 0.0) != (lb <= 0.0) {
            let q = a + (b - a) * (la / (la - lb));
            let s = q.dot(&dir);
            if lo.is_none_or(|(v, _)| s < v) {
                lo = Some((s, q));
            }
            if hi.is_none_or(|(v, _)| s > v) {
                hi = Some((s, q));
            }
        }
    }
    match (lo, hi) {
        (Some((_, p)), Some((_, q))) => (q - p).norm() * g.eval(&((p + q) * 0.5)) / lambda.grad.norm(),
        _ => 0.0,
    }
}

/// `∫_P g λ^m log λ dμ` for `m ∈ {0, 1}`, exact up to rounding.
///
/// The cross-sectional integral of `g` over `{λ = t}` is a quadratic in `t`
/// between consecutive vertex levels; it is recovered from three interior
/// samples and integrated against `t^m log t` in closed form.
pub fn integral_of_log_term(vertices: &[Point], lambda: &Affine, g: &Affine, m: usize) -> Result<f64> {
    if lambda.grad.norm() == 0.0 || m > 1 {
        return Err(Error::InvalidParameter("log term needs a non-constant λ and m ≤ 1".into()));
    }
    let mut levels: Vec<f64> = vertices.iter().map(|v| lambda.eval(v)).collect();
    let tmin = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    if tmin < -1e-12 * levels.iter().map(|v| v.abs()).fold(0.0, f64::max) {
        return Err(Error::OutsideDomain { at: vertices[0] });
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    let mut total = 0.0;
    for w in levels.windows(2) {
        let (t0, t1) = (w[0].max(0.0), w[1]);
        let nodes = [t0 + 0.15 * (t1 - t0), 0.5 * (t0 + t1), t0 + 0.85 * (t1 - t0)];
        let vals = nodes.map(|t| cross_section(vertices, lambda, g, t));
        // monomial coefficients of the interpolating quadratic
        let mut coeffs = [0.0; 3];
        for i in 0..3 {
            let others: Vec<f64> = (0..3).filter(|&j| j != i).map(|j| nodes[j]).collect();
            let denom = (nodes[i] - others[0]) * (nodes[i] - others[1]);
            let c = vals[i] / denom;
            coeffs[0] += c * others[0] * others[1];
            coeffs[1] -= c * (others[0] + others[1]);
            coeffs[2] += c;
        }
        for (k, c) in coeffs.iter().enumerate() {
            total += c * (t_pow_log(k + m, t1) - t_pow_log(k + m, t0));
        }
    }
    Ok(total)
}

/// `∫_{∂P} λ log λ dσ`.
pub fn edge_integral_lambda_log_lambda(p: &WeightedPolygon, lambda: &Affine) -> f64 {
    let f = |t: f64| if t <= 0.0 { 0.0 } else { t * t * (0.5 * t.ln() - 0.25) };
    (0..p.n_edges())
        .map(|e| {
            let (a, b) = p.edge(e);
            let (la, lb) = (lambda.eval(&a).max(0.0), lambda.eval(&b).max(0.0));
            let mean = if (lb - la).abs() <= 1e-12 * (la + lb) {
                let l = 0.5 * (la + lb);
                if l > 0.0 {
                    l * l.ln()
                } else {
                    0.0
                }
            } else {
                (f(lb) - f(la)) / (lb - la)
            };
            p.weights()[e] * mean
        })
        .sum()
}

/// `∫_P log det(u⁰_ij) dμ` for a closed-form potential without quadratic
/// part.
pub fn log_det_integral(u: &PotentialField) -> Result<f64> {
    let p = u.domain.polygon().ok_or_else(|| Error::Precondition("𝓕 needs a bounded polygon".into()))?;
    if u.analytic.quadratic != Matrix2::zeros() {
        return Err(Error::Precondition("𝓕 is implemented for log terms plus affine functions".into()));
    }
    let terms = &u.analytic.terms;
    let logs: f64 = terms
        .iter()
        .map(|t| integral_of_log_term(p.vertices(), &t.lambda, &Affine::constant(1.0), 0))
        .sum::<Result<f64>>()?;
    let smooth = |x: &Point| {
        let mut q = 0.0;
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                let cr = terms[i].lambda.grad.perp(&terms[j].lambda.grad);
                let others: f64 = terms
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i && k != j)
                    .map(|(_, t)| t.lambda.eval(x))
                    .product();
                q += terms[i].coeff * terms[j].coeff * cr * cr * others;
            }
        }
        q.ln()
    };
    let smooth_part = smooth_area_rule().integrate_polygon(p.vertices(), smooth);
    Ok(smooth_part - logs)
}

/// The pieces of `𝓕`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyParts {
    /// `∫ log det(u_ij)`.
    pub log_det: f64,
    /// `∫_{∂P} u dσ`.
    pub boundary: f64,
    /// `∫_P A u dμ`.
    pub area: f64,
    pub total: f64,
}

/// `𝓕(u)` for affine `A`. The correction enters through
/// `log det(u⁰_ij + f_ij) = log det(u⁰_ij) + log det(I + (u⁰)^{-1} f_ij)`,
/// summed over the lattice nodes where `f_ij` is available, and through
/// quadrature of `L_{A,σ} f`.
pub fn f_functional(u: &PotentialField, a: &ScalarField) -> Result<EnergyParts> {
    let p = u.domain.polygon().ok_or_else(|| Error::Precondition("𝓕 needs a bounded polygon".into()))?;
    let a_aff = a
        .as_affine()
        .ok_or_else(|| Error::Precondition("𝓕 is implemented for affine A".into()))?;
    let mut log_det = log_det_integral(u)?;

    let mut boundary = 0.0;
    let mut area = 0.0;
    for t in &u.analytic.terms {
        boundary += t.coeff * edge_integral_lambda_log_lambda(p, &t.lambda);
        area += t.coeff * integral_of_log_term(p.vertices(), &t.lambda, &a_aff, 1)?;
    }
    let lin = u.analytic.linear;
    let two = GaussRule::new(2);
    boundary += p.boundary_integral_with(&two, |x| lin.eval(x));
    area += crate::quadrature::TriangleRule::degree2().integrate_polygon(p.vertices(), |x| a_aff.eval(x) * lin.eval(x));

    if let Some(c) = &u.correction {
        let lat = c.lattice();
        let cell = lat.h * lat.h;
        for k in c.hessian_indices() {
            let x = lat.point(k);
            let ua = checked_inverse(&u.analytic.hessian(&x)?, &x)?;
            let m = Matrix2::identity() + ua * c.hessian_at_node(k);
            let det = m.determinant();
            if det <= 0.0 {
                return Err(Error::NotConvex { at: x });
            }
            log_det += cell * det.ln();
        }
        boundary += p.boundary_integral_with(&GaussRule::new(16), |x| c.evaluate(x).0);
        area += smooth_area_rule().integrate_polygon(p.vertices(), |x| a_aff.eval(x) * c.evaluate(x).0);
    }
    Ok(EnergyParts {
        log_det,
        boundary,
        area,
        total: -log_det + boundary - area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::guillemin_potential;

    fn square() -> WeightedPolygon {
        WeightedPolygon::with_unit_weights(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn log_integrals_on_the_square() {
        let v = square().vertices().to_vec();
        let x = Affine::new(0.0, 1.0, 0.0);
        // ∫ log x = -1, ∫ x log x = -1/4, ∫ y · x log x = -1/8
        let one = Affine::constant(1.0);
        assert!((integral_of_log_term(&v, &x, &one, 0).unwrap() + 1.0).abs() < 1e-14);
        assert!((integral_of_log_term(&v, &x, &one, 1).unwrap() + 0.25).abs() < 1e-14);
        let y = Affine::new(0.0, 0.0, 1.0);
        assert!((integral_of_log_term(&v, &x, &y, 1).unwrap() + 0.125).abs() < 1e-14);
    }

    #[test]
    fn log_integral_on_a_triangle_matches_quadrature() {
        let v = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.5), Point::new(0.5, 1.5)];
        let lambda = Affine::new(0.1, 0.3, 0.4);
        let g = Affine::new(1.0, -0.2, 0.7);
        let exact = integral_of_log_term(&v, &lambda, &g, 1).unwrap();
        let quad = smooth_area_rule().integrate_polygon(&v, |x| {
            let l = lambda.eval(x);
            g.eval(x) * l * l.ln()
        });
        assert!((exact - quad).abs() < 1e-12, "{exact} vs {quad}");
        // skewed level sets with a vertex on the zero level; reference value
        // from adaptive integration
        let edge = Affine::new(0.0, -0.5, 2.0);
        let exact = integral_of_log_term(&v, &edge, &g, 0).unwrap();
        assert!((exact + 0.575_096_703_708_050_2).abs() < 1e-12, "{exact}");
    }

    #[test]
    fn edge_integral_on_square() {
        // λ = x: bottom and top contribute ∫ x log x = -1/4 each, right 0
        let v = edge_integral_lambda_log_lambda(&square(), &Affine::new(0.0, 1.0, 0.0));
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn square_energy_closed_form() {
        // ∫ log det = 4, ∫_{∂P} u⁰ dσ = -2, 4∫ u⁰ = -4: 𝓕 = -4 - 2 + 4
        let u = guillemin_potential(&square());
        let e = f_functional(&u, &ScalarField::constant(4.0)).unwrap();
        assert!((e.log_det - 4.0).abs() < 1e-10, "{}", e.log_det);
        assert!((e.boundary + 2.0).abs() < 1e-14);
        assert!((e.area + 4.0).abs() < 1e-13);
        assert!((e.total + 2.0).abs() < 1e-10);
    }

    #[test]
    fn affine_shift_leaves_energy_unchanged() {
        let mut u = guillemin_potential(&square());
        let a = ScalarField::constant(4.0);
        let before = f_functional(&u, &a).unwrap().total;
        u.analytic.linear = Affine::new(3.0, -1.0, 2.5);
        let after = f_functional(&u, &a).unwrap().total;
        assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn bumps_do_not_lower_the_square_energy() {
        use rand::{RngExt, SeedableRng};
        let u = guillemin_potential(&square()).with_grid(65).unwrap();
        let a = ScalarField::constant(4.0);
        let base = f_functional(&u, &a).unwrap().total;
        assert!((base + 2.0).abs() < 1e-10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho = 0.2;
        for _ in 0..20 {
            let c = Point::new(rng.random_range(0.25..0.75), rng.random_range(0.25..0.75));
            let amp = rng.random_range(-0.004..0.004);
            let mut v = u.clone();
            let corr = v.correction.as_mut().unwrap();
            corr.set_kept_values(|_, x| {
                let r2 = (x - c).norm_squared() / (rho * rho);
                if r2 < 1.0 {
                    amp * (-1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            });
            let e = f_functional(&v, &a).unwrap().total;
            assert!(e >= base, "{e} < {base}");
        }
    }
}
