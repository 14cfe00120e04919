//! The energy flux vector and the harmonicity of `det(u_ij)⁻¹`.
//!
//! With `F^{ij}_{kl} = ∂_k∂_l u^{ij}` and `b^m = ∂_i u^{im}`, the flux is
//!
//! `ν^m = F^{mj}_{kl} ∂_j u^{kl} - F^{ij}_{il} ∂_j u^{ml} + b^j ∂_j b^m`,
//!
//! whose divergence is `|F|² + u^{mj} ∂_m∂_j(u^{ik}_{ik})`. On a potential
//! of constant scalar curvature the divergence is therefore `|F|²`, so the
//! energy of a region equals the outward flux through its boundary.

use nalgebra::Vector2;

use super::{digest_of, max_abreu, IdentityReport, SCALAR_FLAT_TOL};
use crate::potential::{tensor_samples, Domain, PointCurvature, PotentialField};
use crate::quadrature::{GaussRule, TriangleRule};
use crate::{Error, Point, Result};

fn flux_of(c: &PointCurvature) -> Vector2<f64> {
    let f = &c.f;
    let d = &c.d_inv;
    let b = Vector2::from_fn(|m, _| (0..2).map(|i| d[i][(i, m)]).sum::<f64>());
    Vector2::from_fn(|m, _| {
        let mut nu = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    nu += f[k][l][(m, j)] * d[j][(k, l)];
                    nu -= f[j][l][(j, k)] * d[k][(m, l)];
                }
            }
            let db = (0..2).map(|i| f[i][j][(i, m)]).sum::<f64>();
            nu += b[j] * db;
        }
        nu
    })
}

/// The flux vector `ν` at `x`, from closed-form derivatives.
pub fn flux_vector(u: &PotentialField, x: &Point) -> Result<Vector2<f64>> {
    Ok(flux_of(&u.curvature_at(x)?))
}

const QUAD_ORDER: usize = 16;

/// Energy `∫|F|²` over a polygon and the outward flux of `ν` through its
/// boundary.
fn energy_and_flux(u: &PotentialField, vertices: &[Point]) -> Result<(f64, f64)> {
    let rule = TriangleRule::collapsed(QUAD_ORDER);
    let mut energy = 0.0;
    for (x, w) in rule.on_polygon(vertices) {
        energy += w * u.curvature_at(&x)?.norm_sq();
    }
    let n = vertices.len();
    let orientation = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            a.x * b.y - a.y * b.x
        })
        .sum::<f64>()
        .signum();
    let gauss = GaussRule::new(QUAD_ORDER);
    let mut flux = 0.0;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        let t = b - a;
        let outward = Vector2::new(t.y, -t.x) * orientation / t.norm();
        for (s, w) in gauss.nodes.iter().zip(&gauss.weights) {
            let x = a + t * *s;
            flux += w * t.norm() * flux_vector(u, &x)?.dot(&outward);
        }
    }
    Ok((energy, flux))
}

const FLUX_TOL: f64 = 1e-8;

/// `∫_{Ω(R)} |F|²` against the flux of `ν` through the segment
/// `x¹ + x² = R` of a scalar-flat quarter-plane potential, where
/// `Ω(R) = {x¹, x² ≥ 0, x¹ + x² ≤ R}`. The edges on the axes carry no flux
/// under the boundary behaviour of the model.
pub fn flux_identity(u: &PotentialField, r: f64) -> Result<IdentityReport> {
    let Domain::Quadrant { extent } = u.domain else {
        return Err(Error::Precondition("the flux identity needs a quarter-plane potential".into()));
    };
    if !(r > 0.0 && r <= extent) {
        return Err(Error::InvalidParameter(format!("R must lie in (0, {extent}]")));
    }
    let (o, a, b) = (Point::new(0.0, 0.0), Point::new(r, 0.0), Point::new(0.0, r));
    let rule = TriangleRule::collapsed(QUAD_ORDER);
    let points: Vec<(Point, f64)> = rule.on_triangle(&o, &a, &b).collect();
    let flat = max_abreu(u, &points.iter().map(|p| p.0).collect::<Vec<_>>())?;
    if flat > SCALAR_FLAT_TOL {
        return Err(Error::Precondition(format!(
            "potential is not scalar-flat (|u^ij_ij| up to {flat:e})"
        )));
    }
    let mut lhs = 0.0;
    for (x, w) in &points {
        lhs += w * u.curvature_at(x)?.norm_sq();
    }
    let n = Vector2::new(1.0, 1.0) / 2f64.sqrt();
    let gauss = GaussRule::new(QUAD_ORDER);
    let mut rhs = 0.0;
    for (s, w) in gauss.nodes.iter().zip(&gauss.weights) {
        let x = a + (b - a) * *s;
        rhs += w * (b - a).norm() * flux_vector(u, &x)?.dot(&n);
    }
    let pass = (lhs - rhs).abs() <= FLUX_TOL * (1.0 + lhs.abs());
    Ok(IdentityReport::new("flux", digest_of("flux", Some(u), &[r]), lhs, rhs, FLUX_TOL, pass))
}

/// Energy of the polygon `vertices` against the outward flux through its
/// boundary, for a potential of constant scalar curvature on it.
pub fn flux_balance(u: &PotentialField, vertices: &[Point]) -> Result<IdentityReport> {
    if vertices.len() < 3 {
        return Err(Error::InvalidParameter("a region needs at least three vertices".into()));
    }
    if let Some(x) = vertices.iter().find(|x| !u.domain.contains(x)) {
        return Err(Error::OutsideDomain { at: *x });
    }
    let rule = TriangleRule::collapsed(QUAD_ORDER);
    let abreu: Vec<f64> = rule
        .on_polygon(vertices)
        .iter()
        .map(|(x, _)| Ok(u.curvature_at(x)?.abreu))
        .collect::<Result<_>>()?;
    let (lo, hi) = abreu
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    if hi - lo > SCALAR_FLAT_TOL * (1.0 + hi.abs()) {
        return Err(Error::Precondition(format!(
            "scalar curvature varies over the region ({lo} to {hi})"
        )));
    }
    let (lhs, rhs) = energy_and_flux(u, vertices)?;
    let pass = (lhs - rhs).abs() <= FLUX_TOL * (1.0 + lhs.abs());
    let args: Vec<f64> = vertices.iter().flat_map(|v| [v.x, v.y]).collect();
    Ok(IdentityReport::new("flux_balance", digest_of("flux_balance", Some(u), &args), lhs, rhs, FLUX_TOL, pass))
}

const HARMONIC_TOL: f64 = 1e-12;

/// `max |u^{ij} G_ij|` over the interior nodes of an `n × n` lattice, with
/// `G = det(u^{ij}) = det(u_ij)⁻¹` differentiated in closed form. Reports
/// `rhs = 0`.
pub fn f_harmonic_check(u: &PotentialField, n: usize) -> Result<IdentityReport> {
    if u.correction.is_some() {
        return Err(Error::Precondition(
            "the harmonicity check needs a closed-form potential".into(),
        ));
    }
    let samples = tensor_samples(u, n)?;
    let flat = samples.nodes.iter().map(|s| s.curvature.abreu.abs()).fold(0.0, f64::max);
    if flat > SCALAR_FLAT_TOL {
        return Err(Error::Precondition(format!(
            "potential is not scalar-flat (|u^ij_ij| up to {flat:e})"
        )));
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for s in &samples.nodes {
        let c = &s.curvature;
        let (v, d, f) = (&c.inv, &c.d_inv, &c.f);
        let mut trace = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let g = f[i][j][(0, 0)] * v[(1, 1)] + v[(0, 0)] * f[i][j][(1, 1)]
                    + d[i][(0, 0)] * d[j][(1, 1)]
                    + d[j][(0, 0)] * d[i][(1, 1)]
                    - 2.0 * (d[i][(0, 1)] * d[j][(0, 1)] + v[(0, 1)] * f[i][j][(0, 1)]);
                trace += v[(i, j)] * g;
            }
        }
        worst = worst.max(trace.abs());
        scale = scale.max(v.determinant().abs());
    }
    let pass = worst <= HARMONIC_TOL * scale.max(1.0);
    Ok(IdentityReport::new(
        "f_harmonic",
        digest_of("f_harmonic", Some(u), &[n as f64]),
        worst,
        0.0,
        HARMONIC_TOL,
        pass,
    )
    .with_details(serde_json::json!({ "nodes": samples.nodes.len(), "max_det_inverse": scale })))
}
