//! The balance functional `L_{A,σ}`, the energy `𝓕`, and probes of
//! positivity of `L_{A,σ}` on convex functions.

mod energy;
mod pl;
mod probe;

pub use energy::{
    edge_integral_lambda_log_lambda, f_functional, integral_of_log_term, log_det_integral, EnergyParts,
};
pub use pl::{area_integral_pl, boundary_integral_pl, l_functional_pl, PLConvexFunction};
pub use probe::{
    lambda_estimate, lambda_estimate_with_seed, probe_family, probe_min, stability_probe, LambdaEstimate,
    ProbeReport, DEFAULT_LAMBDA_SEED,
};


use crate::polygon::{area_rule, ScalarField, WeightedPolygon};
use crate::quadrature::{GaussRule, TriangleRule};
use crate::Point;

/// Area rule for smooth non-polynomial integrands.
pub(crate) fn smooth_area_rule() -> TriangleRule {
    TriangleRule::collapsed(8).subdivided(3)
}

/// Panels per edge in [`l_functional`].
const EDGE_PANELS: usize = 6;

/// `L_{A,σ} f = ∫_{∂P} f dσ - ∫_P A f dμ` by quadrature. The area rule
/// fans from the centroid and clusters there, so functions with a conical
/// point at the centroid are integrated to near machine precision. Edges
/// are split into panels in both integrals: an edge close to the centroid
/// relative to its length makes such functions nearly singular along it.
pub fn l_functional(p: &WeightedPolygon, a: &ScalarField, f: impl Fn(&Point) -> f64) -> f64 {
    let rule = GaussRule::new(32);
    let step = 1.0 / EDGE_PANELS as f64;
    let mut boundary = 0.0;
    let mut fan = Vec::with_capacity(p.n_edges() * EDGE_PANELS);
    for e in 0..p.n_edges() {
        let (u, v) = p.edge(e);
        for k in 0..EDGE_PANELS {
            let s0 = k as f64 * step;
            fan.push(u + (v - u) * s0);
            boundary += p.weights()[e] * rule.integrate(s0, s0 + step, |s| f(&(u + (v - u) * s)));
        }
    }
    let interior: f64 = TriangleRule::collapsed(32)
        .on_polygon_about(&fan, &p.centroid())
        .iter()
        .map(|(x, w)| w * a.eval(x) * f(x))
        .sum();
    boundary - interior
}

pub fn l_functional_with(
    p: &WeightedPolygon,
    a: &ScalarField,
    f: impl Fn(&Point) -> f64,
    edge_rule: &GaussRule,
    area: &TriangleRule,
) -> f64 {
    let boundary = p.boundary_integral_with(edge_rule, &f);
    let interior: f64 = area
        .on_polygon(p.vertices())
        .iter()
        .map(|(x, w)| w * a.eval(x) * f(x))
        .sum();
    boundary - interior
}

/// `L_{A,σ}` on affine `f`, exact.
pub fn l_functional_affine(p: &WeightedPolygon, a: &ScalarField, f: &crate::Affine) -> f64 {
    l_functional_with(p, a, |x| f.eval(x), &GaussRule::new(2), &area_rule(a))
}

const POLAR_PANEL: f64 = std::f64::consts::PI / 16.0;

/// `(1/6) ∮ f(R(θ), θ) R(θ)² dθ` in polar coordinates about the centroid,
/// integrated in the angle over each edge. Wide edges are split into
/// panels, since `R(θ)` grows steeply towards their ends.
pub fn polar_formula(p: &WeightedPolygon, f: impl Fn(&Point) -> f64) -> f64 {
    let c = p.centroid();
    let rule = GaussRule::new(24);
    let mut total = 0.0;
    for e in 0..p.n_edges() {
        let (a, b) = p.edge(e);
        let (ra, rb) = (a - c, b - c);
        let t0 = ra.y.atan2(ra.x);
        let mut t1 = rb.y.atan2(rb.x);
        if t1 < t0 {
            t1 += std::f64::consts::TAU;
        }
        let normal = p.inward_normal(e);
        // distance from the centre to the edge line
        let d = normal.dot(&(a - c)).abs();
        let panels = ((t1 - t0) / POLAR_PANEL).ceil().max(1.0) as usize;
        let width = (t1 - t0) / panels as f64;
        for k in 0..panels {
            let lo = t0 + k as f64 * width;
            total += rule.integrate(lo, lo + width, |t| {
                let dir = Point::new(t.cos(), t.sin());
                let r = d / (-normal).dot(&dir);
                f(&(c + dir * r)) * r * r
            });
        }
    }
    total / 6.0
}
