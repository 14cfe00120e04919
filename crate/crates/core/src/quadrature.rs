//! Quadrature rules on segments, triangles and convex polygons.
//!
//! Polygon integrals go through a fan triangulation from the vertex
//! centroid. The 3-point edge-midpoint rule is exact for quadratics, which
//! keeps every balance residual (affine times affine integrands) exact up to
//! rounding. Smooth non-polynomial integrands use collapsed Gauss–Legendre
//! rules on each fan triangle, optionally subdivided.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::affine::cross;
use crate::Point;

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).unwrap();
        let gl = GaussLegendre::new(order);
        let (nodes, weights) = gl
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .unzip();
        Self { nodes, weights }
    }

    /// `∫_a^b f(t) dt`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(a + s * len))
            .sum::<f64>()
            * len
    }

    /// `∫_a^b f(t) dt` after the substitution `t = a + (b-a)(1 - cos πs)/2`,
    /// which absorbs `|t - a|^{-1/2}` and `|t - b|^{-1/2}` endpoint
    /// singularities.
    pub fn integrate_clustered(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        let pi = std::f64::consts::PI;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| {
                let t = 0.5 * (1.0 - (pi * s).cos());
                let dt = 0.5 * pi * (pi * s).sin();
                w * dt * f(a + t * len)
            })
            .sum::<f64>()
            * len
    }

    /// Line integral `∫_0^1 f(a + s (b - a)) ds · |b - a|`.
    pub fn integrate_segment(&self, a: &Point, b: &Point, mut f: impl FnMut(&Point) -> f64) -> f64 {
        let d = b - a;
        self.integrate(0.0, 1.0, |s| f(&(a + d * s))) * d.norm()
    }
}

/// A quadrature rule on the reference triangle `{ξ, η ≥ 0, ξ + η ≤ 1}`
/// (weights sum to 1/2).
#[derive(Clone, Debug)]
pub struct TriangleRule {
    points: Vec<(f64, f64, f64)>,
}

impl TriangleRule {
    /// Edge-midpoint rule, exact for polynomials of degree 2.
    pub fn degree2() -> Self {
        let w = 1.0 / 6.0;
        Self {
            points: vec![(0.5, 0.0, w), (0.5, 0.5, w), (0.0, 0.5, w)],
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule with `n × n` points, exact to
    /// degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let g = GaussRule::new(n);
        let mut points = Vec::with_capacity(n * n);
        for (&s, &ws) in g.nodes.iter().zip(&g.weights) {
            for (&t, &wt) in g.nodes.iter().zip(&g.weights) {
                // (s, t) in the unit square -> (ξ, η) = (s, (1 - s) t)
                points.push((s, (1.0 - s) * t, ws * wt * (1.0 - s)));
            }
        }
        Self { points }
    }

    /// The same rule applied on each of the `4^levels` congruent
    /// sub-triangles.
    pub fn subdivided(&self, levels: u32) -> Self {
        let mut tris = vec![[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(tris.len() * 4);
            for [a, b, c] in tris {
                let mid = |p: (f64, f64), q: (f64, f64)| (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1));
                let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                next.push([a, ab, ca]);
                next.push([ab, b, bc]);
                next.push([ca, bc, c]);
                next.push([ab, bc, ca]);
            }
            tris = next;
        }
        let mut points = Vec::with_capacity(tris.len() * self.points.len());
        for [a, b, c] in tris {
            let jac = ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs();
            for &(xi, eta, w) in &self.points {
                points.push((
                    a.0 + xi * (b.0 - a.0) + eta * (c.0 - a.0),
                    a.1 + xi * (b.1 - a.1) + eta * (c.1 - a.1),
                    w * jac,
                ));
            }
        }
        Self { points }
    }

    /// Physical nodes and weights on the triangle `(a, b, c)`.
    pub fn on_triangle<'a>(
        &'a self,
        a: &'a Point,
        b: &'a Point,
        c: &'a Point,
    ) -> impl Iterator<Item = (Point, f64)> + 'a {
        let jac = cross(a, b, c).abs();
        let (e1, e2) = (b - a, c - a);
        self.points
            .iter()
            .map(move |&(xi, eta, w)| (a + e1 * xi + e2 * eta, w * jac))
    }

    pub fn integrate_triangle(&self, a: &Point, b: &Point, c: &Point, mut f: impl FnMut(&Point) -> f64) -> f64 {
        self.on_triangle(a, b, c).map(|(x, w)| w * f(&x)).sum()
    }

    /// Nodes and weights covering a convex polygon by a fan from its vertex
    /// average.
    pub fn on_polygon(&self, vertices: &[Point]) -> Vec<(Point, f64)> {
        let n = vertices.len();
        let centre = vertices.iter().fold(Point::zeros(), |acc, v| acc + v) / n as f64;
        let mut out = Vec::with_capacity(n * self.points.len());
        for i in 0..n {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
            out.extend(self.on_triangle(&centre, a, b));
        }
        out
    }

    pub fn integrate_polygon(&self, vertices: &[Point], mut f: impl FnMut(&Point) -> f64) -> f64 {
        self.on_polygon(vertices).iter().map(|(x, w)| w * f(x)).sum()
    }

    /// A fan from `centre` in which each triangle's second reference
    /// vertex is `centre`, where collapsed rules cluster their nodes.
    pub fn on_polygon_about(&self, vertices: &[Point], centre: &Point) -> Vec<(Point, f64)> {
        let n = vertices.len();
        let mut out = Vec::with_capacity(n * self.points.len());
        for i in 0..n {
            out.extend(self.on_triangle(&vertices[i], centre, &vertices[(i + 1) % n]));
        }
        out
    }
}

/// Area, first and second moments of a convex polygon.
#[derive(Clone, Copy, Debug)]
pub struct Moments {
    pub area: f64,
    pub first: [f64; 2],
    /// `[∫x², ∫xy, ∫y²]`
    pub second: [f64; 3],
}

impl Moments {
    pub fn of(vertices: &[Point]) -> Self {
        let rule = TriangleRule::degree2();
        let mut m = Moments {
            area: 0.0,
            first: [0.0; 2],
            second: [0.0; 3],
        };
        for (x, w) in rule.on_polygon(vertices) {
            m.area += w;
            m.first[0] += w * x.x;
            m.first[1] += w * x.y;
            m.second[0] += w * x.x * x.x;
            m.second[1] += w * x.x * x.y;
            m.second[2] += w * x.y * x.y;
        }
        m
    }

    pub fn centroid(&self) -> Point {
        Point::new(self.first[0] / self.area, self.first[1] / self.area)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let g = GaussRule::new(4);
        let v = g.integrate(-1.0, 2.0, |t| t.powi(7) - 3.0 * t * t);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn clustered_rule_handles_inverse_sqrt_endpoints() {
        let g = GaussRule::new(24);
        let v = g.integrate_clustered(0.0, 1.0, |t| 1.0 / t.sqrt());
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        let w = g.integrate_clustered(0.0, 0.5, |t| 1.0 / (t * (1.0 - t)).sqrt());
        assert!((w - std::f64::consts::FRAC_PI_2).abs() < 1e-10, "{w}");
    }

    #[test]
    fn unit_square_moments() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let m = Moments::of(&sq);
        assert!((m.area - 1.0).abs() < 1e-15);
        assert!((m.first[0] - 0.5).abs() < 1e-15);
        assert!((m.second[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.second[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn collapsed_rule_integrates_smooth_functions() {
        let tri = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let rule = TriangleRule::collapsed(6);
        // ∫ x^4 y^3 over the simplex = 4! 3! / 9!
        let v = rule.integrate_triangle(&tri[0], &tri[1], &tri[2], |p| p.x.powi(4) * p.y.powi(3));
        assert!((v - 24.0 * 6.0 / 362_880.0).abs() < 1e-15);
        let sub = rule.subdivided(2);
        let e = sub.integrate_triangle(&tri[0], &tri[1], &tri[2], |p| (p.x + 2.0 * p.y).exp());
        // ∫∫ e^{x+2y} over simplex = (e^2 - 1)/2 - (e - 1)
        let exact = (std::f64::consts::E.powi(2) - 1.0) / 2.0 - (std::f64::consts::E - 1.0);
        assert!((e - exact).abs() < 1e-13, "{e} vs {exact}");
    }
}
