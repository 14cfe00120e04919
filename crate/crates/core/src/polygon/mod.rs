//! Weighted polygons: defining functions, boundary measure, balance.
//!
//! Edge `i` runs from `vertices[i]` to `vertices[i + 1]` and carries the
//! weight `weights[i]`. Its boundary measure is the constant multiple
//! `σ(E)/|E|` of arc length, and its defining function is
//! `λ_E(x) = ⟨n_E, x - v_i⟩ / s_E` with `n_E` the inward unit normal and
//! `s_E = σ(E)/|E|`, so that `∇_v λ_E = 1` for the inward normal `v` with
//! `|i_v dμ| = dσ_E`.

mod io;
mod path;
mod surgery;

pub use io::{PolygonFile, ScalarFieldSpec};
pub use path::{continuity_path, ContinuityPath, PathSample};
pub use surgery::{corner_cut, rebalance, Rebalanced};

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::affine::{cross, perp, Affine};
use crate::quadrature::{GaussRule, Moments, TriangleRule};
use crate::{Error, Point, Result};

/// Default Gauss–Legendre order for per-edge boundary integrals.
pub const EDGE_QUADRATURE_ORDER: usize = 8;

/// A convex polygon with a strictly positive weight on each edge.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPolygon {
    vertices: Vec<Point>,
    weights: Vec<f64>,
    defining: Vec<Affine>,
}

impl WeightedPolygon {
    /// Validates strict convexity, counter-clockwise order and positive
    /// weights.
    pub fn new(vertices: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        validate_vertices(&vertices)?;
        if weights.len() != vertices.len() {
            return Err(Error::WeightCount {
                vertices: vertices.len(),
                weights: weights.len(),
            });
        }
        for (edge, &weight) in weights.iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::BadWeight { edge, weight });
            }
        }
        let n = vertices.len();
        let defining = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let t = b - a;
                let len = t.norm();
                let normal = perp(&t) / len;
                let density = weights[i] / len;
                let grad = normal / density;
                Affine {
                    c: -grad.dot(&a),
                    grad,
                }
            })
            .collect();
        Ok(Self {
            vertices,
            weights,
            defining,
        })
    }

    /// Every edge weighted by 1.
    pub fn with_unit_weights(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        Self::new(vertices, vec![1.0; n])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_edges(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.n_edges();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        (b - a).norm()
    }

    /// Constant multiple of arc length giving `dσ` on edge `i`.
    pub fn edge_density(&self, i: usize) -> f64 {
        self.weights[i] / self.edge_length(i)
    }

    pub fn edge_midpoint(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        (a + b) * 0.5
    }

    /// The normalized defining function `λ_E` of edge `i`.
    pub fn defining_function(&self, i: usize) -> Affine {
        self.defining[i]
    }

    pub fn defining_functions(&self) -> &[Affine] {
        &self.defining
    }

    pub fn inward_normal(&self, i: usize) -> Vector2<f64> {
        let (a, b) = self.edge(i);
        perp(&(b - a)).normalize()
    }

    pub fn moments(&self) -> Moments {
        Moments::of(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.moments().area
    }

    /// Centre of mass for Lebesgue measure.
    pub fn centroid(&self) -> Point {
        self.moments().centroid()
    }

    pub fn boundary_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Centre of mass of `(∂P, dσ)`.
    pub fn boundary_centroid(&self) -> Point {
        let first = (0..self.n_edges()).fold(Point::zeros(), |acc, i| {
            acc + self.edge_midpoint(i) * self.weights[i]
        });
        first / self.boundary_mass()
    }

    /// `∫_{∂P} f dσ` with a per-edge Gauss rule.
    pub fn boundary_integral_with(&self, rule: &GaussRule, mut f: impl FnMut(&Point) -> f64) -> f64 {
        (0..self.n_edges())
            .map(|i| {
                let (a, b) = self.edge(i);
                self.weights[i] * rule.integrate(0.0, 1.0, |s| f(&(a + (b - a) * s)))
            })
            .sum()
    }

    pub fn boundary_integral(&self, f: impl FnMut(&Point) -> f64) -> f64 {
        self.boundary_integral_with(&GaussRule::new(EDGE_QUADRATURE_ORDER), f)
    }

    /// Smallest `λ_E(x)` over all edges; positive exactly inside.
    pub fn min_defining(&self, x: &Point) -> f64 {
        self.defining
            .iter()
            .map(|l| l.eval(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed Euclidean distance to the boundary (positive inside).
    pub fn signed_distance(&self, x: &Point) -> f64 {
        (0..self.n_edges())
            .map(|i| {
                let (a, _) = self.edge(i);
                self.inward_normal(i).dot(&(x - a))
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.signed_distance(x) > 0.0
    }

    /// Index of the edge nearest to `x` together with the foot point.
    pub fn nearest_boundary_point(&self, x: &Point) -> (usize, Point) {
        let mut best = (0, *x, f64::INFINITY);
        for i in 0..self.n_edges() {
            let (a, b) = self.edge(i);
            let t = ((x - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
            let foot = a + (b - a) * t;
            let d = (x - foot).norm();
            if d < best.2 {
                best = (i, foot, d);
            }
        }
        (best.0, best.1)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        bounding_box(&self.vertices)
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.vertices.clone(), weights)
    }
}

pub(crate) fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

pub(crate) fn validate_vertices(vertices: &[Point]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    if let Some(i) = vertices.iter().position(|v| !(v.x.is_finite() && v.y.is_finite())) {
        return Err(Error::NonFinite(i));
    }
    let (lo, hi) = bounding_box(vertices);
    let scale = (hi - lo).norm_squared();
    for i in 0..n {
        let prev = &vertices[(i + n - 1) % n];
        let next = &vertices[(i + 1) % n];
        if cross(prev, &vertices[i], next) <= 1e-12 * scale {
            return Err(Error::NonConvex { vertex: i });
        }
    }
    // Turning number one: interior angles must sum to (n-2)π.
    let mut turning = 0.0;
    for i in 0..n {
        let a = vertices[(i + 1) % n] - vertices[i];
        let b = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        turning += a.perp(&b).atan2(a.dot(&b));
    }
    if (turning - std::f64::consts::TAU).abs() > 1e-6 {
        return Err(Error::NonConvex { vertex: 0 });
    }
    Ok(())
}

/// Scalar curvature target `A` on the polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScalarField {
    Constant { value: f64 },
    Affine { function: Affine },
    Sampled(SampledField),
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        ScalarField::Constant { value }
    }

    pub fn affine(function: Affine) -> Self {
        ScalarField::Affine { function }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            ScalarField::Constant { value } => *value,
            ScalarField::Affine { function } => function.eval(x),
            ScalarField::Sampled(s) => s.eval(x),
        }
    }

    /// The affine representation, when there is one.
    pub fn as_affine(&self) -> Option<Affine> {
        match self {
            ScalarField::Constant { value } => Some(Affine::constant(*value)),
            ScalarField::Affine { function } => Some(*function),
            ScalarField::Sampled(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ScalarField::Constant { .. } => true,
            ScalarField::Affine { function } => function.is_constant(),
            ScalarField::Sampled(_) => false,
        }
    }

    /// `(1-t) self + t other`. Constant and affine fields combine in the
    /// smallest class containing both; sampled fields must share a lattice.
    pub fn lerp(&self, other: &ScalarField, t: f64) -> Result<ScalarField> {
        use ScalarField::*;
        Ok(match (self, other) {
            (Constant { value: a }, Constant { value: b }) => Constant {
                value: (1.0 - t) * a + t * b,
            },
            (Sampled(a), Sampled(b)) => Sampled(a.lerp(b, t)?),
            // bilinear interpolation reproduces affine functions exactly
            (Sampled(a), other) => Sampled(a.lerp(&a.resample(|x| other.eval(x)), t)?),
            (other, Sampled(b)) => Sampled(b.resample(|x| other.eval(x)).lerp(b, t)?),
            (a, b) => match (a.as_affine(), b.as_affine()) {
                (Some(fa), Some(fb)) => Affine {
                    function: fa.lerp(&fb, t),
                },
                _ => unreachable!("non-sampled fields are affine"),
            },
        })
    }

    /// Transport under `x ↦ λx` with `Ã(λx) = A(x)/λ`, the rule that keeps
    /// balance for weights `λσ`.
    pub fn rescaled(&self, lambda: f64) -> ScalarField {
        match self {
            ScalarField::Constant { value } => ScalarField::Constant {
                value: value / lambda,
            },
            ScalarField::Affine { function } => ScalarField::Affine {
                function: function.dilate(lambda).scale(1.0 / lambda),
            },
            ScalarField::Sampled(s) => ScalarField::Sampled(SampledField {
                origin: s.origin * lambda,
                h: s.h * lambda,
                nx: s.nx,
                ny: s.ny,
                values: s.values.iter().map(|v| v / lambda).collect(),
            }),
        }
    }
}

/// Bilinearly interpolated samples on a regular lattice (row-major in `x`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn from_fn(origin: Point, h: f64, nx: usize, ny: usize, f: impl Fn(&Point) -> f64) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(&(origin + Point::new(i as f64 * h, j as f64 * h))));
            }
        }
        Self {
            origin,
            h,
            nx,
            ny,
            values,
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let gx = ((x.x - self.origin.x) / self.h).clamp(0.0, (self.nx - 1) as f64);
        let gy = ((x.y - self.origin.y) / self.h).clamp(0.0, (self.ny - 1) as f64);
        let i = (gx.floor() as usize).min(self.nx.saturating_sub(2));
        let j = (gy.floor() as usize).min(self.ny.saturating_sub(2));
        let (fx, fy) = (gx - i as f64, gy - j as f64);
        let at = |i: usize, j: usize| self.values[j * self.nx + i];
        (1.0 - fx) * (1.0 - fy) * at(i, j)
            + fx * (1.0 - fy) * at(i + 1, j)
            + (1.0 - fx) * fy * at(i, j + 1)
            + fx * fy * at(i + 1, j + 1)
    }

    /// Another field on the same lattice.
    pub fn resample(&self, f: impl Fn(&Point) -> f64) -> SampledField {
        SampledField::from_fn(self.origin, self.h, self.nx, self.ny, f)
    }

    fn lerp(&self, other: &SampledField, t: f64) -> Result<SampledField> {
        if self.nx != other.nx || self.ny != other.ny || self.h != other.h || self.origin != other.origin {
            return Err(Error::InvalidParameter(
                "sampled fields live on different lattices".into(),
            ));
        }
        Ok(SampledField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
            ..self.clone()
        })
    }
}

/// Masses and centres of `(∂P, dσ)` and `(P, A dμ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub boundary_mass: f64,
    pub area_mass: f64,
    pub boundary_centroid: Point,
    pub weighted_centroid: Point,
    /// `L_{A,σ}` applied to `1, x¹, x²`.
    pub residual: [f64; 3],
}

impl BalanceReport {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

/// Area integral `∫_P g dμ` with a rule matched to the field: exact for
/// affine `A` times affine `g`, high order otherwise.
pub(crate) fn area_rule(a: &ScalarField) -> TriangleRule {
    match a {
        ScalarField::Sampled(_) => TriangleRule::collapsed(6).subdivided(4),
        _ => TriangleRule::degree2(),
    }
}

pub fn balance_report(p: &WeightedPolygon, a: &ScalarField) -> BalanceReport {
    let rule = area_rule(a);
    let (mut m0, mut mx, mut my) = (0.0, 0.0, 0.0);
    for (x, w) in rule.on_polygon(p.vertices()) {
        let v = w * a.eval(&x);
        m0 += v;
        mx += v * x.x;
        my += v * x.y;
    }
    let bm = p.boundary_mass();
    let bc = p.boundary_centroid();
    BalanceReport {
        boundary_mass: bm,
        area_mass: m0,
        boundary_centroid: bc,
        weighted_centroid: Point::new(mx / m0, my / m0),
        residual: [bm - m0, bm * bc.x - mx, bm * bc.y - my],
    }
}

/// The unique affine `A` making `(P, σ, A)` balanced.
pub fn unique_affine_a(p: &WeightedPolygon) -> Result<Affine> {
    let m = p.moments();
    let mat = Matrix3::new(
        m.area, m.first[0], m.first[1], //
        m.first[0], m.second[0], m.second[1], //
        m.first[1], m.second[1], m.second[2],
    );
    let bm = p.boundary_mass();
    let bc = p.boundary_centroid();
    let rhs = Vector3::new(bm, bm * bc.x, bm * bc.y);
    let sol = mat.lu().solve(&rhs).ok_or(Error::SingularMoments)?;
    if !sol.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularMoments);
    }
    Ok(Affine::new(sol[0], sol[1], sol[2]))
}

/// Canonical weights: each edge gets the area of the triangle it spans with
/// the centroid.
pub fn canonical_weights(vertices: Vec<Point>) -> Result<WeightedPolygon> {
    validate_vertices(&vertices)?;
    let c = Moments::of(&vertices).centroid();
    let n = vertices.len();
    let weights = (0..n)
        .map(|i| 0.5 * cross(&c, &vertices[i], &vertices[(i + 1) % n]))
        .collect();
    WeightedPolygon::new(vertices, weights)
}

/// `inf_q min_{E' ≠ E} λ_{E'}(q) / d(q)` over interior edge points `q`,
/// `d` the distance from `q` to the nearer endpoint of its edge.
///
/// On each half of an edge the ratio is an affine function with
/// non-negative intercept divided by a linear one, hence monotone and
/// minimized at the midpoint; the sampled scan is kept as a cross-check.
pub fn mu_invariant(p: &WeightedPolygon) -> f64 {
    let closed = mu_closed_form(p);
    let sampled = mu_sampled(p, 1024);
    closed.min(sampled)
}

pub(crate) fn mu_closed_form(p: &WeightedPolygon) -> f64 {
    let n = p.n_edges();
    let mut mu = f64::INFINITY;
    for e in 0..n {
        let m = p.edge_midpoint(e);
        let half = 0.5 * p.edge_length(e);
        for f in (0..n).filter(|&f| f != e) {
            mu = mu.min(p.defining_function(f).eval(&m) / half);
        }
    }
    mu
}

/// Brute-force scan over `samples` interior points per edge.
pub fn mu_sampled(p: &WeightedPolygon, samples: usize) -> f64 {
    let n = p.n_edges();
    let mut mu = f64::INFINITY;
    for e in 0..n {
        let (a, b) = p.edge(e);
        let len = p.edge_length(e);
        for k in 1..=samples {
            let s = k as f64 / (samples + 1) as f64;
            let q = a + (b - a) * s;
            let d = len * s.min(1.0 - s);
            for f in (0..n).filter(|&f| f != e) {
                mu = mu.min(p.defining_function(f).eval(&q) / d);
            }
        }
    }
    mu
}

/// Dilation `x ↦ λx` with weights scaled by `λ`.
pub fn rescale_polygon(p: &WeightedPolygon, lambda: f64) -> Result<WeightedPolygon> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rescale factor must be positive, got {lambda}"
        )));
    }
    WeightedPolygon::new(
        p.vertices.iter().map(|v| v * lambda).collect(),
        p.weights.iter().map(|w| w * lambda).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    fn simplex() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    /// Shoelace area of a triangle, independent of the polygon code.
    fn shoelace(a: Point, b: Point, c: Point) -> f64 {
        0.5 * ((a.x * b.y - b.x * a.y) + (b.x * c.y - c.x * b.y) + (c.x * a.y - a.x * c.y)).abs()
    }

    #[test]
    fn defining_functions_for_delzant_square() {
        let p = WeightedPolygon::with_unit_weights(square()).unwrap();
        let x = Point::new(0.3, 0.7);
        let vals: Vec<f64> = p.defining_functions().iter().map(|l| l.eval(&x)).collect();
        let expected = [0.7, 0.7, 0.3, 0.3];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn defining_function_normalization() {
        // ∇_v λ_E = 1 for v the inward normal of length σ(E)/|E|.
        let p = WeightedPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.5, 1.5)],
            vec![0.7, 1.3, 2.0],
        )
        .unwrap();
        for i in 0..3 {
            let l = p.defining_function(i);
            let v = p.inward_normal(i) * p.edge_density(i);
            assert!((l.grad.dot(&v) - 1.0).abs() < 1e-14);
            let (a, b) = p.edge(i);
            assert!(l.eval(&a).abs() < 1e-14 && l.eval(&b).abs() < 1e-14);
            assert!(l.eval(&p.centroid()) > 0.0);
        }
    }

    #[test]
    fn simplex_hypotenuse_is_one_minus_x_minus_y() {
        let p = WeightedPolygon::with_unit_weights(simplex()).unwrap();
        let l = p.defining_function(1);
        assert!((l.c - 1.0).abs() < 1e-14);
        assert!((l.grad.x + 1.0).abs() < 1e-14 && (l.grad.y + 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonconvex_and_clockwise() {
        let dart = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.3),
            Point::new(1.0, 2.0),
        ];
        assert!(matches!(
            WeightedPolygon::with_unit_weights(dart),
            Err(Error::NonConvex { vertex: 2 })
        ));
        let mut cw = square();
        cw.reverse();
        assert!(matches!(
            WeightedPolygon::with_unit_weights(cw),
            Err(Error::NonConvex { .. })
        ));
        let collinear = vec![
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(matches!(
            canonical_weights(collinear),
            Err(Error::NonConvex { vertex: 1 })
        ));
        assert!(matches!(
            WeightedPolygon::new(square(), vec![1.0, 1.0, 0.0, 1.0]),
            Err(Error::BadWeight { edge: 2, .. })
        ));
    }

    #[test]
    fn canonical_weights_of_unit_square() {
        let p = canonical_weights(square()).unwrap();
        for w in p.weights() {
            assert!((w - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn canonical_weights_of_simplex_match_shoelace() {
        let p = canonical_weights(simplex()).unwrap();
        let c = Point::new(1.0 / 3.0, 1.0 / 3.0);
        let v = simplex();
        for i in 0..3 {
            let expected = shoelace(c, v[i], v[(i + 1) % 3]);
            assert!((p.weights()[i] - expected).abs() < 1e-15);
        }
        // all three are 1/6
        assert!((p.weights()[1] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn balance_examples() {
        let sq = WeightedPolygon::with_unit_weights(square()).unwrap();
        let r = balance_report(&sq, &ScalarField::constant(4.0));
        assert!(r.max_residual() < 1e-14, "{:?}", r.residual);

        let sx = WeightedPolygon::with_unit_weights(simplex()).unwrap();
        let r = balance_report(&sx, &ScalarField::constant(6.0));
        assert!((r.boundary_mass - 3.0).abs() < 1e-15);
        assert!((r.area_mass - 3.0).abs() < 1e-14);
        assert!((r.boundary_centroid - Point::new(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
        assert!(r.max_residual() < 1e-14);

        let hex = canonical_weights(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, -0.5),
            Point::new(3.0, 0.5),
            Point::new(2.5, 2.0),
            Point::new(0.5, 2.5),
            Point::new(-0.5, 1.0),
        ])
        .unwrap();
        let r = balance_report(&hex, &ScalarField::constant(1.0));
        assert!(r.max_residual() < 1e-12);
        // an unbalanced pairing is reported, not rejected
        let r = balance_report(&hex, &ScalarField::constant(2.0));
        assert!(r.max_residual() > 1.0);
    }

    #[test]
    fn unique_affine_examples() {
        let canon = canonical_weights(simplex()).unwrap();
        let a = unique_affine_a(&canon).unwrap();
        assert!((a.c - 1.0).abs() < 1e-12 && a.grad.norm() < 1e-12);

        let sq = WeightedPolygon::with_unit_weights(square()).unwrap();
        let a = unique_affine_a(&sq).unwrap();
        assert!((a.c - 4.0).abs() < 1e-12 && a.grad.norm() < 1e-12);

        // doubling the right edge x=1 tilts A along x
        let tilted = sq.with_weights(vec![1.0, 2.0, 1.0, 1.0]).unwrap();
        let a = unique_affine_a(&tilted).unwrap();
        // Oracle: solve the 3x3 moment system by hand for the square.
        // mass: a0 + a1/2 + a2/2 = 5; x: a0/2 + a1/3 + a2/4 = 2 + 1/2 + ... (see below)
        let bm = 5.0;
        let bx = 1.0 * 0.5 + 2.0 * 1.0 + 1.0 * 0.5 + 0.0;
        let by = 0.0 + 2.0 * 0.5 + 1.0 * 1.0 + 1.0 * 0.5;
        let m = Matrix3::new(1.0, 0.5, 0.5, 0.5, 1.0 / 3.0, 0.25, 0.5, 0.25, 1.0 / 3.0);
        let sol = m.try_inverse().unwrap() * Vector3::new(bm, bx, by);
        assert!((a.c - sol[0]).abs() < 1e-12);
        assert!((a.grad.x - sol[1]).abs() < 1e-12);
        assert!(a.grad.y.abs() < 1e-12);
        assert!(a.grad.x > 0.0);
        let r = balance_report(&tilted, &ScalarField::affine(a));
        assert!(r.max_residual() < 1e-12);
    }

    #[test]
    fn mu_examples() {
        let sx = WeightedPolygon::with_unit_weights(simplex()).unwrap();
        assert!((mu_invariant(&sx) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let sq = WeightedPolygon::with_unit_weights(square()).unwrap();
        assert!((mu_invariant(&sq) - 1.0).abs() < 1e-12);
        // the sampled scan never undercuts the closed form
        let hex = canonical_weights(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, -0.5),
            Point::new(3.0, 0.5),
            Point::new(2.5, 2.0),
            Point::new(0.5, 2.5),
            Point::new(-0.5, 1.0),
        ])
        .unwrap();
        assert!(mu_sampled(&hex, 1024) >= mu_closed_form(&hex) - 1e-12);
    }

    #[test]
    fn rescale_examples() {
        let sq = WeightedPolygon::with_unit_weights(square()).unwrap();
        assert_eq!(rescale_polygon(&sq, 1.0).unwrap(), sq);
        let big = rescale_polygon(&sq, 2.0).unwrap();
        assert_eq!(big.vertices()[2], Point::new(2.0, 2.0));
        assert!(big.weights().iter().all(|&w| w == 2.0));
        assert_eq!(mu_invariant(&big), mu_invariant(&sq));
        assert!(rescale_polygon(&sq, 0.0).is_err());
        assert!(rescale_polygon(&sq, -1.0).is_err());
    }

    #[test]
    fn sampled_field_interpolates_affine_exactly() {
        let f = SampledField::from_fn(Point::new(0.0, 0.0), 0.1, 11, 11, |x| 1.0 + 2.0 * x.x - x.y);
        let v = f.eval(&Point::new(0.33, 0.71));
        assert!((v - (1.0 + 0.66 - 0.71)).abs() < 1e-14);
    }
}
