//! Piecewise-linear convex functions and their exact integrals.

use serde::{Deserialize, Serialize};

use crate::affine::Affine;
use crate::polygon::{ScalarField, WeightedPolygon};
use crate::quadrature::TriangleRule;
use crate::{Error, Point, Result};

/// `x ↦ max_k piece_k(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLConvexFunction {
    pieces: Vec<Affine>,
}

impl PLConvexFunction {
    pub fn new(pieces: Vec<Affine>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter("a PL function needs at least one piece".into()));
        }
        Ok(Self { pieces })
    }

    /// `max(0, ℓ)`.
    pub fn crease(l: Affine) -> Self {
        Self {
            pieces: vec![Affine::ZERO, l],
        }
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.pieces.iter().map(|p| p.eval(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the piece attaining the maximum at `x`.
    pub fn active(&self, x: &Point) -> usize {
        let mut best = 0;
        for (k, p) in self.pieces.iter().enumerate() {
            if p.eval(x) > self.pieces[best].eval(x) {
                best = k;
            }
        }
        best
    }

    pub fn map_pieces(&self, f: impl Fn(&Affine) -> Affine) -> Self {
        Self {
            pieces: self.pieces.iter().map(f).collect(),
        }
    }

    /// The region of `polygon` where piece `k` is the maximum.
    pub fn cell(&self, polygon: &[Point], k: usize) -> Vec<Point> {
        let mut cell = polygon.to_vec();
        for (m, other) in self.pieces.iter().enumerate() {
            if m == k || cell.is_empty() {
                continue;
            }
            let diff = self.pieces[k].add(&other.scale(-1.0));
            // ties go to the lower index
            if m < k && diff.grad.norm() == 0.0 && diff.c <= 0.0 {
                return Vec::new();
            }
            cell = clip(&cell, &diff);
        }
        cell
    }

    /// Cells with positive area, paired with the active piece.
    pub fn cells(&self, polygon: &[Point]) -> Vec<(usize, Vec<Point>)> {
        let scale = {
            let (lo, hi) = crate::polygon::bounding_box(polygon);
            (hi - lo).norm_squared()
        };
        (0..self.pieces.len())
            .filter_map(|k| {
                let c = self.cell(polygon, k);
                (c.len() >= 3 && polygon_area(&c) > 1e-13 * scale).then_some((k, c))
            })
            .collect()
    }

    /// Whether the function is affine on the polygon.
    pub fn is_affine_on(&self, polygon: &[Point]) -> bool {
        self.cells(polygon).len() <= 1
    }

    /// `sup |f|` over the polygon, attained at a cell vertex.
    pub fn sup_norm(&self, polygon: &[Point]) -> f64 {
        self.cells(polygon)
            .iter()
            .flat_map(|(_, c)| c.iter())
            .map(|x| self.eval(x).abs())
            .fold(0.0, f64::max)
    }
}

/// Part of the convex polygon where `g ≥ 0`.
pub(crate) fn clip(poly: &[Point], g: &Affine) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (ga, gb) = (g.eval(&a), g.eval(&b));
        if ga >= 0.0 {
            out.push(a);
        }
        if (ga >= 0.0) != (gb >= 0.0) {
            let t = ga / (ga - gb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

pub(crate) fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| poly[i].perp(&poly[(i + 1) % n]))
        .sum::<f64>()
}

/// `∫_{∂P} f dσ` exactly: `f` is affine between breakpoints on each edge.
pub fn boundary_integral_pl(p: &WeightedPolygon, f: &PLConvexFunction) -> f64 {
    let mut total = 0.0;
    for e in 0..p.n_edges() {
        let (a, b) = p.edge(e);
        let mut ts = vec![0.0, 1.0];
        for (i, pi) in f.pieces().iter().enumerate() {
            for pj in &f.pieces()[i + 1..] {
                let d = pi.add(&pj.scale(-1.0));
                let (da, db) = (d.eval(&a), d.eval(&b));
                if (da > 0.0) != (db > 0.0) && da != db {
                    ts.push(da / (da - db));
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        let mut edge = 0.0;
        for w in ts.windows(2) {
            let mid = a + (b - a) * (0.5 * (w[0] + w[1]));
            edge += (w[1] - w[0]) * f.eval(&mid);
        }
        total += p.weights()[e] * edge;
    }
    total
}

/// `∫_P A f dμ`, exact for affine `A`.
pub fn area_integral_pl(p: &WeightedPolygon, a: &ScalarField, f: &PLConvexFunction) -> f64 {
    let rule = match a {
        ScalarField::Sampled(_) => TriangleRule::collapsed(6).subdivided(2),
        _ => TriangleRule::degree2(),
    };
    f.cells(p.vertices())
        .iter()
        .map(|(k, cell)| {
            let piece = f.pieces()[*k];
            rule.integrate_polygon(cell, |x| a.eval(x) * piece.eval(x))
        })
        .sum()
}

/// `L_{A,σ} f` computed cell by cell.
pub fn l_functional_pl(p: &WeightedPolygon, a: &ScalarField, f: &PLConvexFunction) -> f64 {
    boundary_integral_pl(p, f) - area_integral_pl(p, a, f)
}
