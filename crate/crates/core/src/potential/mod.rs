//! Symplectic potentials `u = u₀ + f`: an exact canonical part carrying the
//! boundary singularities and a smooth correction sampled on a lattice.

mod analytic;
mod io;
mod lattice;
mod legendre;
mod tensor;

pub use analytic::{AnalyticPotential, Jet, LogTerm};
pub use io::{read_grid_csv, write_grid_csv, write_tensor_csv, GridRecord};
pub use lattice::{Correction, Lattice};
pub use legendre::{legendre_transform, LegendreTransform, VertexChart};
pub use tensor::{
    abreu_of, curvature_norm_sq, min_eigenvalue, tensor_samples, Curvature4, NodeSample, PointCurvature,
    TensorSamples,
};

pub(crate) use lattice::{second_differences, HESSIAN_STENCIL};
pub(crate) use tensor::{checked_inverse, CorrectedFields};

use nalgebra::{Matrix2, Vector2};

use crate::affine::{perp, Affine};
use crate::polygon::{bounding_box, rescale_polygon, WeightedPolygon};
use crate::quadrature::Moments;
use crate::{Error, Point, Result};

/// Where a potential lives. Model domains are unbounded and carry a
/// truncation `extent`; their true edges are the coordinate axes.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Polygon(WeightedPolygon),
    /// `{x¹, x² > 0}` truncated to `[0, extent]²`.
    Quadrant { extent: f64 },
    /// `{x¹ > 0}` truncated to `[0, extent] × [-extent, extent]`.
    HalfPlane { extent: f64 },
}

impl Domain {
    /// Vertices (counter-clockwise) of the truncated region.
    pub fn region(&self) -> Vec<Point> {
        match self {
            Domain::Polygon(p) => p.vertices().to_vec(),
            Domain::Quadrant { extent: r } => vec![
                Point::new(0.0, 0.0),
                Point::new(*r, 0.0),
                Point::new(*r, *r),
                Point::new(0.0, *r),
            ],
            Domain::HalfPlane { extent: r } => vec![
                Point::new(0.0, -r),
                Point::new(*r, -r),
                Point::new(*r, *r),
                Point::new(0.0, *r),
            ],
        }
    }

    /// Defining functions of the genuine edges (not the truncation).
    pub fn edges(&self) -> Vec<Affine> {
        match self {
            Domain::Polygon(p) => p.defining_functions().to_vec(),
            Domain::Quadrant { .. } => vec![Affine::new(0.0, 0.0, 1.0), Affine::new(0.0, 1.0, 0.0)],
            Domain::HalfPlane { .. } => vec![Affine::new(0.0, 1.0, 0.0)],
        }
    }

    pub fn polygon(&self) -> Option<&WeightedPolygon> {
        match self {
            Domain::Polygon(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Domain::Polygon(_))
    }

    fn half_planes(&self) -> Vec<(Point, Vector2<f64>)> {
        let v = self.region();
        let n = v.len();
        (0..n)
            .map(|i| (v[i], perp(&(v[(i + 1) % n] - v[i])).normalize()))
            .collect()
    }

    /// Euclidean distance to the region boundary, negative outside.
    pub fn depth(&self, x: &Point) -> f64 {
        self.half_planes()
            .iter()
            .map(|(a, n)| n.dot(&(x - a)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.depth(x) > 0.0
    }

    /// Largest `t` with `x + s·dir` inside the closed region for `s ≤ t`.
    pub fn exit_time(&self, x: &Point, dir: &Vector2<f64>) -> f64 {
        self.half_planes()
            .iter()
            .filter_map(|(a, n)| {
                let rate = n.dot(dir);
                (rate < 0.0).then(|| n.dot(&(x - a)) / -rate)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance to the genuine boundary.
    pub fn distance_to_edges(&self, x: &Point) -> f64 {
        match self {
            Domain::Polygon(p) => p.signed_distance(x),
            Domain::Quadrant { .. } => x.x.min(x.y),
            Domain::HalfPlane { .. } => x.x,
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        bounding_box(&self.region())
    }

    pub fn centroid(&self) -> Point {
        Moments::of(&self.region()).centroid()
    }

    pub fn rescaled(&self, s: f64) -> Result<Domain> {
        Ok(match self {
            Domain::Polygon(p) => Domain::Polygon(rescale_polygon(p, s)?),
            Domain::Quadrant { extent } => Domain::Quadrant { extent: extent * s },
            Domain::HalfPlane { extent } => Domain::HalfPlane { extent: extent * s },
        })
    }
}

/// A symplectic potential on a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    pub domain: Domain,
    pub analytic: AnalyticPotential,
    pub correction: Option<Correction>,
}

impl PotentialField {
    pub fn new(domain: Domain, analytic: AnalyticPotential) -> Self {
        Self {
            domain,
            analytic,
            correction: None,
        }
    }

    /// A zero correction on an `n`-node lattice covering the domain.
    pub fn empty_correction(&self, n: usize) -> Result<Correction> {
        let (lo, hi) = self.domain.bounding_box();
        let lattice = Lattice::covering(lo, hi, n)?;
        Correction::zero(lattice, |x| self.domain.depth(x), &self.domain.centroid())
    }

    /// Attaches a zero correction so the potential can be modified on a grid.
    pub fn with_grid(mut self, n: usize) -> Result<Self> {
        self.correction = Some(self.empty_correction(n)?);
        Ok(self)
    }

    pub fn with_correction(mut self, c: Correction) -> Self {
        self.correction = Some(c);
        self
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        let v = self.analytic.value(x)?;
        Ok(v + self.correction.as_ref().map_or(0.0, |c| c.evaluate(x).0))
    }

    pub fn gradient(&self, x: &Point) -> Result<Vector2<f64>> {
        let g = self.analytic.gradient(x)?;
        Ok(g + self.correction.as_ref().map_or(Vector2::zeros(), |c| c.evaluate(x).1))
    }

    pub fn hessian(&self, x: &Point) -> Result<Matrix2<f64>> {
        let h = self.analytic.hessian(x)?;
        Ok(h + self.correction.as_ref().map_or(Matrix2::zeros(), |c| c.evaluate(x).2))
    }

    /// Exact pointwise curvature; needs a potential without correction.
    pub fn curvature_at(&self, x: &Point) -> Result<PointCurvature> {
        if self.correction.is_some() {
            return Err(Error::Precondition(
                "pointwise curvature needs a closed-form potential; use tensor samples".into(),
            ));
        }
        PointCurvature::from_jet(&self.analytic.jet(x)?, x)
    }
}

/// `u₀ = Σ_E λ_E log λ_E`.
pub fn guillemin_potential(p: &WeightedPolygon) -> PotentialField {
    PotentialField::new(
        Domain::Polygon(p.clone()),
        AnalyticPotential::sum_of_logs(p.defining_functions()),
    )
}

fn check_extent(extent: f64) -> Result<()> {
    if extent.is_finite() && extent > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("truncation must be positive, got {extent}")))
    }
}

/// `x¹ log x¹ + x² log x²` on the quadrant.
pub fn quarter_plane_model(extent: f64) -> Result<PotentialField> {
    check_extent(extent)?;
    let d = Domain::Quadrant { extent };
    Ok(PotentialField::new(d.clone(), AnalyticPotential::sum_of_logs(&d.edges())))
}

/// `x¹ log x¹ + (x²)²/2` on the half-plane.
pub fn half_plane_model(extent: f64) -> Result<PotentialField> {
    check_extent(extent)?;
    let d = Domain::HalfPlane { extent };
    Ok(PotentialField::new(
        d.clone(),
        AnalyticPotential::sum_of_logs(&d.edges()).with_quadratic(Matrix2::new(0.0, 0.0, 0.0, 1.0)),
    ))
}

/// `ũ(x) = s · u(x / s)` on the dilated domain.
pub fn rescale_potential(u: &PotentialField, s: f64) -> Result<PotentialField> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter(format!("rescale factor must be positive, got {s}")));
    }
    Ok(PotentialField {
        domain: u.domain.rescaled(s)?,
        analytic: u.analytic.rescaled(s),
        correction: u.correction.as_ref().map(|c| c.rescaled(s)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn guillemin_examples() {
        let u = guillemin_potential(&square());
        let (x, y) = (0.2, 0.9);
        let ent = |t: f64| t * t.ln() + (1.0 - t) * (1.0 - t).ln();
        assert!((u.value(&Point::new(x, y)).unwrap() - ent(x) - ent(y)).abs() < 1e-15);

        let tri = WeightedPolygon::with_unit_weights(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let u = guillemin_potential(&tri);
        let p = Point::new(0.3, 0.5);
        let z: f64 = 1.0 - 0.3 - 0.5;
        let expect = 0.3 * f64::ln(0.3) + 0.5 * f64::ln(0.5) + z * z.ln();
        assert!((u.value(&p).unwrap() - expect).abs() < 1e-15);

        let q = quarter_plane_model(2.0).unwrap();
        let p = Point::new(0.1, 0.05);
        assert!((q.value(&p).unwrap() - (0.1 * f64::ln(0.1) + 0.05 * f64::ln(0.05))).abs() < 1e-16);
    }

    #[test]
    fn models_are_scalar_flat() {
        let q = quarter_plane_model(4.0).unwrap();
        let h = half_plane_model(4.0).unwrap();
        for p in [Point::new(0.3, 0.2), Point::new(2.0, 3.5), Point::new(1.0, 1.0)] {
            for u in [&q, &h] {
                let c = u.curvature_at(&p).unwrap();
                assert!(c.abreu.abs() < 1e-13 && c.abs_f < 1e-13);
            }
        }
        assert!(quarter_plane_model(0.0).is_err());
        assert!(half_plane_model(-1.0).is_err());
    }

    #[test]
    fn rescale_identity_and_exponent() {
        let u = guillemin_potential(&square());
        assert_eq!(rescale_potential(&u, 1.0).unwrap(), u);
        let s = 2.0;
        let v = rescale_potential(&u, s).unwrap();
        let p = Point::new(0.3, 0.6);
        let (c, cs) = (u.curvature_at(&p).unwrap(), v.curvature_at(&(p * s)).unwrap());
        // curvature and scalar curvature both scale by 1/s
        assert!((cs.abs_f - c.abs_f / s).abs() < 1e-12);
        assert!((cs.abreu - c.abreu / s).abs() < 1e-12);
        assert!(rescale_potential(&u, 0.0).is_err());
    }

    #[test]
    fn domain_geometry() {
        let d = Domain::HalfPlane { extent: 10.0 };
        let p = Point::new(0.5, 0.0);
        assert!((d.exit_time(&p, &Vector2::new(-1.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!((d.exit_time(&p, &Vector2::new(0.0, 1.0)) - 10.0).abs() < 1e-15);
        assert!((d.distance_to_edges(&p) - 0.5).abs() < 1e-15);
        assert!(d.contains(&p) && !d.contains(&Point::new(-0.1, 0.0)));
    }
}
