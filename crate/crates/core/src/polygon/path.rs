//! Deformation paths through balanced data.

use serde::Serialize;

use super::{balance_report, canonical_weights, ScalarField, WeightedPolygon};
use crate::{Error, Point, Result};

/// Relative residual accepted for a balanced endpoint.
const ENDPOINT_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct PathSample {
    pub t: f64,
    pub polygon: WeightedPolygon,
    pub a: ScalarField,
}

#[derive(Clone, Debug)]
pub struct ContinuityPath {
    pub samples: Vec<PathSample>,
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    t: f64,
    vertices: Vec<[f64; 2]>,
    weights: &'a [f64],
    #[serde(rename = "A")]
    a: &'a ScalarField,
    residual: f64,
}

impl ContinuityPath {
    /// Largest balance residual over all samples.
    pub fn max_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| balance_report(&s.polygon, &s.a).max_residual())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let records: Vec<_> = self
            .samples
            .iter()
            .map(|s| SampleRecord {
                t: s.t,
                vertices: s.polygon.vertices().iter().map(|v| [v.x, v.y]).collect(),
                weights: s.polygon.weights(),
                a: &s.a,
                residual: balance_report(&s.polygon, &s.a).max_residual(),
            })
            .collect();
        serde_json::json!({ "samples": records })
    }
}

fn check_balanced(p: &WeightedPolygon, a: &ScalarField) -> Result<()> {
    let r = balance_report(p, a);
    let residual = r.max_residual();
    if residual > ENDPOINT_TOL * (1.0 + r.boundary_mass.abs()) {
        return Err(Error::Unbalanced { residual });
    }
    Ok(())
}

fn lerp_weighted(
    from: &WeightedPolygon,
    to: &WeightedPolygon,
    from_a: &ScalarField,
    to_a: &ScalarField,
    s: f64,
) -> Result<(WeightedPolygon, ScalarField)> {
    let weights = from
        .weights()
        .iter()
        .zip(to.weights())
        .map(|(a, b)| (1.0 - s) * a + s * b)
        .collect();
    Ok((from.with_weights(weights)?, from_a.lerp(to_a, s)?))
}

/// A path of `steps` balanced samples from `(from, from_a)` to `(to, to_a)`.
///
/// On a common polygon the weights and curvature are interpolated linearly,
/// which keeps the linear balance constraints. Otherwise the path runs to
/// the canonical data of the first polygon, through canonical data of the
/// interpolated polygons, and out to the target data, each leg taking a
/// third of the parameter range.
pub fn continuity_path(
    from: &WeightedPolygon,
    from_a: &ScalarField,
    to: &WeightedPolygon,
    to_a: &ScalarField,
    steps: usize,
) -> Result<ContinuityPath> {
    if from.n_edges() != to.n_edges() {
        return Err(Error::VertexCountMismatch {
            from: from.n_edges(),
            to: to.n_edges(),
        });
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("a path needs at least 2 samples, got {steps}")));
    }
    check_balanced(from, from_a)?;
    check_balanced(to, to_a)?;

    let same_polygon = from.vertices() == to.vertices();
    let canon_from = canonical_weights(from.vertices().to_vec())?;
    let canon_to = canonical_weights(to.vertices().to_vec())?;
    let one = ScalarField::constant(1.0);

    let mut samples = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let (polygon, a) = if same_polygon {
            lerp_weighted(from, to, from_a, to_a, t)?
        } else if t <= 1.0 / 3.0 {
            lerp_weighted(from, &canon_from, from_a, &one, 3.0 * t)?
        } else if t < 2.0 / 3.0 {
            let s = 3.0 * t - 1.0;
            let vertices: Vec<Point> = from
                .vertices()
                .iter()
                .zip(to.vertices())
                .map(|(a, b)| a * (1.0 - s) + b * s)
                .collect();
            (canonical_weights(vertices)?, one.clone())
        } else {
            lerp_weighted(&canon_to, to, &one, to_a, 3.0 * t - 2.0)?
        };
        samples.push(PathSample { t, polygon, a });
    }
    Ok(ContinuityPath { samples })
}
