//! JSON polygon files.
//!
//! ```json
//! { "vertices": [[0,0],[1,0],[1,1],[0,1]],
//!   "weights": [1,1,1,1],
//!   "A": {"kind": "constant", "coeffs": [4]} }
//! ```

use serde::{Deserialize, Serialize};

use super::{canonical_weights, ScalarField, WeightedPolygon};
use crate::affine::Affine;
use crate::{Error, Point, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarFieldSpec {
    pub kind: String,
    pub coeffs: Vec<f64>,
}

impl ScalarFieldSpec {
    pub fn to_field(&self) -> Result<ScalarField> {
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Format("non-finite coefficient in A".into()));
        }
        match (self.kind.as_str(), self.coeffs.as_slice()) {
            ("constant", [c]) | ("constant", [c, 0.0, 0.0]) => Ok(ScalarField::constant(*c)),
            ("affine", [c, gx, gy]) => Ok(ScalarField::affine(Affine::new(*c, *gx, *gy))),
            (kind, coeffs) => Err(Error::Format(format!(
                "A must be constant with 1 coefficient or affine with 3, got {kind} with {}",
                coeffs.len()
            ))),
        }
    }

    pub fn from_field(a: &ScalarField) -> Option<Self> {
        match a {
            ScalarField::Constant { value } => Some(Self {
                kind: "constant".into(),
                coeffs: vec![*value],
            }),
            ScalarField::Affine { function } => Some(Self {
                kind: "affine".into(),
                coeffs: function.coeffs().to_vec(),
            }),
            ScalarField::Sampled(_) => None,
        }
    }
}

/// On-disk form of a weighted polygon with optional curvature target.
/// Missing weights mean canonical weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonFile {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ScalarFieldSpec>,
    /// Settings of the run that produced the file; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl PolygonFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_polygon(p: &WeightedPolygon, a: Option<&ScalarField>) -> Self {
        Self {
            vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
            weights: Some(p.weights().to_vec()),
            a: a.and_then(ScalarFieldSpec::from_field),
            config: None,
        }
    }

    pub fn points(&self) -> Vec<Point> {
        self.vertices.iter().map(|v| Point::new(v[0], v[1])).collect()
    }

    pub fn polygon(&self) -> Result<WeightedPolygon> {
        match &self.weights {
            Some(w) => WeightedPolygon::new(self.points(), w.clone()),
            None => canonical_weights(self.points()),
        }
    }

    pub fn field(&self) -> Result<Option<ScalarField>> {
        self.a.as_ref().map(|s| s.to_field()).transpose()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polygon files always serialize")
    }
}
