//! JSON description of a solve.
//!
//! ```json
//! { "polygon": "square.json", "grid": 33, "tol": 1e-6,
//!   "path": { "target": "cut.json", "samples": 6 } }
//! ```
//!
//! File names are resolved against the manifest's directory. Without `A`
//! the polygon file's target is used, and failing that the unique balanced
//! affine function.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{continue_path, solve, Continuation, SolveState, SolverOptions};
use crate::polygon::{continuity_path, unique_affine_a, ContinuityPath, PolygonFile, ScalarField, ScalarFieldSpec, WeightedPolygon};
use crate::potential::guillemin_potential;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub target: PathBuf,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveManifest {
    pub polygon: PathBuf,
    #[serde(rename = "A", default)]
    pub a: Option<ScalarFieldSpec>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub step_tol: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub path: Option<PathSpec>,
}

fn default_grid() -> usize {
    33
}

pub enum SolveOutcome {
    Single(Box<SolveState>),
    Path { path: ContinuityPath, run: Continuation },
}

impl SolveManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            tol: self.tol.unwrap_or(d.tol),
            step_tol: self.step_tol.unwrap_or(d.step_tol),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            ..d
        }
    }
}

fn load(file: &Path, a_override: Option<&ScalarFieldSpec>) -> Result<(WeightedPolygon, ScalarField)> {
    let pf = PolygonFile::read(file)?;
    let polygon = pf.polygon()?;
    let a = match a_override {
        Some(spec) => spec.to_field()?,
        None => match pf.field()? {
            Some(a) => a,
            None => ScalarField::affine(unique_affine_a(&polygon)?),
        },
    };
    Ok((polygon, a))
}

/// Runs the manifest; `base` is the directory relative names refer to.
pub fn run_manifest(m: &SolveManifest, base: &Path) -> Result<SolveOutcome> {
    if m.grid < 9 {
        return Err(Error::InvalidParameter(format!("grid must be at least 9, got {}", m.grid)));
    }
    let (polygon, a) = load(&base.join(&m.polygon), m.a.as_ref())?;
    let opts = m.options();
    match &m.path {
        None => {
            let state = SolveState::new(guillemin_potential(&polygon), a, m.grid)?;
            Ok(SolveOutcome::Single(Box::new(solve(state, &opts)?)))
        }
        Some(spec) => {
            let (target, target_a) = load(&base.join(&spec.target), None)?;
            let path = continuity_path(&polygon, &a, &target, &target_a, spec.samples)?;
            let run = continue_path(&path, m.grid, &opts)?;
            Ok(SolveOutcome::Path { path, run })
        }
    }
}
