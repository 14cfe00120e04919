//! Numerical checks of the identities and inequalities used in the
//! blow-up analysis: the determinant bound on rectangles, the boundary
//! integral on the quarter plane, the ODE comparison lemma, the energy flux
//! identity, harmonicity of `det(u_ij)⁻¹`, and the maximum-principle bounds
//! on `det(u_ij)` over a disc.

mod blowup;
mod det_bounds;
mod flux;

pub use blowup::{lemma14_ratio, lemma17_identity, lemma18_check, theorem2_evidence, LEMMA17_FLAT_RATIO};
pub use det_bounds::det_bounds;
pub use flux::{f_harmonic_check, flux_balance, flux_identity, flux_vector};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::potential::PotentialField;
use crate::{Point, Result};

/// Outcome of one check. `ratio = lhs / rhs` is kept even when the check
/// fails.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    /// SHA-256 of the inputs in a canonical text form.
    pub digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl IdentityReport {
    fn new(name: &str, digest: String, lhs: f64, rhs: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            digest,
            lhs,
            rhs,
            ratio: lhs / rhs,
            tolerance,
            pass,
            note: None,
            details: serde_json::Value::Null,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Digest of a check's inputs. Floats are written with `{:?}`, which
/// round-trips, so equal inputs give equal digests.
fn digest_of(name: &str, u: Option<&PotentialField>, args: &[f64]) -> String {
    let mut text = format!("{name}|");
    if let Some(u) = u {
        text.push_str(&format!("{u:?}|"));
    }
    for a in args {
        text.push_str(&format!("{a:?},"));
    }
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Largest `|u^{ij}_{ij}|` over the given points, from closed-form
/// derivatives.
fn max_abreu(u: &PotentialField, points: &[Point]) -> Result<f64> {
    points
        .iter()
        .map(|x| Ok(u.curvature_at(x)?.abreu.abs()))
        .try_fold(0.0, |m: f64, v: Result<f64>| Ok(m.max(v?)))
}

/// `|u^{ij}_{ij}|` below this counts as scalar-flat.
pub const SCALAR_FLAT_TOL: f64 = 1e-8;
