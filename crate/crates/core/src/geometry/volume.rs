//! Volume growth of the toric manifold over a quadrant.
//!
//! The torus fibres have volume `(2π)²`, so the region over
//! `Ω(τ) = {x ≥ 0, x¹ + x² ≤ τ}` has volume `4π² · τ²/2`. Pairing this with
//! the largest distance from the corner over `Ω(τ)` exhibits `V(r)` against
//! `r`.

use serde::Serialize;

use super::geodesic::{GeodesicGraph, Source};
use crate::potential::{Domain, PotentialField};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VolumeRow {
    pub tau: f64,
    pub volume: f64,
    /// Largest distance from the corner over `Ω(τ)`.
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeReport {
    pub rows: Vec<VolumeRow>,
    /// Least-squares slope of `log volume` against `log radius`.
    pub exponent: f64,
}

pub fn volume_growth(u: &PotentialField, taus: &[f64], grid: usize) -> Result<VolumeReport> {
    let Domain::Quadrant { extent } = u.domain else {
        return Err(Error::Precondition("volume growth needs a quadrant domain".into()));
    };
    if taus.iter().any(|&t| !(t > 0.0 && t <= extent)) {
        return Err(Error::InvalidParameter(format!("τ must lie in (0, {extent}]")));
    }
    let graph = GeodesicGraph::new(u, grid)?;
    let field = graph.distances(Source::Point { at: Point::zeros() })?;
    let slack = 1e-9 * extent;
    let rows: Vec<VolumeRow> = taus
        .iter()
        .map(|&tau| {
            let radius = field.max_over(|x| x.x + x.y <= tau + slack);
            VolumeRow {
                tau,
                volume: 4.0 * std::f64::consts::PI.powi(2) * 0.5 * tau * tau,
                radius,
            }
        })
        .collect();
    let exponent = if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.radius.ln(), r.volume.ln())).collect();
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(VolumeReport { rows, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{half_plane_model, quarter_plane_model};

    #[test]
    fn flat_model_volume_and_exponent() {
        let u = quarter_plane_model(8.0).unwrap();
        let taus: Vec<f64> = (1..=8).map(f64::from).collect();
        let r = volume_growth(&u, &taus, 65).unwrap();
        let two_pi_sq = 2.0 * std::f64::consts::PI.powi(2);
        assert!((r.rows[0].volume - two_pi_sq).abs() < 1e-12);
        assert!((r.rows[1].volume - 4.0 * two_pi_sq).abs() < 1e-12);
        for row in &r.rows {
            // Dist(0, x) = 2√(x¹ + x²)
            assert!((row.radius - 2.0 * row.tau.sqrt()).abs() < 0.05 * row.radius, "{row:?}");
        }
        assert!((r.exponent - 4.0).abs() < 0.1, "{}", r.exponent);
        assert!(volume_growth(&half_plane_model(4.0).unwrap(), &[1.0], 17).is_err());
    }
}
