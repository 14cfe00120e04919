//! The Hessian metric `g = u_ij` on the domain: the M-condition statistic,
//! geodesic distances, the local comparison inequalities, and volume
//! growth.

mod bounds;
mod geodesic;
mod volume;

pub use bounds::{bound_suite, bound_suite_with, lemma3_at_nodes, BoundSuiteOptions, LedgerRecord, SuiteReport};
pub use geodesic::{geodesic_distance, segment_length, GeodesicField, GeodesicGraph, Source};
pub use volume::{volume_growth, VolumeReport, VolumeRow};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::potential::{Lattice, PotentialField};
use crate::{Error, Point, Result};

/// Relative slack allowed when `I(p, q)` touches the boundary.
const CONTAINMENT_TOL: f64 = 1e-12;

/// Checks that `I(p, q)`, the segment from `2p - q` to `2q - p`, lies in
/// the closed domain, returning the offending endpoint otherwise.
pub fn admissible(u: &PotentialField, p: &Point, q: &Point) -> Result<()> {
    let (lo, hi) = u.domain.bounding_box();
    let tol = CONTAINMENT_TOL * (hi - lo).norm();
    for end in [2.0 * p - q, 2.0 * q - p] {
        if u.domain.depth(&end) < -tol {
            return Err(Error::SegmentLeavesDomain { exit: end });
        }
    }
    Ok(())
}

/// `V(p, q) = ∇_ν u(q) - ∇_ν u(p)` with `ν` the unit vector from `p` to
/// `q`. Coincident points give 0.
pub fn v_statistic(u: &PotentialField, p: &Point, q: &Point) -> Result<f64> {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    admissible(u, p, q)?;
    let nu = d / len;
    Ok(nu.dot(&(u.gradient(q)? - u.gradient(p)?)))
}

/// Which pairs a scan visits.
#[derive(Clone, Debug, Serialize)]
pub struct ScanOptions {
    /// Nodes per side of the sampling lattice over the box.
    pub density: usize,
    /// Pairs along lattice rows and columns.
    pub axis: bool,
    /// Pairs along the two lattice diagonals.
    pub diagonal: bool,
    /// Number of uniformly random node pairs.
    pub random: usize,
    pub seed: u64,
    /// Sampling box; the domain's bounding box when absent.
    pub sample_box: Option<(Point, Point)>,
    /// Bound to compare against.
    pub m: Option<f64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            density: 33,
            axis: true,
            diagonal: true,
            random: 2000,
            seed: 0,
            sample_box: None,
            m: None,
        }
    }
}

impl ScanOptions {
    pub fn axis_only(density: usize) -> Self {
        Self {
            density,
            diagonal: false,
            random: 0,
            ..Self::default()
        }
    }
}

pub const MIN_SCAN_DENSITY: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct MConditionReport {
    pub sup_v: f64,
    pub witness: Option<(Point, Point)>,
    pub pairs_tested: usize,
    pub m: Option<f64>,
    pub violated: bool,
}

/// Largest `V(p, q)` over admissible pairs of sampling nodes.
pub fn m_condition_scan(u: &PotentialField, opts: &ScanOptions) -> Result<MConditionReport> {
    if opts.density < MIN_SCAN_DENSITY {
        return Err(Error::InvalidParameter(format!(
            "scan density must be at least {MIN_SCAN_DENSITY}"
        )));
    }
    let (lo, hi) = opts.sample_box.unwrap_or_else(|| u.domain.bounding_box());
    let lat = Lattice::covering(lo, hi, opts.density)?;
    let usable: Vec<bool> = (0..lat.len())
        .map(|k| {
            let x = lat.point(k);
            x.x <= hi.x + 1e-12 && x.y <= hi.y + 1e-12 && u.domain.distance_to_edges(&x) > 0.0 && u.domain.depth(&x) >= 0.0
        })
        .collect();
    let grads: Vec<Option<nalgebra::Vector2<f64>>> = (0..lat.len())
        .map(|k| if usable[k] { u.gradient(&lat.point(k)).ok() } else { None })
        .collect();

    let mut report = MConditionReport {
        sup_v: 0.0,
        witness: None,
        pairs_tested: 0,
        m: opts.m,
        violated: false,
    };
    let mut visit = |a: usize, b: usize| {
        let (Some(ga), Some(gb)) = (grads[a], grads[b]) else { return };
        let (p, q) = (lat.point(a), lat.point(b));
        if admissible(u, &p, &q).is_err() {
            return;
        }
        let nu = (q - p).normalize();
        let v = nu.dot(&(gb - ga));
        report.pairs_tested += 1;
        if v > report.sup_v || report.witness.is_none() {
            report.sup_v = v.max(report.sup_v);
            report.witness = Some((p, q));
        }
    };

    let mut directions = Vec::new();
    if opts.axis {
        directions.extend([(1isize, 0isize), (0, 1)]);
    }
    if opts.diagonal {
        directions.extend([(1, 1), (1, -1)]);
    }
    for k in 0..lat.len() {
        for &(di, dj) in &directions {
            let mut step = 1;
            while let Some(m) = lat.offset(k, di * step, dj * step) {
                visit(k, m);
                step += 1;
            }
        }
    }
    if opts.random > 0 {
        let nodes: Vec<usize> = (0..lat.len()).filter(|&k| grads[k].is_some()).collect();
        if nodes.len() >= 2 {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for _ in 0..opts.random {
                let a = nodes[rng.random_range(0..nodes.len())];
                let b = nodes[rng.random_range(0..nodes.len())];
                if a != b {
                    visit(a, b);
                }
            }
        }
    }
    report.violated = opts.m.is_some_and(|m| report.sup_v > m);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::WeightedPolygon;
    use crate::potential::{guillemin_potential, half_plane_model, quarter_plane_model};

    #[test]
    fn v_statistic_examples() {
        let q = quarter_plane_model(4.0).unwrap();
        let v = v_statistic(&q, &Point::new(1.0, 1.0), &Point::new(1.5, 1.0)).unwrap();
        assert!((v - 1.5f64.ln()).abs() < 1e-14);
        let p = Point::new(0.7, 0.3);
        assert_eq!(v_statistic(&q, &p, &p).unwrap(), 0.0);
        // I(p, q) would reach x¹ = -0.5
        assert!(matches!(
            v_statistic(&q, &Point::new(0.5, 1.0), &Point::new(1.5, 1.0)),
            Err(Error::SegmentLeavesDomain { .. })
        ));
        let h = half_plane_model(10.0).unwrap();
        for t in [1.0, 2.0, 3.0] {
            let v = v_statistic(&h, &Point::new(0.5, 0.0), &Point::new(0.5, t)).unwrap();
            assert!((v - t).abs() < 1e-14);
        }
    }

    #[test]
    fn v_is_additive_along_lines() {
        let q = quarter_plane_model(8.0).unwrap();
        let (p, m, r) = (Point::new(2.0, 2.0), Point::new(2.4, 2.2), Point::new(3.0, 2.5));
        let whole = v_statistic(&q, &p, &r).unwrap();
        let parts = v_statistic(&q, &p, &m).unwrap() + v_statistic(&q, &m, &r).unwrap();
        assert!(whole >= 0.0 && (whole - parts).abs() < 1e-14);
    }

    #[test]
    fn quarter_model_axis_scan() {
        let q = quarter_plane_model(4.0).unwrap();
        let r = m_condition_scan(&q, &ScanOptions::axis_only(33)).unwrap();
        assert!((r.sup_v - 2f64.ln()).abs() < 1e-12, "{}", r.sup_v);
        assert!(r.pairs_tested > 0);
    }

    #[test]
    fn half_plane_scan_grows_with_the_box() {
        let h = half_plane_model(10.0).unwrap();
        for t in [1.0, 2.0, 4.0] {
            let opts = ScanOptions {
                sample_box: Some((Point::new(0.0, 0.0), Point::new(t, t))),
                m: Some(1.5),
                ..ScanOptions::axis_only(17)
            };
            let r = m_condition_scan(&h, &opts).unwrap();
            assert!((r.sup_v - t).abs() < 1e-12, "{}", r.sup_v);
            assert_eq!(r.violated, t > 1.5);
        }
    }

    #[test]
    fn bounded_polygon_scan_is_finite() {
        let sq = WeightedPolygon::with_unit_weights(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let r = m_condition_scan(&guillemin_potential(&sq), &ScanOptions::default()).unwrap();
        assert!(r.sup_v.is_finite() && r.sup_v > 0.0);
        assert!(m_condition_scan(&guillemin_potential(&sq), &ScanOptions::axis_only(3)).is_err());
    }
}
