//! Corner cuts and the two-edge rebalancing that follows them.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::WeightedPolygon;
use crate::{Error, Point, Result};

/// Removes the corner at `vertex` where the sum of the two adjacent
/// defining functions is below `eps`.
///
/// Each retained edge portion keeps its density, so the old edges lose the
/// mass of the removed portion; the new edge carries that same mass. The two
/// removed masses agree, which makes the new defining function equal to
/// `λ_prev + λ_next - eps`.
pub fn corner_cut(p: &WeightedPolygon, vertex: usize, eps: f64) -> Result<WeightedPolygon> {
    let n = p.n_edges();
    if vertex >= n {
        return Err(Error::InvalidParameter(format!(
            "vertex index {vertex} out of range for {n} vertices"
        )));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("cut depth must be non-negative, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(p.clone());
    }
    let prev_edge = (vertex + n - 1) % n;
    let next_edge = vertex;
    let v = p.vertices()[vertex];
    let v_prev = p.vertices()[prev_edge];
    let v_next = p.vertices()[(vertex + 1) % n];

    // fraction of each adjacent edge removed, measured from the corner
    let t_prev = eps / p.defining_function(next_edge).eval(&v_prev);
    let t_next = eps / p.defining_function(prev_edge).eval(&v_next);
    if t_prev >= 1.0 {
        return Err(Error::CutTooDeep { edge: prev_edge, epsilon: eps });
    }
    if t_next >= 1.0 {
        return Err(Error::CutTooDeep { edge: next_edge, epsilon: eps });
    }
    let a = v + (v_prev - v) * t_prev;
    let b = v + (v_next - v) * t_next;
    let removed_prev = p.weights()[prev_edge] * t_prev;
    let removed_next = p.weights()[next_edge] * t_next;
    let new_mass = 0.5 * (removed_prev + removed_next);

    let mut vertices = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    for i in 0..n {
        if i == vertex {
            vertices.push(a);
            weights.push(new_mass);
            vertices.push(b);
            weights.push(p.weights()[i] - removed_next);
        } else {
            vertices.push(p.vertices()[i]);
            weights.push(if i == prev_edge {
                p.weights()[i] - removed_prev
            } else {
                p.weights()[i]
            });
        }
    }
    WeightedPolygon::new(vertices, weights)
}

/// Outcome of [`rebalance`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Rebalanced {
    #[serde(skip)]
    pub polygon: Option<WeightedPolygon>,
    /// Multipliers applied to the weights of the two chosen edges.
    pub scales: [f64; 2],
    pub iterations: usize,
    /// Distance between boundary centroid and polygon centroid.
    pub residual: f64,
}

impl Rebalanced {
    pub fn polygon(&self) -> &WeightedPolygon {
        self.polygon.as_ref().expect("rebalance result carries its polygon")
    }
}

const REBALANCE_TOL: f64 = 1e-12;
const REBALANCE_MAX_ITER: usize = 50;

/// Scales the weights of edges `first` and `second` until the boundary
/// centroid coincides with the polygon centroid, so that the balancing
/// scalar curvature is constant.
pub fn rebalance(p: &WeightedPolygon, first: usize, second: usize) -> Result<Rebalanced> {
    let n = p.n_edges();
    if first >= n || second >= n || first == second {
        return Err(Error::InvalidParameter(format!(
            "need two distinct edges below {n}, got {first} and {second}"
        )));
    }
    let target = p.centroid();
    let scale = {
        let (lo, hi) = p.bounding_box();
        (hi - lo).norm()
    };
    let mids: Vec<Point> = (0..n).map(|i| p.edge_midpoint(i)).collect();
    let base = p.weights().to_vec();

    let weights_at = |s: &Vector2<f64>| {
        let mut w = base.clone();
        w[first] *= s[0];
        w[second] *= s[1];
        w
    };
    let gap = |w: &[f64]| {
        let mass: f64 = w.iter().sum();
        let centre = mids.iter().zip(w).fold(Point::zeros(), |acc, (m, wi)| acc + m * *wi) / mass;
        (centre - target, centre, mass)
    };

    let mut s = Vector2::new(1.0, 1.0);
    let (mut g, mut centre, mut mass) = gap(&weights_at(&s));
    let mut iterations = 0;
    while g.norm() > REBALANCE_TOL * scale {
        if iterations == REBALANCE_MAX_ITER {
            return Err(Error::NoConvergence {
                iterations,
                residual: g.norm(),
            });
        }
        iterations += 1;
        let col = |e: usize| (mids[e] - centre) * base[e] / mass;
        let (c1, c2) = (col(first), col(second));
        let jac = Matrix2::from_columns(&[c1, c2]);
        if jac.determinant().abs() <= 1e-10 * c1.norm() * c2.norm() {
            return Err(Error::RankDeficient { first, second });
        }
        let step = jac.lu().solve(&(-g)).ok_or(Error::RankDeficient { first, second })?;
        let mut damping = 1.0;
        loop {
            let trial = s + step * damping;
            if trial.iter().all(|&v| v > 0.0) {
                let (tg, tc, tm) = gap(&weights_at(&trial));
                if tg.norm() < g.norm() || damping < 1e-6 {
                    s = trial;
                    g = tg;
                    centre = tc;
                    mass = tm;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-6 {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: g.norm(),
                });
            }
        }
    }
    let polygon = p.with_weights(weights_at(&s))?;
    Ok(Rebalanced {
        polygon: Some(polygon),
        scales: [s[0], s[1]],
        iterations,
        residual: g.norm(),
    })
}
