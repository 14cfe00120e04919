//! Distances for the Hessian metric `g = u_ij dx^i dx^j` by shortest paths
//! on a lattice graph.
//!
//! Each node links to its 16 neighbours at offsets `(±1, 0)`, `(0, ±1)`,
//! `(±1, ±1)`, `(±1, ±2)`, `(±2, ±1)`, with link length
//! `√(Δᵀ u_ij(mid) Δ)`. Sources are joined to the nodes near them by
//! straight segments whose length is integrated with a rule that absorbs
//! the `λ^{-1/2}` growth of the metric at an edge. The error is `O(h)` plus
//! the angular resolution of the stencil (about 4% for directions halfway
//! between stencil directions).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::potential::{Lattice, PotentialField};
use crate::quadrature::GaussRule;
use crate::{Error, Point, Result};

const STENCIL: [(isize, isize); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (2, 1),
    (-1, 2),
    (-2, 1),
    (1, -2),
    (2, -1),
    (-1, -2),
    (-2, -1),
];

/// Sources are linked directly to nodes within this many lattice spacings.
const SEED_RADIUS: f64 = 2.5;

/// Riemannian length of the straight segment from `a` to `b`.
pub fn segment_length(u: &PotentialField, a: &Point, b: &Point) -> Result<f64> {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let nu = d / len;
    let rule = GaussRule::new(24);
    let mut err = None;
    let v = rule.integrate_clustered(0.0, len, |t| {
        match u.hessian(&(a + nu * t)) {
            Ok(h) => nu.dot(&(h * nu)).max(0.0).sqrt(),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// What distances are measured from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Point { at: Point },
    /// A genuine edge, indexed as in [`crate::potential::Domain::edges`].
    Edge { index: usize },
    /// All genuine edges.
    Boundary,
}

/// The lattice graph of a potential, built once and reused for many
/// sources.
pub struct GeodesicGraph<'a> {
    u: &'a PotentialField,
    lattice: Lattice,
    active: Vec<bool>,
    links: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> GeodesicGraph<'a> {
    pub fn new(u: &'a PotentialField, n: usize) -> Result<Self> {
        let (lo, hi) = u.domain.bounding_box();
        let lattice = Lattice::covering(lo, hi, n)?;
        let tol = 1e-12 * (hi - lo).norm();
        let active: Vec<bool> = (0..lattice.len())
            .map(|k| {
                let x = lattice.point(k);
                u.domain.depth(&x) >= -tol && u.domain.distance_to_edges(&x) > tol
            })
            .collect();
        let mut links = vec![Vec::new(); lattice.len()];
        for k in 0..lattice.len() {
            if !active[k] {
                continue;
            }
            let x = lattice.point(k);
            for &(di, dj) in &STENCIL {
                let Some(m) = lattice.offset(k, di, dj) else { continue };
                if !active[m] {
                    continue;
                }
                let d = lattice.point(m) - x;
                let h = u.hessian(&(x + d * 0.5))?;
                links[k].push((m, d.dot(&(h * d)).max(0.0).sqrt()));
            }
        }
        Ok(Self {
            u,
            lattice,
            active,
            links,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn seed_radius(&self) -> f64 {
        SEED_RADIUS * self.lattice.h
    }

    /// Straight-segment links from the source to a point within the seed
    /// radius.
    fn direct(&self, source: &Source, x: &Point) -> Result<Option<f64>> {
        let r = self.seed_radius();
        match source {
            Source::Point { at } => {
                if (x - at).norm() <= r {
                    segment_length(self.u, at, x).map(Some)
                } else {
                    Ok(None)
                }
            }
            Source::Edge { index } => self.direct_to_edge(*index, x),
            Source::Boundary => {
                let mut best: Option<f64> = None;
                for e in 0..self.u.domain.edges().len() {
                    if let Some(d) = self.direct_to_edge(e, x)? {
                        best = Some(best.map_or(d, |b| b.min(d)));
                    }
                }
                Ok(best)
            }
        }
    }

    fn direct_to_edge(&self, index: usize, x: &Point) -> Result<Option<f64>> {
        let edges = self.u.domain.edges();
        let lambda = edges
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("no edge {index}")))?;
        let n = lambda.grad / lambda.grad.norm();
        let dist = lambda.eval(x) / lambda.grad.norm();
        if !(0.0..=self.seed_radius()).contains(&dist) {
            return Ok(None);
        }
        let foot = x - n * dist;
        let tol = 1e-9 * self.lattice.h;
        if self.u.domain.depth(&foot) < -tol {
            return Ok(None);
        }
        // the foot must lie on this edge, not merely on its line
        let others_ok = edges
            .iter()
            .enumerate()
            .all(|(k, l)| k == index || l.eval(&foot) >= -tol * l.grad.norm());
        if !others_ok {
            return Ok(None);
        }
        segment_length(self.u, &foot, x).map(Some)
    }

    /// Shortest-path distances from `source` to every active node.
    pub fn distances(&self, source: Source) -> Result<GeodesicField<'_>> {
        let mut dist = vec![f64::INFINITY; self.lattice.len()];
        let mut heap = BinaryHeap::new();
        for k in 0..self.lattice.len() {
            if !self.active[k] {
                continue;
            }
            if let Some(d) = self.direct(&source, &self.lattice.point(k))? {
                if d < dist[k] {
                    dist[k] = d;
                    heap.push(Entry(d, k));
                }
            }
        }
        if heap.is_empty() {
            return Err(Error::Disconnected {
                unreached: self.active.iter().filter(|&&a| a).count(),
            });
        }
        while let Some(Entry(d, k)) = heap.pop() {
            if d > dist[k] {
                continue;
            }
            for &(m, w) in &self.links[k] {
                let nd = d + w;
                if nd < dist[m] {
                    dist[m] = nd;
                    heap.push(Entry(nd, m));
                }
            }
        }
        let unreached = (0..dist.len()).filter(|&k| self.active[k] && dist[k].is_infinite()).count();
        if unreached > 0 {
            return Err(Error::Disconnected { unreached });
        }
        Ok(GeodesicField {
            graph: self,
            source,
            values: dist,
        })
    }
}

/// Distances from one source.
pub struct GeodesicField<'g> {
    graph: &'g GeodesicGraph<'g>,
    pub source: Source,
    /// Per-node distances; `∞` at nodes outside the graph.
    pub values: Vec<f64>,
}

impl GeodesicField<'_> {
    pub fn method(&self) -> &'static str {
        "lattice shortest path, 16-neighbour stencil"
    }

    pub fn lattice(&self) -> &Lattice {
        &self.graph.lattice
    }

    /// Distance to an arbitrary point: the best of a direct segment from
    /// the source and a segment from any node within the seed radius.
    pub fn at(&self, x: &Point) -> Result<f64> {
        let g = self.graph;
        let mut best = g.direct(&self.source, x)?.unwrap_or(f64::INFINITY);
        let r = g.seed_radius();
        let lat = &g.lattice;
        let c = lat.nearest(x);
        let span = SEED_RADIUS.ceil() as isize;
        for di in -span..=span {
            for dj in -span..=span {
                let Some(k) = lat.offset(c, di, dj) else { continue };
                if !g.active[k] || self.values[k].is_infinite() {
                    continue;
                }
                let y = lat.point(k);
                if (y - x).norm() > r {
                    continue;
                }
                best = best.min(self.values[k] + segment_length(g.u, &y, x)?);
            }
        }
        if best.is_infinite() {
            return Err(Error::OutsideDomain { at: *x });
        }
        Ok(best)
    }

    /// Largest distance over active nodes satisfying `keep`.
    pub fn max_over(&self, keep: impl Fn(&Point) -> bool) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.graph.active[k] && keep(&self.graph.lattice.point(k)))
            .map(|k| self.values[k])
            .fold(0.0, f64::max)
    }
}

/// One-shot distance field on an `n`-node lattice.
pub fn geodesic_distance(u: &PotentialField, source: Source, n: usize, at: &[Point]) -> Result<Vec<f64>> {
    let graph = GeodesicGraph::new(u, n)?;
    let field = graph.distances(source)?;
    at.iter().map(|x| field.at(x)).collect()
}
