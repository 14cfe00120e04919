//! Regular lattices and the smooth correction stored on them.
//!
//! Node sets, from largest to smallest:
//! - *kept*: nodes at distance at least `2h` inside the region; these carry
//!   the unknown correction values;
//! - *Hessian nodes*: kept nodes whose 3×3 neighbourhood is kept, where the
//!   correction has a finite-difference Hessian;
//! - *interior nodes*: nodes whose 3×3 neighbourhood consists of Hessian
//!   nodes, where curvature (fourth derivatives) is available.

use nalgebra::{Matrix2, Vector2};

use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    /// Square cells with `n` nodes along the longer side of the box.
    pub fn covering(lo: Point, hi: Point, n: usize) -> Result<Self> {
        if n < 5 {
            return Err(Error::InvalidParameter(format!("grid needs at least 5 nodes per side, got {n}")));
        }
        let size = hi - lo;
        let h = size.x.max(size.y) / (n - 1) as f64;
        Ok(Self {
            origin: lo,
            h,
            nx: (size.x / h).round() as usize + 1,
            ny: (size.y / h).round() as usize + 1,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn point(&self, k: usize) -> Point {
        let (i, j) = self.coords(k);
        self.origin + Point::new(i as f64 * self.h, j as f64 * self.h)
    }

    /// Node `k` shifted by `(di, dj)`, if that stays on the lattice.
    #[inline]
    pub fn offset(&self, k: usize, di: isize, dj: isize) -> Option<usize> {
        let (i, j) = self.coords(k);
        let (i, j) = (i as isize + di, j as isize + dj);
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then(|| self.index(i as usize, j as usize))
    }

    pub fn nearest(&self, x: &Point) -> usize {
        let g = (x - self.origin) / self.h;
        let i = (g.x.round().max(0.0) as usize).min(self.nx - 1);
        let j = (g.y.round().max(0.0) as usize).min(self.ny - 1);
        self.index(i, j)
    }

    fn neighbourhood_in(&self, k: usize, set: &[bool]) -> bool {
        (-1..=1).all(|dj| (-1..=1).all(|di| self.offset(k, di, dj).is_some_and(|m| set[m])))
    }

    /// Nodes of `set` whose whole 3×3 neighbourhood lies in `set`.
    pub fn erode(&self, set: &[bool]) -> Vec<bool> {
        (0..self.len()).map(|k| set[k] && self.neighbourhood_in(k, set)).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            origin: self.origin * s,
            h: self.h * s,
            ..*self
        }
    }
}

/// Centered second differences of nodal values at `k`: `[∂11, ∂12, ∂22]`,
/// the mixed term from the four diagonal neighbours.
pub(crate) fn second_differences<T>(lat: &Lattice, k: usize, at: impl Fn(usize) -> T) -> [T; 3]
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = |di, dj| at(lat.offset(k, di, dj).expect("stencil inside lattice"));
    let c = at(k);
    let h2 = 1.0 / (lat.h * lat.h);
    [
        (n(1, 0) - c - c + n(-1, 0)) * h2,
        (n(1, 1) - n(1, -1) - n(-1, 1) + n(-1, -1)) * (0.25 * h2),
        (n(0, 1) - c - c + n(0, -1)) * h2,
    ]
}

/// The nine stencil weights behind [`second_differences`], as
/// `(di, dj, [w11, w12, w22])` before division by `h²`.
pub(crate) const HESSIAN_STENCIL: [(isize, isize, [f64; 3]); 9] = [
    (0, 0, [-2.0, 0.0, -2.0]),
    (1, 0, [1.0, 0.0, 0.0]),
    (-1, 0, [1.0, 0.0, 0.0]),
    (0, 1, [0.0, 0.0, 1.0]),
    (0, -1, [0.0, 0.0, 1.0]),
    (1, 1, [0.0, 0.25, 0.0]),
    (-1, -1, [0.0, 0.25, 0.0]),
    (1, -1, [0.0, -0.25, 0.0]),
    (-1, 1, [0.0, -0.25, 0.0]),
];

/// Weights and first two derivatives of the cubic Lagrange basis on the
/// nodes `0, 1, 2, 3`, evaluated at `t`.
fn cubic_basis(t: f64) -> [[f64; 4]; 3] {
    let mut out = [[0.0; 4]; 3];
    for m in 0..4 {
        let denom: f64 = (0..4).filter(|&n| n != m).map(|n| m as f64 - n as f64).product();
        let roots: Vec<f64> = (0..4).filter(|&n| n != m).map(|n| n as f64).collect();
        let (a, b, c) = (roots[0], roots[1], roots[2]);
        out[0][m] = (t - a) * (t - b) * (t - c) / denom;
        out[1][m] = ((t - b) * (t - c) + (t - a) * (t - c) + (t - a) * (t - b)) / denom;
        out[2][m] = 2.0 * ((t - a) + (t - b) + (t - c)) / denom;
    }
    out
}

/// Smooth correction `f` sampled on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Correction {
    lattice: Lattice,
    kept: Vec<bool>,
    hessian_nodes: Vec<bool>,
    interior: Vec<bool>,
    /// For nodes outside the kept set, the Hessian node whose Taylor
    /// expansion supplies the value.
    fill_from: Vec<Option<usize>>,
    pin: usize,
    values: Vec<f64>,
}

impl Correction {
    /// Zero correction on `lattice`, keeping nodes where `depth ≥ 2h`.
    pub fn zero(lattice: Lattice, depth: impl Fn(&Point) -> f64, centre: &Point) -> Result<Self> {
        let margin = 2.0 * lattice.h * (1.0 - 1e-9);
        let kept: Vec<bool> = (0..lattice.len()).map(|k| depth(&lattice.point(k)) >= margin).collect();
        let hessian_nodes = lattice.erode(&kept);
        let interior = lattice.erode(&hessian_nodes);
        if !interior.iter().any(|&b| b) {
            return Err(Error::InvalidParameter("grid too coarse: no interior nodes".into()));
        }
        let sources: Vec<usize> = (0..lattice.len()).filter(|&k| hessian_nodes[k]).collect();
        let nearest_source = |x: &Point| {
            *sources
                .iter()
                .min_by(|&&a, &&b| {
                    (lattice.point(a) - x)
                        .norm_squared()
                        .total_cmp(&(lattice.point(b) - x).norm_squared())
                })
                .expect("interior nodes exist")
        };
        let fill_from = (0..lattice.len())
            .map(|k| (!kept[k]).then(|| nearest_source(&lattice.point(k))))
            .collect();
        let pin = (0..lattice.len())
            .filter(|&k| interior[k])
            .min_by(|&a, &b| {
                (lattice.point(a) - centre)
                    .norm_squared()
                    .total_cmp(&(lattice.point(b) - centre).norm_squared())
            })
            .expect("interior nodes exist");
        Ok(Self {
            lattice,
            values: vec![0.0; lattice.len()],
            kept,
            hessian_nodes,
            interior,
            fill_from,
            pin,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn kept(&self) -> &[bool] {
        &self.kept
    }

    pub fn hessian_nodes(&self) -> &[bool] {
        &self.hessian_nodes
    }

    pub fn interior(&self) -> &[bool] {
        &self.interior
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        (0..self.lattice.len()).filter(|&k| self.kept[k]).collect()
    }

    pub fn hessian_indices(&self) -> Vec<usize> {
        (0..self.lattice.len()).filter(|&k| self.hessian_nodes[k]).collect()
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.lattice.len()).filter(|&k| self.interior[k]).collect()
    }

    pub fn pin_node(&self) -> usize {
        self.pin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at_node(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Replaces the kept values, refills the rest, and re-pins.
    pub fn set_kept_values(&mut self, mut f: impl FnMut(usize, &Point) -> f64) {
        for k in 0..self.lattice.len() {
            if self.kept[k] {
                self.values[k] = f(k, &self.lattice.point(k));
            }
        }
        self.apply_pin();
    }

    /// Adds `delta[m]` to the `m`-th kept node.
    pub fn add_to_kept(&mut self, delta: &[f64], scale: f64) {
        let mut m = 0;
        for k in 0..self.lattice.len() {
            if self.kept[k] {
                self.values[k] += scale * delta[m];
                m += 1;
            }
        }
        self.apply_pin();
    }

    /// Centered-difference gradient at a Hessian node.
    pub fn gradient_at_node(&self, k: usize) -> Vector2<f64> {
        let v = |di, dj| self.values[self.lattice.offset(k, di, dj).expect("stencil inside lattice")];
        Vector2::new(v(1, 0) - v(-1, 0), v(0, 1) - v(0, -1)) / (2.0 * self.lattice.h)
    }

    /// Finite-difference Hessian at a Hessian node.
    pub fn hessian_at_node(&self, k: usize) -> Matrix2<f64> {
        let [a, b, c] = second_differences(&self.lattice, k, |m| self.values[m]);
        Matrix2::new(a, b, b, c)
    }

    /// Subtracts the affine function that makes `f` and its centered
    /// gradient vanish at the pin node, then refreshes extrapolated values.
    pub fn apply_pin(&mut self) {
        let x0 = self.lattice.point(self.pin);
        let v0 = self.values[self.pin];
        let g0 = self.gradient_at_node(self.pin);
        for k in 0..self.lattice.len() {
            if self.kept[k] {
                self.values[k] -= v0 + g0.dot(&(self.lattice.point(k) - x0));
            }
        }
        self.refill();
    }

    fn refill(&mut self) {
        for k in 0..self.lattice.len() {
            if let Some(src) = self.fill_from[k] {
                let d = self.lattice.point(k) - self.lattice.point(src);
                let g = self.gradient_at_node(src);
                let h = self.hessian_at_node(src);
                self.values[k] = self.values[src] + g.dot(&d) + 0.5 * d.dot(&(h * d));
            }
        }
    }

    fn patch(&self, x: &Point) -> (usize, usize, Point) {
        let g = (x - self.lattice.origin) / self.lattice.h;
        let clamp = |v: f64, n: usize| ((v.floor() as isize - 1).clamp(0, n as isize - 4)) as usize;
        let (i0, j0) = (clamp(g.x, self.lattice.nx), clamp(g.y, self.lattice.ny));
        (i0, j0, Point::new(g.x - i0 as f64, g.y - j0 as f64))
    }

    /// Bicubic interpolant: value, gradient and Hessian.
    pub fn evaluate(&self, x: &Point) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let (i0, j0, t) = self.patch(x);
        let (bx, by) = (cubic_basis(t.x), cubic_basis(t.y));
        let h = self.lattice.h;
        let (mut v, mut g, mut hh) = (0.0, Vector2::zeros(), Matrix2::zeros());
        for b in 0..4 {
            for a in 0..4 {
                let f = self.values[self.lattice.index(i0 + a, j0 + b)];
                v += f * bx[0][a] * by[0][b];
                g.x += f * bx[1][a] * by[0][b];
                g.y += f * bx[0][a] * by[1][b];
                hh[(0, 0)] += f * bx[2][a] * by[0][b];
                hh[(0, 1)] += f * bx[1][a] * by[1][b];
                hh[(1, 1)] += f * bx[0][a] * by[2][b];
            }
        }
        hh[(1, 0)] = hh[(0, 1)];
        (v, g / h, hh / (h * h))
    }

    /// The correction `x ↦ s f(x / s)` on the scaled lattice.
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            lattice: self.lattice.scaled(s),
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Transfers this correction onto `target` by interpolation.
    pub fn resample_onto(&self, target: &Correction) -> Correction {
        let mut out = target.clone();
        out.set_kept_values(|_, x| self.evaluate(x).0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Correction {
        let lat = Lattice::covering(Point::new(0.0, 0.0), Point::new(1.0, 1.0), n).unwrap();
        let depth = |x: &Point| x.x.min(x.y).min(1.0 - x.x).min(1.0 - x.y);
        Correction::zero(lat, depth, &Point::new(0.5, 0.5)).unwrap()
    }

    #[test]
    fn node_sets_shrink_by_one_layer() {
        let c = unit_square(17);
        let count = |s: &[bool]| s.iter().filter(|&&b| b).count();
        // h = 1/16, kept nodes i in 2..=14
        assert_eq!(count(c.kept()), 13 * 13);
        assert_eq!(count(c.hessian_nodes()), 11 * 11);
        assert_eq!(count(c.interior()), 9 * 9);
        assert_eq!(c.lattice().point(c.pin_node()), Point::new(0.5, 0.5));
    }

    #[test]
    fn quadratics_are_differentiated_exactly() {
        let mut c = unit_square(17);
        let q = |x: &Point| 1.0 + 2.0 * x.x - x.y + 0.7 * x.x * x.x + 0.3 * x.x * x.y + 1.1 * x.y * x.y;
        c.set_kept_values(|_, x| q(x));
        for k in c.hessian_indices() {
            let h = c.hessian_at_node(k);
            assert!((h - Matrix2::new(1.4, 0.3, 0.3, 2.2)).norm() < 1e-9);
        }
        // pinned: value and gradient vanish at the centre
        let p = c.pin_node();
        assert!(c.value_at_node(p).abs() < 1e-14);
        assert!(c.gradient_at_node(p).norm() < 1e-12);
        // extrapolated nodes continue the quadratic exactly
        let (v, g, h) = c.evaluate(&Point::new(0.01, 0.98));
        let x = Point::new(0.01, 0.98);
        let shifted = |x: &Point| q(x) - q(&Point::new(0.5, 0.5)) - (2.0 + 0.7 + 0.15) * (x.x - 0.5) - (-1.0 + 0.15 + 1.1) * (x.y - 0.5);
        assert!((v - shifted(&x)).abs() < 1e-10);
        assert!((h - Matrix2::new(1.4, 0.3, 0.3, 2.2)).norm() < 1e-8);
        assert!(g.norm().is_finite());
    }

    #[test]
    fn bicubic_reproduces_cubics() {
        let mut c = unit_square(21);
        let f = |x: &Point| x.x.powi(3) - 2.0 * x.x * x.y * x.y + x.y;
        c.set_kept_values(|_, x| f(x));
        // compare after removing the same affine pin on the exact function
        let p = c.lattice().point(c.pin_node());
        let x = Point::new(0.43, 0.61);
        let (v, g, h) = c.evaluate(&x);
        let (v0, g0, _) = c.evaluate(&p);
        assert!(v0.abs() < 1e-12 && g0.norm() < 0.01);
        let exact_h = Matrix2::new(6.0 * x.x, -4.0 * x.y, -4.0 * x.y, -4.0 * x.x);
        assert!((h - exact_h).norm() < 1e-8, "{h} vs {exact_h}");
        assert!(v.is_finite() && g.norm().is_finite());
    }
}
