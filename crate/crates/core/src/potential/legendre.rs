//! Legendre transform of a potential in the coordinates of a vertex chart.

use nalgebra::{Matrix2, Vector2};

use super::{Domain, PotentialField};
use crate::affine::Affine;
use crate::{Error, Point, Result};

const NEWTON_MAX_ITER: usize = 100;

/// Affine coordinates `x = (λ_E, λ_E')` given by the two edges at a vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexChart {
    pub first: Affine,
    pub second: Affine,
}

impl VertexChart {
    pub fn new(first: Affine, second: Affine) -> Result<Self> {
        let m = Matrix2::from_rows(&[first.grad.transpose(), second.grad.transpose()]);
        if m.determinant().abs() < 1e-14 {
            return Err(Error::InvalidParameter("chart functions are parallel".into()));
        }
        Ok(Self { first, second })
    }

    /// The chart of vertex `k`: the edges ending and starting there.
    pub fn at_vertex(domain: &Domain, k: usize) -> Result<Self> {
        let edges = domain.edges();
        match domain {
            Domain::Polygon(p) if k < p.n_edges() => {
                let n = p.n_edges();
                Self::new(edges[(k + n - 1) % n], edges[k])
            }
            Domain::Quadrant { .. } if k == 0 => Self::new(Affine::new(0.0, 1.0, 0.0), Affine::new(0.0, 0.0, 1.0)),
            _ => Err(Error::InvalidParameter(format!("domain has no vertex {k}"))),
        }
    }

    fn matrix(&self) -> Matrix2<f64> {
        Matrix2::from_rows(&[self.first.grad.transpose(), self.second.grad.transpose()])
    }

    pub fn to_chart(&self, p: &Point) -> Point {
        Point::new(self.first.eval(p), self.second.eval(p))
    }

    pub fn from_chart(&self, x: &Point) -> Point {
        let m = self.matrix();
        let b = Vector2::new(self.first.c, self.second.c);
        m.try_inverse().expect("chart is non-degenerate") * (x - b)
    }
}

/// `φ(ξ) = sup_x ⟨x, ξ⟩ - u(x)` with `x` in chart coordinates.
pub struct LegendreTransform<'a> {
    u: &'a PotentialField,
    chart: VertexChart,
    /// Chart coordinates and gradients at grid nodes, for warm starts.
    samples: Vec<(Point, Vector2<f64>, f64)>,
}

pub fn legendre_transform(u: &PotentialField, chart: VertexChart) -> Result<LegendreTransform<'_>> {
    let grid = u.empty_correction(41)?;
    let lattice = *grid.lattice();
    let samples = grid
        .kept_indices()
        .into_iter()
        .filter_map(|k| {
            let p = lattice.point(k);
            let t = LegendreTransform {
                u,
                chart,
                samples: Vec::new(),
            };
            let (v, g, _) = t.local(&t.chart.to_chart(&p)).ok()?;
            Some((t.chart.to_chart(&p), g, v))
        })
        .collect();
    Ok(LegendreTransform { u, chart, samples })
}

impl LegendreTransform<'_> {
    pub fn chart(&self) -> &VertexChart {
        &self.chart
    }

    /// Value, gradient and Hessian of `u` in chart coordinates.
    fn local(&self, x: &Point) -> Result<(f64, Vector2<f64>, Matrix2<f64>)> {
        let p = self.chart.from_chart(x);
        if !self.u.domain.contains(&p) {
            return Err(Error::OutsideDomain { at: p });
        }
        let mi = self.chart.matrix().try_inverse().expect("chart is non-degenerate");
        let g = mi.transpose() * self.u.gradient(&p)?;
        let h = mi.transpose() * self.u.hessian(&p)? * mi;
        Ok((self.u.value(&p)?, g, h))
    }

    /// `ξ(x) = ∇u` in chart coordinates.
    pub fn xi(&self, x: &Point) -> Result<Vector2<f64>> {
        Ok(self.local(x)?.1)
    }

    /// The chart point where `∇u = ξ`.
    pub fn point(&self, xi: &Vector2<f64>) -> Result<Point> {
        let out_of_range = || Error::OutOfRange(format!("ξ = ({:.6}, {:.6}) is outside the gradient image", xi.x, xi.y));
        let objective = |x: &Point| self.local(x).map(|(v, _, _)| v - x.dot(xi));
        let mut x = self
            .samples
            .iter()
            .min_by(|a, b| (a.2 - a.0.dot(xi)).total_cmp(&(b.2 - b.0.dot(xi))))
            .ok_or_else(out_of_range)?
            .0;
        for _ in 0..NEWTON_MAX_ITER {
            let (v, g, h) = self.local(&x)?;
            let r = g - xi;
            if r.norm() <= 1e-12 * (1.0 + xi.norm()) {
                return Ok(x);
            }
            let step = h.lu().solve(&(-r)).ok_or_else(out_of_range)?;
            let current = v - x.dot(xi);
            let mut t = 1.0;
            loop {
                let trial = x + step * t;
                match objective(&trial) {
                    Ok(val) if val <= current + 1e-14 * current.abs().max(1.0) => {
                        x = trial;
                        break;
                    }
                    _ => {
                        t *= 0.5;
                        if t < 1e-12 {
                            return Err(out_of_range());
                        }
                    }
                }
            }
        }
        Err(out_of_range())
    }

    pub fn phi(&self, xi: &Vector2<f64>) -> Result<f64> {
        let x = self.point(xi)?;
        let (v, _, _) = self.local(&x)?;
        Ok(x.dot(xi) - v)
    }

    /// `sup_ξ ⟨x, ξ⟩ - φ(ξ)`, found by Newton in `ξ` using
    /// `∇φ(ξ) = x(ξ)` and `∇²φ = (∇²u)⁻¹`.
    pub fn double_transform(&self, x: &Point) -> Result<f64> {
        let mut xi = self
            .samples
            .iter()
            .min_by(|a, b| (a.0 - x).norm_squared().total_cmp(&(b.0 - x).norm_squared()))
            .ok_or_else(|| Error::OutOfRange("no samples".into()))?
            .1;
        for _ in 0..NEWTON_MAX_ITER {
            let y = self.point(&xi)?;
            let (_, _, h) = self.local(&y)?;
            let r = y - x;
            if r.norm() <= 1e-13 * (1.0 + x.norm()) {
                let phi = y.dot(&xi) - self.local(&y)?.0;
                return Ok(x.dot(&xi) - phi);
            }
            // ∇²φ = h⁻¹, so the Newton step is -h r
            xi -= h * r;
        }
        Err(Error::OutOfRange("double transform did not converge".into()))
    }
}
