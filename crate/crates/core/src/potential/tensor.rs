//! Inverse Hessian, curvature tensor `F^{ij}_{kl} = ∂_k ∂_l u^{ij}` and its
//! scalar reductions.

use nalgebra::Matrix2;
use serde::Serialize;

use super::analytic::Jet;
use super::lattice::{second_differences, Lattice};
use super::PotentialField;
use crate::{Error, Point, Result};

/// `f[k][l]` holds the matrix `(F^{ij}_{kl})_{ij}`.
pub type Curvature4 = [[Matrix2<f64>; 2]; 2];

/// Metric and curvature data at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointCurvature {
    pub hess: Matrix2<f64>,
    pub inv: Matrix2<f64>,
    /// `d_inv[k] = ∂_k u^{ij}`.
    pub d_inv: [Matrix2<f64>; 2],
    pub f: Curvature4,
    pub det: f64,
    pub abs_f: f64,
    pub abreu: f64,
}

/// Enforces `F^{ij}_{kl} = F^{ji}_{kl} = F^{ij}_{lk}` against rounding.
fn symmetrized(mut f: Curvature4) -> Curvature4 {
    let mixed = (f[0][1] + f[1][0]) * 0.5;
    f[0][1] = mixed;
    f[1][0] = mixed;
    for row in f.iter_mut() {
        for m in row.iter_mut() {
            *m = (*m + m.transpose()) * 0.5;
        }
    }
    f
}

pub(crate) fn checked_inverse(hess: &Matrix2<f64>, at: &Point) -> Result<Matrix2<f64>> {
    let det = hess.determinant();
    if !(hess[(0, 0)] > 0.0 && det > 0.0 && det.is_finite()) {
        return Err(Error::NotConvex { at: *at });
    }
    Ok(Matrix2::new(hess[(1, 1)], -hess[(0, 1)], -hess[(1, 0)], hess[(0, 0)]) / det)
}

/// Smallest eigenvalue of a symmetric 2×2 matrix.
pub fn min_eigenvalue(m: &Matrix2<f64>) -> f64 {
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half_gap = (0.25 * (m[(0, 0)] - m[(1, 1)]).powi(2) + m[(0, 1)] * m[(1, 0)]).sqrt();
    mean - half_gap
}

/// `|F|² = F^{ij}_{kl} F^{ab}_{cd} u_{ia} u_{jb} u^{kc} u^{ld}`.
pub fn curvature_norm_sq(f: &Curvature4, hess: &Matrix2<f64>, inv: &Matrix2<f64>) -> f64 {
    let mut total = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            let fh = f[k][l] * hess;
            for c in 0..2 {
                for d in 0..2 {
                    let w = inv[(k, c)] * inv[(l, d)];
                    if w != 0.0 {
                        total += w * (fh * f[c][d] * hess).trace();
                    }
                }
            }
        }
    }
    total
}

/// `Σ_{ij} F^{ij}_{ij}`.
pub fn abreu_of(f: &Curvature4) -> f64 {
    f[0][0][(0, 0)] + f[0][1][(0, 1)] + f[1][0][(1, 0)] + f[1][1][(1, 1)]
}

impl PointCurvature {
    /// Exact data from a jet, by differentiating `U = H⁻¹`:
    /// `∂_k U = -U H_k U` and
    /// `∂_k∂_l U = U H_k U H_l U + U H_l U H_k U - U H_kl U`.
    pub fn from_jet(jet: &Jet, at: &Point) -> Result<Self> {
        let u = checked_inverse(&jet.hess, at)?;
        let d_inv = [-u * jet.d3[0] * u, -u * jet.d3[1] * u];
        let mut f = [[Matrix2::zeros(); 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                let a = u * jet.d3[k] * u * jet.d3[l] * u;
                let b = u * jet.d3[l] * u * jet.d3[k] * u;
                f[k][l] = a + b - u * jet.d4[k][l] * u;
            }
        }
        Ok(Self::assemble(jet.hess, u, d_inv, symmetrized(f)))
    }

    pub(crate) fn assemble(hess: Matrix2<f64>, inv: Matrix2<f64>, d_inv: [Matrix2<f64>; 2], f: Curvature4) -> Self {
        let norm_sq = curvature_norm_sq(&f, &hess, &inv);
        Self {
            hess,
            inv,
            d_inv,
            f,
            det: hess.determinant(),
            abs_f: norm_sq.max(0.0).sqrt(),
            abreu: abreu_of(&f),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        curvature_norm_sq(&self.f, &self.hess, &self.inv)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeSample {
    pub node: usize,
    #[serde(skip)]
    pub x: Point,
    #[serde(skip)]
    pub curvature: PointCurvature,
}

/// Per-node metric and curvature data on a lattice.
#[derive(Clone, Debug)]
pub struct TensorSamples {
    pub lattice: Lattice,
    pub nodes: Vec<NodeSample>,
}

impl TensorSamples {
    /// `max |u^{ij} u_{jk} - δ|` over the samples.
    pub fn max_inverse_error(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| (n.curvature.inv * n.curvature.hess - Matrix2::identity()).abs().max())
            .fold(0.0, f64::max)
    }

    pub fn abreu_values(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.curvature.abreu).collect()
    }

    /// Mean and standard deviation of the Abreu values.
    pub fn abreu_stats(&self) -> (f64, f64) {
        let v = self.abreu_values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / v.len() as f64;
        (mean, var.sqrt())
    }

    pub fn max_abs_f(&self) -> f64 {
        self.nodes.iter().map(|n| n.curvature.abs_f).fold(0.0, f64::max)
    }
}

/// Metric and curvature at sample nodes.
///
/// Without a correction the canonical part is evaluated exactly at the
/// nodes kept on a fresh `n`-node lattice. With a correction its own
/// lattice is used: the correction Hessian comes from second differences,
/// and the curvature adds second differences of `G = (u_ij)⁻¹ - (u⁰_ij)⁻¹`
/// to the exact canonical curvature.
pub fn tensor_samples(u: &PotentialField, n: usize) -> Result<TensorSamples> {
    match &u.correction {
        None => {
            let corr = u.empty_correction(n)?;
            let lattice = *corr.lattice();
            let nodes = corr
                .kept_indices()
                .into_iter()
                .map(|k| {
                    let x = lattice.point(k);
                    let jet = u.analytic.jet(&x)?;
                    Ok(NodeSample {
                        node: k,
                        x,
                        curvature: PointCurvature::from_jet(&jet, &x)?,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(TensorSamples { lattice, nodes })
        }
        Some(_) => {
            let fields = CorrectedFields::new(u)?;
            let lattice = fields.lattice;
            let nodes = fields
                .interior
                .iter()
                .map(|&k| {
                    Ok(NodeSample {
                        node: k,
                        x: lattice.point(k),
                        curvature: fields.curvature_at(u, k)?,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(TensorSamples { lattice, nodes })
        }
    }
}

/// Nodal Hessian data of a corrected potential.
pub(crate) struct CorrectedFields {
    pub lattice: Lattice,
    pub interior: Vec<usize>,
    /// Full inverse Hessian at Hessian nodes.
    pub inv: Vec<Option<Matrix2<f64>>>,
    pub hess: Vec<Option<Matrix2<f64>>>,
    /// `G` at Hessian nodes.
    pub g: Vec<Matrix2<f64>>,
}

impl CorrectedFields {
    pub fn new(u: &PotentialField) -> Result<Self> {
        let corr = u.correction.as_ref().expect("corrected potential");
        let lattice = *corr.lattice();
        let mut inv = vec![None; lattice.len()];
        let mut hess = vec![None; lattice.len()];
        let mut g = vec![Matrix2::zeros(); lattice.len()];
        for k in corr.hessian_indices() {
            let x = lattice.point(k);
            let ha = u.analytic.hessian(&x)?;
            let h = ha + corr.hessian_at_node(k);
            let ui = checked_inverse(&h, &x)?;
            g[k] = ui - checked_inverse(&ha, &x)?;
            inv[k] = Some(ui);
            hess[k] = Some(h);
        }
        Ok(Self {
            lattice,
            interior: corr.interior_indices(),
            inv,
            hess,
            g,
        })
    }

    pub fn curvature_at(&self, u: &PotentialField, k: usize) -> Result<PointCurvature> {
        let x = self.lattice.point(k);
        let jet = u.analytic.jet(&x)?;
        let exact = PointCurvature::from_jet(&jet, &x)?;
        let [g11, g12, g22] = second_differences(&self.lattice, k, |m| self.g[m]);
        let mut f = exact.f;
        f[0][0] += g11;
        f[0][1] += g12;
        f[1][0] += g12;
        f[1][1] += g22;
        let gx = |di: isize, dj: isize| self.g[self.lattice.offset(k, di, dj).expect("stencil inside lattice")];
        let h2 = 2.0 * self.lattice.h;
        let d_inv = [
            exact.d_inv[0] + (gx(1, 0) - gx(-1, 0)) / h2,
            exact.d_inv[1] + (gx(0, 1) - gx(0, -1)) / h2,
        ];
        Ok(PointCurvature::assemble(
            self.hess[k].expect("interior node has a Hessian"),
            self.inv[k].expect("interior node has a Hessian"),
            d_inv,
            symmetrized(f),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{guillemin_potential, quarter_plane_model};
    use crate::polygon::WeightedPolygon;

    fn square_field() -> PotentialField {
        guillemin_potential(
            &WeightedPolygon::with_unit_weights(vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn flat_model_at_one_two() {
        let u = quarter_plane_model(4.0).unwrap();
        let x = Point::new(1.0, 2.0);
        let c = u.curvature_at(&x).unwrap();
        assert!((c.hess - Matrix2::new(1.0, 0.0, 0.0, 0.5)).norm() < 1e-15);
        assert!((c.inv - Matrix2::new(1.0, 0.0, 0.0, 2.0)).norm() < 1e-15);
        assert_eq!(c.abs_f, 0.0);
        assert_eq!(c.abreu, 0.0);
    }

    #[test]
    fn square_centre() {
        let c = square_field().curvature_at(&Point::new(0.5, 0.5)).unwrap();
        assert!((c.hess - Matrix2::new(4.0, 0.0, 0.0, 4.0)).norm() < 1e-14);
        assert!((c.abreu + 4.0).abs() < 1e-13);
        assert!((c.norm_sq() - 8.0).abs() < 1e-12);
        assert!((c.f[0][0][(0, 0)] + 2.0).abs() < 1e-13);
        assert!((c.f[1][1][(1, 1)] + 2.0).abs() < 1e-13);
    }

    #[test]
    fn square_is_constant_everywhere() {
        let s = tensor_samples(&square_field(), 33).unwrap();
        for n in &s.nodes {
            assert!((n.curvature.abreu + 4.0).abs() < 1e-9);
            assert!((n.curvature.norm_sq() - 8.0).abs() < 1e-8);
        }
        assert!(s.max_inverse_error() < 1e-10);
    }

    #[test]
    fn simplex_abreu_is_constant() {
        let tri = WeightedPolygon::with_unit_weights(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let s = tensor_samples(&guillemin_potential(&tri), 41).unwrap();
        let (mean, sd) = s.abreu_stats();
        assert!((mean + 6.0).abs() < 1e-8, "{mean}");
        assert!(sd < 1e-6);
    }

    #[test]
    fn index_symmetries_are_exact() {
        let tri = WeightedPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.3), Point::new(0.4, 1.0)],
            vec![0.5, 1.5, 1.0],
        )
        .unwrap();
        let c = guillemin_potential(&tri).curvature_at(&Point::new(0.8, 0.4)).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                assert_eq!(c.f[k][l][(0, 1)], c.f[k][l][(1, 0)]);
            }
        }
        assert_eq!(c.f[0][1], c.f[1][0]);
        assert!((c.det * c.inv.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn finite_difference_oracle_for_fourth_derivatives() {
        // F from second differences of the exact inverse Hessian
        let tri = WeightedPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.3), Point::new(0.4, 1.0)],
            vec![0.5, 1.5, 1.0],
        )
        .unwrap();
        let u = guillemin_potential(&tri);
        let x = Point::new(0.8, 0.4);
        let inv = |p: Point| u.analytic.hessian(&p).unwrap().try_inverse().unwrap();
        let h = 1e-3;
        let c = u.curvature_at(&x).unwrap();
        let e = [Point::new(h, 0.0), Point::new(0.0, h)];
        let fd11 = (inv(x + e[0]) - 2.0 * inv(x) + inv(x - e[0])) / (h * h);
        let fd12 = (inv(x + e[0] + e[1]) - inv(x + e[0] - e[1]) - inv(x - e[0] + e[1]) + inv(x - e[0] - e[1])) / (4.0 * h * h);
        assert!((fd11 - c.f[0][0]).norm() < 1e-4);
        assert!((fd12 - c.f[0][1]).norm() < 1e-4);
    }

    #[test]
    fn contracted_identity_for_norm() {
        // |F|² agrees with Σ F^{ij}_{kl} F^{kl}_{ij} on sampled points
        let tri = WeightedPolygon::new(
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.3), Point::new(0.4, 1.0)],
            vec![0.5, 1.5, 1.0],
        )
        .unwrap();
        let u = guillemin_potential(&tri);
        for x in [Point::new(0.8, 0.4), Point::new(0.3, 0.2), Point::new(1.2, 0.4)] {
            let c = u.curvature_at(&x).unwrap();
            let mut contracted = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            contracted += c.f[k][l][(i, j)] * c.f[i][j][(k, l)];
                        }
                    }
                }
            }
            assert!((contracted - c.norm_sq()).abs() < 1e-9 * (1.0 + contracted.abs()), "{contracted} vs {}", c.norm_sq());
        }
    }
}
