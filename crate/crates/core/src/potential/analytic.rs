//! Closed-form potentials `Σ c_E λ_E log λ_E + ½ xᵀQx + ℓ(x)` with exact
//! derivatives up to fourth order.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::affine::Affine;
use crate::{Error, Point, Result};

/// One `coeff · λ log λ` summand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogTerm {
    pub coeff: f64,
    pub lambda: Affine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPotential {
    pub terms: Vec<LogTerm>,
    /// Hessian of the quadratic part.
    pub quadratic: Matrix2<f64>,
    pub linear: Affine,
}

/// Value and derivatives of a potential at one point.
///
/// `d3[k]` is `∂_k` of the Hessian and `d4[k][l]` is `∂_k ∂_l` of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vector2<f64>,
    pub hess: Matrix2<f64>,
    pub d3: [Matrix2<f64>; 2],
    pub d4: [[Matrix2<f64>; 2]; 2],
}

impl AnalyticPotential {
    pub fn from_terms(terms: Vec<LogTerm>) -> Self {
        Self {
            terms,
            quadratic: Matrix2::zeros(),
            linear: Affine::ZERO,
        }
    }

    /// `Σ λ_E log λ_E` over the given defining functions.
    pub fn sum_of_logs(lambdas: &[Affine]) -> Self {
        Self::from_terms(lambdas.iter().map(|&lambda| LogTerm { coeff: 1.0, lambda }).collect())
    }

    pub fn with_quadratic(mut self, q: Matrix2<f64>) -> Self {
        self.quadratic = q;
        self
    }

    pub fn with_linear(mut self, l: Affine) -> Self {
        self.linear = l;
        self
    }

    fn check(&self, x: &Point) -> Result<()> {
        if self.terms.iter().all(|t| t.lambda.eval(x) > 0.0) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { at: *x })
        }
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        let logs: f64 = self
            .terms
            .iter()
            .map(|t| {
                let l = t.lambda.eval(x);
                t.coeff * l * l.ln()
            })
            .sum();
        Ok(logs + 0.5 * x.dot(&(self.quadratic * x)) + self.linear.eval(x))
    }

    pub fn gradient(&self, x: &Point) -> Result<Vector2<f64>> {
        self.check(x)?;
        let mut g = self.quadratic * x + self.linear.grad;
        for t in &self.terms {
            g += t.lambda.grad * (t.coeff * (t.lambda.eval(x).ln() + 1.0));
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &Point) -> Result<Matrix2<f64>> {
        self.check(x)?;
        let mut h = self.quadratic;
        for t in &self.terms {
            let a = t.lambda.grad;
            h += a * a.transpose() * (t.coeff / t.lambda.eval(x));
        }
        Ok(h)
    }

    pub fn jet(&self, x: &Point) -> Result<Jet> {
        self.check(x)?;
        let mut jet = Jet {
            value: 0.5 * x.dot(&(self.quadratic * x)) + self.linear.eval(x),
            grad: self.quadratic * x + self.linear.grad,
            hess: self.quadratic,
            d3: [Matrix2::zeros(); 2],
            d4: [[Matrix2::zeros(); 2]; 2],
        };
        for t in &self.terms {
            let l = t.lambda.eval(x);
            let a = t.lambda.grad;
            let outer = a * a.transpose();
            jet.value += t.coeff * l * l.ln();
            jet.grad += a * (t.coeff * (l.ln() + 1.0));
            jet.hess += outer * (t.coeff / l);
            for k in 0..2 {
                jet.d3[k] -= outer * (t.coeff * a[k] / (l * l));
                for m in 0..2 {
                    jet.d4[k][m] += outer * (2.0 * t.coeff * a[k] * a[m] / (l * l * l));
                }
            }
        }
        Ok(jet)
    }

    /// The potential `x ↦ s · self(x / s)`, expressed again in the
    /// rescaled defining functions `s · λ(x / s)`.
    pub fn rescaled(&self, s: f64) -> Self {
        let mut linear = Affine {
            c: self.linear.c * s,
            grad: self.linear.grad,
        };
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let lambda = t.lambda.dilate(s).scale(s);
                // s λ(x/s) log λ(x/s) = λ̃ log λ̃ - log s · λ̃
                linear = linear.add(&lambda.scale(-t.coeff * s.ln()));
                LogTerm { coeff: t.coeff, lambda }
            })
            .collect();
        Self {
            terms,
            quadratic: self.quadratic / s,
            linear,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> AnalyticPotential {
        AnalyticPotential::sum_of_logs(&[
            Affine::new(0.0, 0.0, 1.0),
            Affine::new(1.0, -1.0, 0.0),
            Affine::new(1.0, 0.0, -1.0),
            Affine::new(0.0, 1.0, 0.0),
        ])
    }

    #[test]
    fn square_value_matches_separable_formula() {
        let u = square();
        let (x, y) = (0.3, 0.8);
        let expect = x * f64::ln(x) + (1.0 - x) * f64::ln(1.0 - x) + y * f64::ln(y) + (1.0 - y) * f64::ln(1.0 - y);
        assert!((u.value(&Point::new(x, y)).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn jets_match_finite_differences() {
        let u = AnalyticPotential::sum_of_logs(&[
            Affine::new(0.0, 0.0, 1.0),
            Affine::new(1.0, -1.0, -1.0),
            Affine::new(0.0, 1.0, 0.0),
        ])
        .with_quadratic(Matrix2::new(0.5, 0.1, 0.1, 0.2))
        .with_linear(Affine::new(1.0, 2.0, -3.0));
        let x = Point::new(0.2, 0.3);
        let j = u.jet(&x).unwrap();
        let h = 1e-5;
        for k in 0..2 {
            let e = Vector2::ith(k, h);
            let gp = u.gradient(&(x + e)).unwrap();
            let gm = u.gradient(&(x - e)).unwrap();
            assert!((((gp - gm) / (2.0 * h)) - j.hess.column(k)).norm() < 1e-6);
            let hp = u.jet(&(x + e)).unwrap();
            let hm = u.jet(&(x - e)).unwrap();
            assert!(((hp.hess - hm.hess) / (2.0 * h) - j.d3[k]).norm() < 1e-5);
            for m in 0..2 {
                assert!(((hp.d3[m] - hm.d3[m]) / (2.0 * h) - j.d4[k][m]).norm() < 1e-3);
            }
        }
        assert!((j.value - u.value(&x).unwrap()).abs() < 1e-15);
        assert!((j.grad - u.gradient(&x).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn rescaled_potential_is_dilated() {
        let u = square().with_quadratic(Matrix2::new(1.0, 0.0, 0.0, 2.0));
        let s = 2.5;
        let v = u.rescaled(s);
        for p in [Point::new(0.2, 0.7), Point::new(0.5, 0.5), Point::new(0.9, 0.1)] {
            let expect = s * u.value(&p).unwrap();
            assert!((v.value(&(p * s)).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_is_an_error() {
        assert!(matches!(
            square().value(&Point::new(1.5, 0.5)),
            Err(Error::OutsideDomain { .. })
        ));
    }
}
