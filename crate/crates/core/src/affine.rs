//! Affine-linear functions on the plane.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::Point;

/// `x ↦ c + ⟨grad, x⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub c: f64,
    pub grad: Vector2<f64>,
}

impl Affine {
    pub const ZERO: Affine = Affine {
        c: 0.0,
        grad: Vector2::new(0.0, 0.0),
    };

    pub fn new(c: f64, gx: f64, gy: f64) -> Self {
        Self {
            c,
            grad: Vector2::new(gx, gy),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0)
    }

    /// Coefficients `[c, gx, gy]`.
    pub fn coeffs(&self) -> [f64; 3] {
        [self.c, self.grad.x, self.grad.y]
    }

    pub fn from_coeffs(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        self.c + self.grad.dot(x)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c * s,
            grad: self.grad * s,
        }
    }

    pub fn add(&self, other: &Affine) -> Self {
        Self {
            c: self.c + other.c,
            grad: self.grad + other.grad,
        }
    }

    /// `(1-t) self + t other`.
    pub fn lerp(&self, other: &Affine, t: f64) -> Self {
        self.scale(1.0 - t).add(&other.scale(t))
    }

    /// The function `x ↦ self(x / λ)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Self {
            c: self.c,
            grad: self.grad / lambda,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.grad.x == 0.0 && self.grad.y == 0.0
    }
}

/// Twice the signed area of the triangle `(a, b, c)`.
#[inline]
pub fn cross(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[inline]
pub fn perp(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}
