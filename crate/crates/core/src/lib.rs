//! Numerical toolkit for toric Kähler metrics on weighted polygons.

pub mod affine;
pub mod analysis;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod polygon;
pub mod potential;
pub mod quadrature;
pub mod solver;

pub use affine::Affine;
pub use error::{Error, Result};

/// A point in the plane of symplectic coordinates.
pub type Point = nalgebra::Vector2<f64>;
