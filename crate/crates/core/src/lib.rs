//! Weak KAM numerics on the flat circle `R / nZ`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod critical;
pub mod error;
pub mod lp;
pub mod mather;
pub mod measure;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod torus;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = torus::Grid<f64>;
pub type GridF32 = torus::Grid<f32>;
pub type GridFunction = torus::GridFunction<f64>;
pub type GridFunctionF32 = torus::GridFunction<f32>;
pub type VelocityGrid = torus::VelocityGrid<f64>;
pub type SchemeParams = solver::SchemeParams<f64>;
pub type DiscountedSolution = solver::DiscountedSolution<f64>;
pub type OccupationMeasure = measure::OccupationMeasure<f64>;
