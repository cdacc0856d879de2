//! Probability weights on the `(node, velocity)` product grid.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::{SchemeParams, Stencil};
use crate::torus::{Grid, VelocityGrid};

/// Nonnegative weights `mu(i, j)` on `(x_i, v_j)`; stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationMeasure<T> {
    grid: Grid<T>,
    vgrid: VelocityGrid<T>,
    weights: Vec<T>,
    origin: String,
}

impl<T: Real> OccupationMeasure<T> {
    pub fn new(grid: Grid<T>, vgrid: VelocityGrid<T>, weights: Vec<T>, origin: impl Into<String>) -> Result<Self> {
        if weights.len() != grid.points() * vgrid.count() {
            return Err(Error::GridMismatch);
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::NonFiniteValue { node: k / vgrid.count() });
        }
        Ok(Self { grid, vgrid, weights, origin: origin.into() })
    }

    pub fn dirac(grid: Grid<T>, vgrid: VelocityGrid<T>, node: usize, vel: usize, origin: impl Into<String>) -> Self {
        let mut weights = vec![T::zero(); grid.points() * vgrid.count()];
        weights[node * vgrid.count() + vel] = T::one();
        Self { grid, vgrid, weights, origin: origin.into() }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn vgrid(&self) -> &VelocityGrid<T> {
        &self.vgrid
    }

    /// Description of what produced the measure (model, LP, path).
    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, node: usize, vel: usize) -> T {
        self.weights[node * self.vgrid.count() + vel]
    }

    pub fn mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Nonzero entries as `(node, velocity index, weight)`.
    pub fn support(&self) -> Vec<(usize, usize, T)> {
        let nv = self.vgrid.count();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > T::zero())
            .map(|(k, &w)| (k / nv, k % nv, w))
            .collect()
    }

    /// `sum mu(i, j) f(i, j)`.
    pub fn integrate(&self, f: impl Fn(usize, usize) -> T) -> T {
        self.support().into_iter().map(|(i, j, w)| w * f(i, j)).sum()
    }

    /// Projection to the position grid.
    pub fn projected(&self) -> Vec<T> {
        let nv = self.vgrid.count();
        self.weights.chunks(nv).map(|c| c.iter().copied().sum()).collect()
    }

    /// Closure defects `sum mu(i, j) (phi_k(x_i - tau v_j) - phi_k(x_i)) / tau`
    /// for every hat function `phi_k`.
    pub fn closure_defects(&self, tau: T) -> Vec<T> {
        let sp = SchemeParams::new(tau, self.vgrid, T::one(), 1);
        let stencil = Stencil::new(&self.grid, &sp);
        let mut rows = vec![T::zero(); self.grid.points()];
        for (i, j, w) in self.support() {
            let cell = stencil.cell(i, j);
            rows[cell.left] = rows[cell.left] + w * cell.w_left / tau;
            rows[cell.right] = rows[cell.right] + w * cell.w_right / tau;
            rows[i] = rows[i] - w / tau;
        }
        rows
    }

    /// Largest violation among mass, sign and closure constraints.
    pub fn max_constraint_violation(&self, tau: T) -> T {
        let mass = (self.mass() - T::one()).abs();
        let neg = self.weights.iter().fold(T::zero(), |a, &w| a.max(-w));
        let closure = self.closure_defects(tau).into_iter().fold(T::zero(), |a, d| a.max(d.abs()));
        mass.max(neg).max(closure)
    }

    /// CSV `x,v,weight` with nonzero rows only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,v,weight\n");
        for (i, j, w) in self.support() {
            let _ = writeln!(out, "{},{},{}", self.grid.node(i), self.vgrid.velocity(j), w);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_at_rest_is_closed() {
        let g = Grid::new(1.0, 64).unwrap();
        let vg = VelocityGrid::new(3.0, 121).unwrap();
        let d = OccupationMeasure::dirac(g, vg, 5, vg.zero_index(), "test");
        assert_eq!(d.max_constraint_violation(0.01), 0.0);
        let moving = OccupationMeasure::dirac(g, vg, 5, vg.zero_index() + 3, "test");
        assert!(moving.max_constraint_violation(0.01) > 1.0);
        assert_eq!(moving.to_csv().lines().count(), 2);
    }

    #[test]
    fn uniform_rest_measure_is_closed() {
        let g = Grid::new(2.0, 40).unwrap();
        let vg = VelocityGrid::new(1.0, 5).unwrap();
        let mut w = vec![0.0; 40 * 5];
        for i in 0..40 {
            w[i * 5 + 2] = 1.0 / 40.0;
        }
        let m = OccupationMeasure::new(g, vg, w, "uniform").unwrap();
        assert!(m.max_constraint_violation(0.1) < 1e-15);
        assert_eq!(m.projected().len(), 40);
    }

    #[test]
    fn rejects_negative_weights() {
        let g = Grid::new(1.0, 8).unwrap();
        let vg = VelocityGrid::new(1.0, 3).unwrap();
        let mut w = vec![0.0; 24];
        w[3] = -0.1;
        assert!(OccupationMeasure::new(g, vg, w, "bad").is_err());
    }
}
