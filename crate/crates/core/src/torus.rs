//! Periodic grid geometry on the circle R/nZ and functions sampled on it.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest number of nodes accepted by [`Grid::new`].
pub const MIN_POINTS: usize = 8;

/// Uniform grid on the circle `R / period Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    period: T,
    points: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(period: T, points: usize) -> Result<Self> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::NonPositivePeriod(period.as_f64()));
        }
        if points < MIN_POINTS {
            return Err(Error::PointsTooSmall { got: points, min: MIN_POINTS });
        }
        Ok(Self { period, points })
    }

    /// Grid with `points_per_unit` nodes on every unit length of the period.
    pub fn with_density(period: T, points_per_unit: usize) -> Result<Self> {
        let n = (period * T::from_usize_lossy(points_per_unit)).round();
        Self::new(period, n.to_usize().unwrap_or(0))
    }

    #[inline]
    pub fn period(&self) -> T {
        self.period
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.period / T::from_usize_lossy(self.points)
    }

    /// Position of node `i`; indices wrap modulo `points`.
    #[inline]
    pub fn node(&self, i: usize) -> T {
        T::from_usize_lossy(i % self.points) * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.points).map(move |i| self.node(i))
    }

    /// Reduces `x` into `[0, period)`.
    pub fn wrap(&self, x: T) -> T {
        let r = x - self.period * (x / self.period).floor();
        if r >= self.period || r < T::zero() {
            T::zero()
        } else {
            r
        }
    }

    /// Wraps a signed node offset.
    #[inline]
    pub fn wrap_index(&self, i: isize) -> usize {
        i.rem_euclid(self.points as isize) as usize
    }

    /// Node nearest to `x` (periodic).
    pub fn nearest_node(&self, x: T) -> usize {
        let y = (self.wrap(x) / self.spacing()).round();
        y.to_usize().unwrap_or(0) % self.points
    }

    /// Locates a position given in index units (`x / spacing`): the enclosing
    /// cell `[left, right]` and the two linear interpolation weights.
    pub fn locate_index(&self, y: T) -> Cell<T> {
        let n = T::from_usize_lossy(self.points);
        let mut y = y - n * (y / n).floor();
        if y >= n || y < T::zero() {
            y = T::zero();
        }
        let base = y.floor();
        let frac = y - base;
        let left = base.to_usize().unwrap_or(0) % self.points;
        let right = (left + 1) % self.points;
        Cell { left, right, w_left: T::one() - frac, w_right: frac }
    }

    #[inline]
    pub fn locate(&self, x: T) -> Cell<T> {
        self.locate_index(x / self.spacing())
    }

    /// Periodic distance between two points of the circle.
    pub fn distance(&self, a: T, b: T) -> T {
        let d = self.wrap(a - b);
        d.min(self.period - d)
    }

    /// Converts the grid to another scalar type.
    pub fn cast<S: Real>(&self) -> Grid<S> {
        Grid { period: S::lit(self.period.as_f64()), points: self.points }
    }
}

/// Interpolation cell: `value = w_left * f[left] + w_right * f[right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T> {
    pub left: usize,
    pub right: usize,
    pub w_left: T,
    pub w_right: T,
}

impl<T: Real> Cell<T> {
    #[inline]
    pub fn apply(&self, values: &[T]) -> T {
        self.w_left * values[self.left] + self.w_right * values[self.right]
    }
}

/// Samples of a scalar function at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch);
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { node });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    /// Wraps values already known to be finite and of the right length.
    pub(crate) fn from_raw(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.points());
        Self { grid, values }
    }

    pub fn constant(grid: Grid<T>, value: T) -> Self {
        Self { grid, values: vec![value; grid.points()] }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize) -> T {
        self.values[i % self.values.len()]
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Piecewise-linear periodic interpolation.
    pub fn interp(&self, x: T) -> T {
        self.grid.locate(x).apply(&self.values)
    }

    pub fn sup_dist(&self, other: &Self) -> Result<T> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs())))
    }

    /// Largest difference quotient over adjacent nodes, wrap edge included.
    pub fn lipschitz_estimate(&self) -> T {
        let n = self.values.len();
        let h = self.grid.spacing();
        (0..n).fold(T::zero(), |acc, i| {
            let d = (self.values[(i + 1) % n] - self.values[i]).abs() / h;
            acc.max(d)
        })
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize_lossy(self.values.len())
    }

    pub fn shifted(&self, a: T) -> Self {
        self.map(|v| v + a)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self::new(self.grid, values)
    }

    /// CSV with header `x,value`, one row per node.
    pub fn to_csv(&self) -> String {
        self.to_csv_with_header("value")
    }

    pub fn to_csv_with_header(&self, column: &str) -> String {
        let mut out = format!("x,{column}\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.grid.node(i), v);
        }
        out
    }

    /// Parses the output of [`GridFunction::to_csv`] back onto `grid`.
    pub fn from_csv(grid: Grid<T>, csv: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.points());
        for line in csv.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let field = line
                .split(',')
                .nth(1)
                .ok_or_else(|| Error::InvalidModelParameter(format!("bad csv row: {line}")))?;
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::InvalidModelParameter(format!("bad csv value: {field}")))?;
            values.push(T::lit(v));
        }
        Self::new(grid, values)
    }
}

/// Uniform symmetric velocity sample `[-vmax, vmax]` with an odd count, so 0 is included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid<T> {
    vmax: T,
    count: usize,
}

impl<T: Real> VelocityGrid<T> {
    pub fn new(vmax: T, count: usize) -> Result<Self> {
        if !(vmax > T::zero()) || !vmax.is_finite() {
            return Err(Error::InvalidVelocityGrid(format!("vmax must be positive, got {vmax}")));
        }
        if count < 3 || count.is_multiple_of(2) {
            return Err(Error::InvalidVelocityGrid(format!("count must be odd and >= 3, got {count}")));
        }
        Ok(Self { vmax, count })
    }

    #[inline]
    pub fn vmax(&self) -> T {
        self.vmax
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn zero_index(&self) -> usize {
        self.count / 2
    }

    #[inline]
    pub fn step(&self) -> T {
        T::lit(2.0) * self.vmax / T::from_usize_lossy(self.count - 1)
    }

    /// Velocity `j`; the middle entry is exactly zero and the grid is exactly symmetric.
    #[inline]
    pub fn velocity(&self, j: usize) -> T {
        let mid = self.zero_index();
        if j >= mid {
            T::from_usize_lossy(j - mid) * self.step()
        } else {
            -(T::from_usize_lossy(mid - j) * self.step())
        }
    }

    pub fn velocities(&self) -> Vec<T> {
        (0..self.count).map(|j| self.velocity(j)).collect()
    }

    /// Index of the grid velocity closest to `v` (clamped to the range).
    pub fn nearest_index(&self, v: T) -> usize {
        let k = ((v + self.vmax) / self.step()).round();
        k.to_usize().unwrap_or(0).min(self.count - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn make_grid_examples() {
        assert_eq!(Grid::new(1.0, 8).unwrap().spacing(), 0.125);
        assert_eq!(Grid::new(4.0, 256).unwrap().spacing(), 0.015625);
        assert_eq!(Grid::new(1.0, 4), Err(Error::PointsTooSmall { got: 4, min: 8 }));
        assert!(matches!(Grid::new(0.0, 16), Err(Error::NonPositivePeriod(_))));
        assert!(matches!(Grid::new(-1.0, 16), Err(Error::NonPositivePeriod(_))));
    }

    #[test]
    fn spacing_times_points_is_period() {
        for &(p, n) in &[(1.0f64, 256usize), (2.0, 512), (4.0, 1024), (3.0, 97)] {
            let g = Grid::new(p, n).unwrap();
            assert!((g.spacing() * n as f64 - p).abs() <= f64::EPSILON * p);
            assert_eq!(g.node(n + 3), g.node(3));
        }
    }

    #[test]
    fn interp_examples() {
        let g = Grid::new(1.0, 256).unwrap();
        let f = GridFunction::from_fn(g, |x| (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        assert_eq!(f.interp(g.node(10)), (2.0 * std::f64::consts::PI * g.node(10)).sin());
        let c = GridFunction::constant(g, 3.0);
        assert_eq!(c.interp(0.123_456), 3.0);
        // midpoint between a 0 node and a 1 node
        let g8 = Grid::new(1.0, 8).unwrap();
        let alt = GridFunction::new(g8, (0..8).map(|i| (i % 2) as f64).collect()).unwrap();
        assert_eq!(alt.interp(0.0625), 0.5);
        assert_eq!(alt.interp(0.0625 + 1.0), 0.5);
    }

    #[test]
    fn sup_dist_examples() {
        let g = Grid::new(1.0, 256).unwrap();
        let s = GridFunction::from_fn(g, |x| (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        assert_eq!(s.sup_dist(&s).unwrap(), 0.0);
        assert_relative_eq!(s.sup_dist(&s.shifted(2.0)).unwrap(), 2.0, epsilon = 1e-15);
        let neg = s.map(|v| -v);
        let scan = s.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(s.sup_dist(&neg).unwrap(), 2.0 * scan);
        assert_relative_eq!(2.0 * scan, 2.0, epsilon = 1e-12);
        let other = GridFunction::constant(Grid::new(1.0, 128).unwrap(), 0.0);
        assert_eq!(s.sup_dist(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn lipschitz_examples() {
        let g = Grid::new(1.0, 64).unwrap();
        assert_eq!(GridFunction::constant(g, 7.0).lipschitz_estimate(), 0.0);
        // identity ramp: the wrap edge jumps by (points - 1) * spacing over one spacing
        let ramp = GridFunction::from_fn(g, |x| x).unwrap();
        assert_relative_eq!(ramp.lipschitz_estimate(), 63.0, epsilon = 1e-9);
        // v1 of the pendulum on [0,1]: (2/pi)(1 - |cos(pi x)|), slope 2|sin(pi x)| peaks at 2
        let g = Grid::new(1.0, 256).unwrap();
        let v1 = GridFunction::from_fn(g, |x| {
            2.0 / std::f64::consts::PI * (1.0 - (std::f64::consts::PI * x).cos().abs())
        })
        .unwrap();
        assert_relative_eq!(v1.lipschitz_estimate(), 2.0, epsilon = 1e-3);
    }

    #[test]
    fn velocity_grid_is_symmetric_with_zero() {
        let vg = VelocityGrid::new(3.0, 121).unwrap();
        let vs = vg.velocities();
        assert_eq!(vs[60], 0.0);
        assert!(vs.windows(2).all(|w| w[0] < w[1]));
        for j in 0..121 {
            assert_eq!(vs[j], -vs[120 - j]);
        }
        assert_eq!(vs[0], -3.0);
        assert_eq!(vg.nearest_index(0.049), 61);
        assert!(VelocityGrid::new(3.0, 4).is_err());
        assert!(VelocityGrid::new(3.0, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::new(2.0, 16).unwrap();
        let f = GridFunction::from_fn(g, |x| x * x - 0.25).unwrap();
        let csv = f.to_csv();
        assert!(csv.starts_with("x,value\n"));
        assert_eq!(csv.lines().count(), 17);
        assert_eq!(GridFunction::from_csv(g, &csv).unwrap(), f);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1.0, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert_eq!(GridFunction::new(g, v), Err(Error::NonFiniteValue { node: 3 }));
    }

    fn arb_fn(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn interp_exact_at_nodes_and_periodic(vals in arb_fn(32), x in -5.0f64..5.0) {
            let g = Grid::new(1.5, 32).unwrap();
            let f = GridFunction::new(g, vals.clone()).unwrap();
            for (i, v) in vals.iter().enumerate() {
                prop_assert_eq!(f.interp(g.node(i)), *v);
            }
            prop_assert!((f.interp(x) - f.interp(x + 1.5)).abs() <= 1e-12);
            let m = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(f.interp(x).abs() <= m + 1e-12);
        }

        #[test]
        fn sup_dist_triangle(a in arb_fn(16), b in arb_fn(16), c in arb_fn(16)) {
            let g = Grid::new(1.0, 16).unwrap();
            let (fa, fb, fc) = (
                GridFunction::new(g, a).unwrap(),
                GridFunction::new(g, b).unwrap(),
                GridFunction::new(g, c).unwrap(),
            );
            let ab = fa.sup_dist(&fb).unwrap();
            prop_assert_eq!(ab, fb.sup_dist(&fa).unwrap());
            prop_assert!(fa.sup_dist(&fc).unwrap() <= ab + fb.sup_dist(&fc).unwrap() + 1e-12);
        }

        #[test]
        fn lipschitz_shift_invariant(a in arb_fn(16), shift in -100.0f64..100.0) {
            let g = Grid::new(1.0, 16).unwrap();
            let f = GridFunction::new(g, a).unwrap();
            let l0 = f.lipschitz_estimate();
            let l1 = f.shifted(shift).lipschitz_estimate();
            prop_assert!((l0 - l1).abs() <= 1e-9 * (1.0 + l0));
        }
    }
}
