//! Finite-horizon minimal actions `h_t(x, .)` by dynamic programming.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::scalar::Real;
use crate::torus::{Grid, GridFunction};

use super::{Operator, SchemeParams};

/// Stand-in for `+inf` at non-source nodes of `h_0`.
pub const DEFAULT_BIG: f64 = 1e6;

/// `h_t(x_s, .)` for several sources advanced together, one operator step at a
/// time. Values are stored target-major (`h[target * sources + s]`) so the
/// Lagrangian at each target is evaluated once for all sources.
pub struct ActionFlow<'a, T, M: ?Sized> {
    op: Operator<'a, T, M>,
    sources: Vec<usize>,
    h: Vec<T>,
    next: Vec<T>,
    steps: usize,
    big: T,
    bound: T,
}

impl<'a, T: Real, M: Model<T> + ?Sized> ActionFlow<'a, T, M> {
    /// `m_r` should already be frozen at the desired `u = r`; it is evaluated at `u = 0`.
    pub fn new(m_r: &'a M, c: T, grid: &Grid<T>, sources: &[usize], sp: &SchemeParams<T>, big: T) -> Result<Self> {
        let op = Operator::new(m_r, grid, c, sp)?;
        let n = grid.points();
        if let Some(&bad) = sources.iter().find(|&&s| s >= n) {
            return Err(Error::InvalidHorizon(format!("source node {bad} outside grid of {n} points")));
        }
        let k = sources.len();
        let mut h = vec![big; n * k];
        for (s, &node) in sources.iter().enumerate() {
            h[node * k + s] = T::zero();
        }
        let mut bound = T::zero();
        for i in 0..n {
            for j in 0..sp.vgrid.count() {
                let l = op.table.value(m_r, i, j, T::zero()) + c;
                bound = bound.max(l.abs());
            }
        }
        Ok(Self { op, sources: sources.to_vec(), h, next: vec![T::zero(); n * k], steps: 0, big, bound })
    }

    /// Number of steps needed to reach `horizon`; rejects horizons that are not
    /// multiples of `tau` or that could make an admissible action reach `BIG`.
    pub fn steps_for(&self, horizon: T) -> Result<usize> {
        let ratio = horizon / self.op.tau;
        let k = ratio.round();
        if !(horizon >= T::zero()) || (ratio - k).abs() > T::lit(1e-6) * (T::one() + k) {
            return Err(Error::InvalidHorizon(format!("horizon {horizon} is not a multiple of tau = {}", self.op.tau)));
        }
        let reach = horizon * self.bound;
        if reach >= self.big {
            return Err(Error::BigTooSmall { big: self.big.as_f64(), bound: reach.as_f64() });
        }
        Ok(k.to_usize().unwrap_or(0))
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> T {
        T::from_usize_lossy(self.steps) * self.op.tau
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.op.grid
    }

    /// `h_{t + tau} = T h_t` for every source.
    pub fn step(&mut self) {
        let k = self.sources.len();
        let n = self.op.grid.points();
        let nv = self.op.stencil.velocities();
        let tau = self.op.tau;
        for l in 0..n {
            let out = &mut self.next[l * k..(l + 1) * k];
            out.fill(T::infinity());
            for j in 0..nv {
                let cell = self.op.stencil.cell(l, j);
                let cost = tau * (self.op.table.value(self.op.model, l, j, T::zero()) + self.op.c);
                let left = &self.h[cell.left * k..(cell.left + 1) * k];
                let right = &self.h[cell.right * k..(cell.right + 1) * k];
                for s in 0..k {
                    let cand = cell.w_left * left[s] + cell.w_right * right[s] + cost;
                    if cand < out[s] {
                        out[s] = cand;
                    }
                }
            }
        }
        std::mem::swap(&mut self.h, &mut self.next);
        self.steps += 1;
    }

    /// `h_t(x_{sources[s]}, x_target)`.
    #[inline]
    pub fn value(&self, s: usize, target: usize) -> T {
        self.h[target * self.sources.len() + s]
    }

    /// `h_t(x_{sources[s]}, .)` as a grid function.
    pub fn row(&self, s: usize) -> GridFunction<T> {
        let n = self.op.grid.points();
        let values = (0..n).map(|t| self.value(s, t)).collect();
        GridFunction::from_raw(self.op.grid, values)
    }
}

/// All iterates `h_0, h_tau, ..., h_T` of the minimal action from `source`,
/// with `h_0 = 0` at the source and `BIG` elsewhere.
pub fn finite_horizon_action<T: Real, M: Model<T> + ?Sized>(
    m_r: &M,
    c: T,
    grid: &Grid<T>,
    source: usize,
    horizon: T,
    sp: &SchemeParams<T>,
) -> Result<Vec<GridFunction<T>>> {
    let mut flow = ActionFlow::new(m_r, c, grid, &[source], sp, T::lit(DEFAULT_BIG))?;
    let steps = flow.steps_for(horizon)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(flow.row(0));
    for _ in 0..steps {
        flow.step();
        out.push(flow.row(0));
    }
    Ok(out)
}
