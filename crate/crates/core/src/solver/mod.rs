//! Semi-Lagrangian Lax-Oleinik machinery for `H(x, u', lambda u) = c`.
//!
//! One step of the operator is
//! `(T f)(x) = min_v f(x - tau v) + tau (L(x, v, d(x)) + c)` with linear
//! interpolation for `f` off the grid; the discounted equation is the fixed
//! point `u = T[d = lambda u] u`.

mod action;
mod calibration;

pub use action::{finite_horizon_action, ActionFlow, DEFAULT_BIG};
pub use calibration::{
    backtrack_calibrated, build_discounted_occupation, verify_domination, CalibratedPath, DominationReport, PathNode,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{dl_du_fd, Model};
use crate::scalar::Real;
use crate::torus::{Cell, Grid, GridFunction, VelocityGrid};

/// How [`solve_discounted`] sweeps the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Iteration {
    /// In-place alternating sweeps; each node solves its own one-step equation
    /// exactly in its own value. Same fixed point as `Jacobi`, far fewer sweeps.
    #[default]
    GaussSeidel,
    /// `u <- (1 - damping) u + damping T[lambda u] u`.
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams<T> {
    pub tau: T,
    pub vgrid: VelocityGrid<T>,
    /// Target for the sup-norm fixed-point residual.
    pub tol: T,
    pub max_iter: usize,
    /// Relaxation factor in `(0, 1]`; halved automatically when the residual oscillates.
    pub damping: T,
    pub iteration: Iteration,
}

impl<T: Real> SchemeParams<T> {
    pub fn new(tau: T, vgrid: VelocityGrid<T>, tol: T, max_iter: usize) -> Self {
        Self { tau, vgrid, tol, max_iter, damping: T::one(), iteration: Iteration::GaussSeidel }
    }

    /// `tau = 0.01`, 121 velocities on `[-3, 3]`, `tol = 1e-9`.
    pub fn reference() -> Self {
        let vgrid = VelocityGrid::new(T::lit(3.0), 121).expect("reference velocity grid");
        Self::new(T::lit(0.01), vgrid, T::lit(1e-9), 200_000)
    }

    pub fn validate(&self, grid: &Grid<T>) -> Result<()> {
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return Err(Error::InvalidScheme(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidScheme(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::InvalidScheme(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidScheme("max_iter must be at least 1".into()));
        }
        if self.tau * self.vgrid.vmax() > grid.period() * T::lit(0.5) {
            return Err(Error::InvalidScheme(format!(
                "tau * vmax = {} exceeds half the period {}",
                self.tau * self.vgrid.vmax(),
                grid.period()
            )));
        }
        Ok(())
    }
}

/// Departure cells `x_i - tau v_j`, computed in index units so that `v = 0`
/// lands exactly on the node.
#[derive(Debug, Clone)]
pub(crate) struct Stencil<T> {
    points: usize,
    shift: Vec<usize>,
    w_left: Vec<T>,
    w_right: Vec<T>,
}

impl<T: Real> Stencil<T> {
    pub(crate) fn new(grid: &Grid<T>, sp: &SchemeParams<T>) -> Self {
        let n = grid.points();
        let h = grid.spacing();
        let count = sp.vgrid.count();
        let mut shift = Vec::with_capacity(count);
        let mut w_left = Vec::with_capacity(count);
        let mut w_right = Vec::with_capacity(count);
        for j in 0..count {
            let d = -(sp.tau * sp.vgrid.velocity(j) / h);
            let base = d.floor();
            let frac = d - base;
            let b = base.to_isize().unwrap_or(0);
            shift.push(b.rem_euclid(n as isize) as usize);
            w_left.push(T::one() - frac);
            w_right.push(frac);
        }
        Self { points: n, shift, w_left, w_right }
    }

    #[inline]
    pub(crate) fn cell(&self, i: usize, j: usize) -> Cell<T> {
        let left = (i + self.shift[j]) % self.points;
        let right = if left + 1 == self.points { 0 } else { left + 1 };
        Cell { left, right, w_left: self.w_left[j], w_right: self.w_right[j] }
    }

    pub(crate) fn velocities(&self) -> usize {
        self.shift.len()
    }
}

/// Cached `L(x_i, v_j, 0)` and `dL/du` for models affine in `u`.
#[derive(Debug, Clone)]
pub(crate) struct LagrangianTable<T> {
    xs: Vec<T>,
    vs: Vec<T>,
    affine: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Real> LagrangianTable<T> {
    pub(crate) fn new<M: Model<T> + ?Sized>(m: &M, grid: &Grid<T>, vgrid: &VelocityGrid<T>) -> Self {
        let xs: Vec<T> = grid.nodes().collect();
        let vs = vgrid.velocities();
        let affine = m.affine_in_u().then(|| {
            let mut l0 = Vec::with_capacity(xs.len() * vs.len());
            let mut g = Vec::with_capacity(xs.len() * vs.len());
            for &x in &xs {
                for &v in &vs {
                    l0.push(m.lagrangian(x, v, T::zero()));
                    g.push(m.analytic_dl_du0(x, v).unwrap_or_else(|| dl_du_fd(m, x, v, T::zero())));
                }
            }
            (l0, g)
        });
        Self { xs, vs, affine }
    }

    /// `L(x_i, v_j, d)`.
    #[inline]
    pub(crate) fn value<M: Model<T> + ?Sized>(&self, m: &M, i: usize, j: usize, d: T) -> T {
        match &self.affine {
            Some((l0, g)) => {
                let k = i * self.vs.len() + j;
                if g[k] == T::zero() {
                    l0[k]
                } else {
                    l0[k] + g[k] * d
                }
            }
            None => m.lagrangian(self.xs[i], self.vs[j], d),
        }
    }

    /// `(L(x_i, v_j, d) - g d, g)` with `g = dL/du(x_i, v_j, d)`: the affine
    /// model of `u -> L(x_i, v_j, u)` around `d`.
    #[inline]
    fn linearized<M: Model<T> + ?Sized>(&self, m: &M, i: usize, j: usize, d: T) -> (T, T) {
        match &self.affine {
            Some((l0, g)) => {
                let k = i * self.vs.len() + j;
                (l0[k], g[k])
            }
            None => {
                let (x, v) = (self.xs[i], self.vs[j]);
                let g = dl_du_fd(m, x, v, d);
                (m.lagrangian(x, v, d) - g * d, g)
            }
        }
    }
}

/// Shared precomputation for repeated operator applications on one grid.
pub(crate) struct Operator<'a, T, M: ?Sized> {
    pub(crate) model: &'a M,
    pub(crate) grid: Grid<T>,
    pub(crate) tau: T,
    pub(crate) c: T,
    pub(crate) stencil: Stencil<T>,
    pub(crate) table: LagrangianTable<T>,
}

impl<'a, T: Real, M: Model<T> + ?Sized> Operator<'a, T, M> {
    pub(crate) fn new(model: &'a M, grid: &Grid<T>, c: T, sp: &SchemeParams<T>) -> Result<Self> {
        sp.validate(grid)?;
        Ok(Self {
            model,
            grid: *grid,
            tau: sp.tau,
            c,
            stencil: Stencil::new(grid, sp),
            table: LagrangianTable::new(model, grid, &sp.vgrid),
        })
    }

    /// One-step value at node `i` for velocity `j`.
    #[inline]
    pub(crate) fn candidate(&self, f: &[T], i: usize, j: usize, d: T) -> T {
        self.stencil.cell(i, j).apply(f) + self.tau * (self.table.value(self.model, i, j, d) + self.c)
    }

    /// `(T f)(x_i)` and the first minimizing velocity index.
    #[inline]
    pub(crate) fn node_min(&self, f: &[T], i: usize, d: T) -> (T, usize) {
        let mut best = T::infinity();
        let mut arg = 0;
        for j in 0..self.stencil.velocities() {
            let val = self.candidate(f, i, j, d);
            if val < best {
                best = val;
                arg = j;
            }
        }
        (best, arg)
    }

    pub(crate) fn apply(&self, f: &[T], discount: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.node_min(f, i, discount[i]).0;
        }
    }

    /// `sup_i |u_i - (T[lambda u] u)_i|` over the nodes not in `skip`.
    fn residual(&self, u: &[T], lambda: T, skip: &[bool]) -> T {
        let mut worst = T::zero();
        for i in 0..u.len() {
            if skip[i] {
                continue;
            }
            let (tu, _) = self.node_min(u, i, lambda * u[i]);
            let r = (tu - u[i]).abs();
            if !(r <= worst) {
                worst = if r.is_nan() { T::infinity() } else { r };
            }
        }
        worst
    }

    /// Gauss-Seidel update value at node `i`: the smallest root over `v` of
    /// `u_i = rest_v + w_self u_i + tau (a_v + lambda g_v u_i + c)`.
    fn implicit_node(&self, u: &[T], i: usize, lambda: T) -> T {
        let ui = u[i];
        let d = lambda * ui;
        let eps = T::epsilon() * T::lit(64.0);
        let mut best = T::infinity();
        for j in 0..self.stencil.velocities() {
            let cell = self.stencil.cell(i, j);
            let mut w_self = T::zero();
            let mut rest = T::zero();
            if cell.left == i {
                w_self = w_self + cell.w_left;
            } else {
                rest = rest + cell.w_left * u[cell.left];
            }
            if cell.right == i {
                w_self = w_self + cell.w_right;
            } else {
                rest = rest + cell.w_right * u[cell.right];
            }
            let (base, g) = self.table.linearized(self.model, i, j, d);
            let a = self.tau * (base + self.c);
            let denom = T::one() - w_self - self.tau * lambda * g;
            let cand = if denom > eps {
                (rest + a) / denom
            } else if a.abs() <= eps * (T::one() + ui.abs()) {
                ui
            } else if a > T::zero() {
                T::infinity()
            } else {
                // no self-consistent value: move downhill by one explicit step
                rest + w_self * ui + a + self.tau * lambda * g * ui
            };
            if cand < best {
                best = cand;
            }
        }
        best
    }
}

/// `(T f)(x) = min_v f(x - tau v) + tau (L(x, v, d(x)) + c)` with `d = discount_field`.
///
/// Monotone in `f` exactly; commutes with constants up to rounding when `L` ignores `u`.
pub fn lax_oleinik_step<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    discount_field: &GridFunction<T>,
    f: &GridFunction<T>,
    c: T,
    sp: &SchemeParams<T>,
) -> Result<GridFunction<T>> {
    if discount_field.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let op = Operator::new(m, f.grid(), c, sp)?;
    let mut out = vec![T::zero(); f.values().len()];
    op.apply(f.values(), discount_field.values(), &mut out);
    Ok(GridFunction::from_raw(*f.grid(), out))
}

/// Node pinned to a fixed value during a critical (`lambda = 0`) solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Anchor<T> {
    pub node: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedSolution<T> {
    pub lambda: T,
    pub c: T,
    pub u: GridFunction<T>,
    pub iterations: usize,
    /// `sup |u - T[lambda u] u|` (anchor nodes excluded).
    pub residual: T,
}

/// Serializable sidecar of a [`DiscountedSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub lambda: f64,
    pub c: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl<T: Real> DiscountedSolution<T> {
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            lambda: self.lambda.as_f64(),
            c: self.c.as_f64(),
            residual: self.residual.as_f64(),
            iterations: self.iterations,
        }
    }

    /// CSV with header `x,u`.
    pub fn to_csv(&self) -> String {
        self.u.to_csv_with_header("u")
    }
}

/// Solves `u = T[lambda u] u`, i.e. the scheme for `H(x, u', lambda u) = c`.
///
/// With `lambda = 0` the solution is only determined up to the structure of the
/// critical equation, so at least one anchor is required.
pub fn solve_discounted<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    lambda: T,
    c: T,
    sp: &SchemeParams<T>,
    init: &GridFunction<T>,
    anchors: &[Anchor<T>],
) -> Result<DiscountedSolution<T>> {
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidScheme(format!("lambda must be >= 0, got {lambda}")));
    }
    if lambda == T::zero() && anchors.is_empty() {
        return Err(Error::UnanchoredCriticalSolve);
    }
    let grid = *init.grid();
    let op = Operator::new(m, &grid, c, sp)?;
    let n = grid.points();
    let mut pinned = vec![false; n];
    let mut u = init.values().to_vec();
    for a in anchors {
        if a.node >= n {
            return Err(Error::InvalidScheme(format!("anchor node {} outside grid of {n} points", a.node)));
        }
        pinned[a.node] = true;
        u[a.node] = a.value;
    }

    let mut damping = sp.damping;
    let mut last = T::infinity();
    let mut rising = 0usize;
    let mut scratch = vec![T::zero(); n];
    let mut discount = vec![T::zero(); n];
    let mut iterations = 0;
    let mut residual = op.residual(&u, lambda, &pinned);
    while residual > sp.tol {
        if iterations >= sp.max_iter {
            return Err(Error::MaxIterExceeded { iterations, residual: residual.as_f64() });
        }
        match sp.iteration {
            Iteration::GaussSeidel => {
                let forward = iterations % 2 == 0;
                for k in 0..n {
                    let i = if forward { k } else { n - 1 - k };
                    if pinned[i] {
                        continue;
                    }
                    let cand = op.implicit_node(&u, i, lambda);
                    u[i] = if damping == T::one() { cand } else { u[i] + damping * (cand - u[i]) };
                }
            }
            Iteration::Jacobi => {
                for (d, &ui) in discount.iter_mut().zip(&u) {
                    *d = lambda * ui;
                }
                op.apply(&u, &discount, &mut scratch);
                for i in 0..n {
                    if !pinned[i] {
                        u[i] = u[i] + damping * (scratch[i] - u[i]);
                    }
                }
            }
        }
        iterations += 1;
        if sp.iteration == Iteration::GaussSeidel && iterations % 2 == 1 {
            // residual is checked after each forward/backward pair
            continue;
        }
        residual = op.residual(&u, lambda, &pinned);
        if residual > last {
            rising += 1;
            if rising >= 3 {
                damping = damping * T::lit(0.5);
                rising = 0;
            }
        } else {
            rising = 0;
        }
        last = residual;
    }
    if let Some(node) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { node });
    }
    Ok(DiscountedSolution { lambda, c, u: GridFunction::from_raw(grid, u), iterations, residual })
}

#[cfg(test)]
mod tests;
