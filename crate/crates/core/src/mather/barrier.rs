//! Peierls barrier `h(x, y) = liminf_t h_t(x, y)` by a windowed minimum.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::scalar::Real;
use crate::solver::{ActionFlow, SchemeParams, DEFAULT_BIG};
use crate::torus::{Grid, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams<T> {
    /// Start of the liminf window.
    pub t1: T,
    /// End of the liminf window.
    pub t2: T,
    /// Oscillation over the window above `10 * window_tol` is reported as an error.
    pub window_tol: T,
}

impl<T: Real> Default for BarrierParams<T> {
    fn default() -> Self {
        Self { t1: T::lit(20.0), t2: T::lit(40.0), window_tol: T::lit(1e-4) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierTable<T> {
    grid: Grid<T>,
    sources: Vec<usize>,
    /// source-major: `values[s * points + target]`
    values: Vec<T>,
    /// `sup |h(x, .) - T h(x, .)|` per source.
    pub residuals: Vec<T>,
    /// `max_y (max_t - min_t) h_t(x, y)` over the window, per source.
    pub oscillation: Vec<T>,
    pub t1: T,
    pub t2: T,
    pub tau: T,
}

impl<T: Real> BarrierTable<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    fn slot(&self, source: usize) -> Option<usize> {
        self.sources.iter().position(|&s| s == source)
    }

    /// `h(x_source, x_target)` when `source` is in the table.
    pub fn value(&self, source: usize, target: usize) -> Option<T> {
        self.slot(source).map(|s| self.values[s * self.grid.points() + target])
    }

    /// `h(x_source, .)`.
    pub fn row(&self, source: usize) -> Option<GridFunction<T>> {
        let n = self.grid.points();
        self.slot(source).map(|s| GridFunction::from_raw(self.grid, self.values[s * n..(s + 1) * n].to_vec()))
    }

    /// CSV `source,target,h` with node positions.
    pub fn to_csv(&self) -> String {
        let n = self.grid.points();
        let mut out = String::from("source,target,h\n");
        for (s, &src) in self.sources.iter().enumerate() {
            for t in 0..n {
                let _ = writeln!(out, "{},{},{}", self.grid.node(src), self.grid.node(t), self.values[s * n + t]);
            }
        }
        out
    }
}

/// `h(x_s, .)` for every source: the minimum of `h_t` over `t in [t1, t2]`,
/// with `L^0 + c` as running cost (`m_0` frozen at `u = 0`, `c` its critical value).
pub fn peierls_barrier<T: Real, M: Model<T> + ?Sized>(
    m_0: &M,
    c: T,
    grid: &Grid<T>,
    sources: &[usize],
    params: &BarrierParams<T>,
    sp: &SchemeParams<T>,
) -> Result<BarrierTable<T>> {
    if !(params.t1 < params.t2) {
        return Err(Error::InvalidHorizon(format!("need t1 < t2, got {} and {}", params.t1, params.t2)));
    }
    let mut flow = ActionFlow::new(m_0, c, grid, sources, sp, T::lit(DEFAULT_BIG))?;
    let k1 = flow.steps_for(params.t1)?;
    let k2 = flow.steps_for(params.t2)?;
    for _ in 0..k1 {
        flow.step();
    }
    let n = grid.points();
    let k = sources.len();
    let mut lo = vec![T::zero(); n * k];
    let mut hi = vec![T::zero(); n * k];
    for s in 0..k {
        for t in 0..n {
            lo[s * n + t] = flow.value(s, t);
            hi[s * n + t] = flow.value(s, t);
        }
    }
    for _ in k1..k2 {
        flow.step();
        for s in 0..k {
            for t in 0..n {
                let v = flow.value(s, t);
                let idx = s * n + t;
                if v < lo[idx] {
                    lo[idx] = v;
                }
                if v > hi[idx] {
                    hi[idx] = v;
                }
            }
        }
    }
    let limit = T::lit(10.0) * params.window_tol;
    let mut oscillation = Vec::with_capacity(k);
    for (s, &src) in sources.iter().enumerate() {
        let amp = (0..n).fold(T::zero(), |a, t| a.max(hi[s * n + t] - lo[s * n + t]));
        if amp > limit {
            return Err(Error::LiminfWindowTooSmall {
                source_node: src,
                amplitude: amp.as_f64(),
                limit: limit.as_f64(),
            });
        }
        oscillation.push(amp);
    }
    let op = crate::solver::Operator::new(m_0, grid, c, sp)?;
    let zero = vec![T::zero(); n];
    let mut th = vec![T::zero(); n];
    let residuals = (0..k)
        .map(|s| {
            let row = &lo[s * n..(s + 1) * n];
            op.apply(row, &zero, &mut th);
            row.iter().zip(&th).fold(T::zero(), |a, (h, t)| a.max((*h - *t).abs()))
        })
        .collect();
    Ok(BarrierTable {
        grid: *grid,
        sources: sources.to_vec(),
        values: lo,
        residuals,
        oscillation,
        t1: params.t1,
        t2: params.t2,
        tau: sp.tau,
    })
}

/// Sources with `h(x, x) <= tol`.
pub fn aubry_set<T: Real>(bt: &BarrierTable<T>, tol: T) -> Vec<usize> {
    bt.sources().iter().copied().filter(|&s| bt.value(s, s).is_some_and(|h| h <= tol)).collect()
}
