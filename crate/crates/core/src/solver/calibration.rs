//! Domination checks, calibrated backtracking and discounted occupation measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::OccupationMeasure;
use crate::model::{partial_l_u0, Model};
use crate::scalar::Real;

use super::{DiscountedSolution, Operator, SchemeParams};

/// Worst slacks of the discrete domination inequality
/// `u(end) - u(start) <= sum tau (L(x, v, lambda u(x)) + c)`.
///
/// Off-grid departure points are read as the two-node distribution given by
/// the interpolation weights, so the inequality is exact up to one residual per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationReport {
    /// `min_x tau (L(x, 0, lambda u(x)) + c)`.
    pub worst_rest_slack: f64,
    /// `min_{x, v} u(x - tau v) + tau (L + c) - u(x)`.
    pub worst_step_slack: f64,
    /// Worst slack over the random multi-step curves.
    pub worst_curve_slack: f64,
    /// Worst curve slack plus `steps * residual`: nonnegative when domination holds.
    pub worst_curve_margin: f64,
    pub curves: usize,
}

/// Checks rest curves, every one-step curve and `trials` random zig-zag
/// curves of up to `max_steps` steps (seeded, reproducible).
pub fn verify_domination<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    sol: &DiscountedSolution<T>,
    sp: &SchemeParams<T>,
    trials: usize,
    max_steps: usize,
    seed: u64,
) -> Result<DominationReport> {
    let grid = *sol.u.grid();
    let op = Operator::new(m, &grid, sol.c, sp)?;
    let u = sol.u.values();
    let n = grid.points();
    let nv = sp.vgrid.count();
    let zero = sp.vgrid.zero_index();
    let lambda = sol.lambda;

    let mut rest = f64::INFINITY;
    let mut step = f64::INFINITY;
    for i in 0..n {
        let d = lambda * u[i];
        rest = rest.min((sp.tau * (op.table.value(m, i, zero, d) + sol.c)).as_f64());
        for j in 0..nv {
            step = step.min((op.candidate(u, i, j, d) - u[i]).as_f64());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = f64::INFINITY;
    let mut margin = f64::INFINITY;
    let residual = sol.residual.as_f64();
    let mut dist = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    for _ in 0..trials {
        let end = rng.gen_range(0..n);
        let len = rng.gen_range(1..=max_steps.max(1));
        dist.fill(T::zero());
        dist[end] = T::one();
        let mut cost = T::zero();
        let mut j = rng.gen_range(0..nv);
        for _ in 0..len {
            // zig-zag: mostly keep direction, sometimes jump anywhere
            if rng.gen_bool(0.3) {
                j = rng.gen_range(0..nv);
            }
            next.fill(T::zero());
            for i in 0..n {
                let p = dist[i];
                if p == T::zero() {
                    continue;
                }
                let cell = op.stencil.cell(i, j);
                next[cell.left] = next[cell.left] + p * cell.w_left;
                next[cell.right] = next[cell.right] + p * cell.w_right;
                cost = cost + p * sp.tau * (op.table.value(m, i, j, lambda * u[i]) + sol.c);
            }
            std::mem::swap(&mut dist, &mut next);
        }
        let start: T = dist.iter().zip(u).map(|(p, v)| *p * *v).sum();
        let slack = (cost - (u[end] - start)).as_f64();
        curve = curve.min(slack);
        margin = margin.min(slack + len as f64 * residual);
    }
    Ok(DominationReport {
        worst_rest_slack: rest,
        worst_step_slack: step,
        worst_curve_slack: curve,
        worst_curve_margin: margin,
        curves: trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathNode {
    pub time: f64,
    pub position: f64,
    /// Velocity on `[time - tau, time]` (zero for the first node).
    pub velocity: f64,
    /// `tau (L(x, v, lambda u(x)) + c)` for that step (zero for the first node).
    pub action: f64,
}

/// Backward-greedy calibrated curve ending at a node at time 0, in forward time order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibratedPath {
    pub nodes: Vec<PathNode>,
    pub total_action: f64,
    /// Worst `|u(x_k) - u(x_{k-1}) - action_k|` with `u` interpolated off the grid.
    pub calibration_defect: f64,
    /// Same quantity for the final step, whose endpoint is a grid node.
    pub first_step_defect: f64,
}

impl CalibratedPath {
    pub fn steps(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

/// Follows the argmin velocity of the one-step operator backwards from `node`
/// for `steps` steps; ties go to the smaller `|v|`, then to the negative `v`.
pub fn backtrack_calibrated<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    sol: &DiscountedSolution<T>,
    node: usize,
    steps: usize,
    sp: &SchemeParams<T>,
) -> Result<CalibratedPath> {
    let grid = *sol.u.grid();
    sp.validate(&grid)?;
    if steps == 0 {
        return Ok(CalibratedPath { nodes: Vec::new(), total_action: 0.0, calibration_defect: 0.0, first_step_defect: 0.0 });
    }
    let u = &sol.u;
    let vs = sp.vgrid.velocities();
    let tie = T::lit(1e-12);
    let mut pos = grid.node(node);
    let mut back = Vec::with_capacity(steps + 1);
    let mut worst = 0.0f64;
    let mut first = 0.0f64;
    for k in 0..steps {
        let upos = u.interp(pos);
        let d = sol.lambda * upos;
        let mut best: Option<(T, T, T, T)> = None; // (value, v, departure, action)
        for &v in &vs {
            let dep = grid.wrap(pos - sp.tau * v);
            let action = sp.tau * (m.lagrangian(pos, v, d) + sol.c);
            let val = u.interp(dep) + action;
            let take = match best {
                None => true,
                Some((bv, bvel, _, _)) => {
                    let scale = tie * (T::one() + bv.abs());
                    if val < bv - scale {
                        true
                    } else if val <= bv + scale {
                        v.abs() < bvel.abs() || (v.abs() == bvel.abs() && v < bvel)
                    } else {
                        false
                    }
                }
            };
            if take {
                best = Some((val, v, dep, action));
            }
        }
        let (_, v, dep, action) = best.expect("velocity grid is nonempty");
        let defect = (upos - u.interp(dep) - action).abs().as_f64();
        worst = worst.max(defect);
        if k == 0 {
            first = defect;
        }
        back.push((pos, v, action));
        pos = dep;
    }
    back.push((pos, T::zero(), T::zero()));
    back.reverse();
    // after reversing, entry k carries the step arriving at it from entry k - 1
    let mut nodes = Vec::with_capacity(steps + 1);
    let mut total = 0.0;
    for (k, (p, v, a)) in back.iter().enumerate() {
        let time = -((steps - k) as f64) * sp.tau.as_f64();
        nodes.push(PathNode { time, position: p.as_f64(), velocity: v.as_f64(), action: a.as_f64() });
        total += a.as_f64();
    }
    Ok(CalibratedPath { nodes, total_action: total, calibration_defect: worst, first_step_defect: first })
}

/// Discounted occupation measure of a backtracked path: step `k` weighs
/// `exp(lambda tau sum_{later steps} dL/du(x, v, 0))`, positions are split over
/// the two neighbouring nodes, and the total mass is normalized to 1.
pub fn build_discounted_occupation<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    path: &CalibratedPath,
    lambda: T,
    sol_grid: &crate::torus::Grid<T>,
    sp: &SchemeParams<T>,
) -> Result<OccupationMeasure<T>> {
    if path.steps() == 0 {
        return Err(Error::EmptyPath);
    }
    let nv = sp.vgrid.count();
    let mut weights = vec![T::zero(); sol_grid.points() * nv];
    let mut tail = T::zero();
    let mut raw = Vec::with_capacity(path.steps());
    for node in path.nodes[1..].iter().rev() {
        let (x, v) = (T::lit(node.position), T::lit(node.velocity));
        raw.push((x, v, (lambda * sp.tau * tail).exp()));
        tail = tail + partial_l_u0(m, x, v)?;
    }
    let total: T = raw.iter().map(|r| r.2).sum();
    if !(total > T::zero()) || !total.is_finite() {
        return Err(Error::DegenerateNormalization);
    }
    for (x, v, w) in raw {
        let j = sp.vgrid.nearest_index(v);
        let cell = sol_grid.locate(x);
        let w = w / total;
        weights[cell.left * nv + j] = weights[cell.left * nv + j] + w * cell.w_left;
        weights[cell.right * nv + j] = weights[cell.right * nv + j] + w * cell.w_right;
    }
    OccupationMeasure::new(*sol_grid, sp.vgrid, weights, format!("discounted occupation, lambda = {lambda}"))
}
