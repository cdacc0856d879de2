//! Critical values `c(H^r)` by the ergodic (vanishing discount) route and by
//! the Mather LP, and the shift `c0` with `c(H^{c0}) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mather::{solve_mather_lp, ClosedMeasurePolytope, MatherSolution};
use crate::model::{Frozen, LinearDiscount, Model};
use crate::scalar::Real;
use crate::solver::{solve_discounted, SchemeParams};
use crate::torus::{Grid, GridFunction};

/// Discount ladder of the ergodic route.
pub const ERGODIC_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ergodic,
    Lp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValue {
    pub value: f64,
    pub method: Method,
    /// Spread of the extrapolants (ergodic) or the LP tolerance (lp).
    pub error: f64,
    pub points: usize,
    pub tau: f64,
    /// `-lambda mean(u_lambda)` along the ladder (ergodic only).
    pub ladder: Vec<f64>,
    /// The ladder values move monotonically (ergodic only; always true for lp).
    pub trend_monotone: bool,
}

/// `c(H^r) = -lim lambda u_lambda` for `lambda u + H^r(x, u') = 0`, with a
/// two-level Richardson extrapolation over [`ERGODIC_LADDER`].
pub fn critical_value_ergodic<T: Real, M: Model<T>>(m_r: &M, grid: &Grid<T>, sp: &SchemeParams<T>) -> Result<CriticalValue> {
    let disc = LinearDiscount::new(m_r);
    let mut init = GridFunction::constant(*grid, T::zero());
    let mut est = Vec::with_capacity(ERGODIC_LADDER.len());
    for &lambda in &ERGODIC_LADDER {
        let lambda = T::lit(lambda);
        let sol = solve_discounted(&disc, lambda, T::zero(), sp, &init, &[])?;
        est.push(-(lambda * sol.u.mean()).as_f64());
        init = sol.u;
    }
    // lambda halves along the ladder; the bias is linear then quadratic in lambda
    let r1a = 2.0 * est[1] - est[0];
    let r1b = 2.0 * est[2] - est[1];
    let r2 = (4.0 * r1b - r1a) / 3.0;
    let spread = [r1a, r1b, r2].iter().fold(0.0f64, |a, v| a.max((v - r2).abs()));
    let increasing = est.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = est.windows(2).all(|w| w[1] <= w[0]);
    Ok(CriticalValue {
        value: r2,
        method: Method::Ergodic,
        error: spread,
        points: grid.points(),
        tau: sp.tau.as_f64(),
        ladder: est,
        trend_monotone: increasing || decreasing,
    })
}

/// `c(H^r) = -min sum mu L^r` over the closed-measure polytope priced with `L^r`.
pub fn critical_value_lp<T: Real>(p: &ClosedMeasurePolytope<T>) -> Result<(CriticalValue, MatherSolution<T>)> {
    let sol = match solve_mather_lp(p) {
        Err(Error::LpInfeasible) => {
            return Err(Error::LpMalformed("closed-measure polytope reported infeasible".into()))
        }
        other => other?,
    };
    let cv = CriticalValue {
        value: -sol.value.as_f64(),
        method: Method::Lp,
        error: 1e-9,
        points: p.grid().points(),
        tau: p.tau().as_f64(),
        ladder: Vec::new(),
        trend_monotone: true,
    };
    Ok((cv, sol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftSearch {
    pub c0: f64,
    /// `c(H^{c0})` at the returned shift.
    pub critical: f64,
    pub iterations: usize,
}

/// Bisection for `c(H^r) = 0` using the LP route on `p`'s grid; the bracket
/// must satisfy `c(H^lo) < 0 < c(H^hi)`.
pub fn find_c0<T: Real, M: Model<T>>(
    m: &M,
    p: &ClosedMeasurePolytope<T>,
    bracket: (f64, f64),
    tol: f64,
) -> Result<ShiftSearch> {
    let mut poly = p.clone();
    let mut crit = |r: f64| -> Result<f64> {
        poly.reprice(&Frozen::new(m, T::lit(r)));
        Ok(critical_value_lp(&poly)?.0.value)
    };
    let (mut lo, mut hi) = bracket;
    let (c_lo, c_hi) = (crit(lo)?, crit(hi)?);
    if !(lo < hi) || !(c_lo < 0.0) || !(c_hi > 0.0) {
        return Err(Error::BracketInvalid { lo, hi, c_lo, c_hi });
    }
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let c_mid = crit(mid)?;
        iterations += 1;
        if c_mid.abs() <= tol || hi - lo <= f64::EPSILON * (1.0 + mid.abs()) || iterations >= 200 {
            return Ok(ShiftSearch { c0: mid, critical: c_mid, iterations });
        }
        if c_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
