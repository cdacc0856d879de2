//! Non-uniqueness without (L4): `u_lambda` on `R/2Z` glued with the two
//! critical solutions `v1`, `v2` of the pendulum on the other half of `R/4Z`.

use wkam_core::model::{model_zoo, Model, QuadraticModel, ZooParams};
use wkam_core::solver::{lax_oleinik_step, solve_discounted, verify_domination, Anchor};
use wkam_core::{DiscountedSolution, Grid, GridFunction, SchemeParams};

use super::rhs;
use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::report::{ExperimentReport, LadderRow, Verdict};

/// The glued families must stay this far apart at every ladder entry.
const GAP_THRESHOLD: f64 = 1.0;

/// Simpson nodes per grid spacing for the closed-form `v1`, `v2`.
const OVERSAMPLING: f64 = 10.0;

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = (intervals.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

fn speed(s: f64) -> f64 {
    (2.0 - 2.0 * (2.0 * std::f64::consts::PI * s).cos()).max(0.0).sqrt()
}

fn integral(a: f64, b: f64, spacing: f64) -> f64 {
    let len = (b - a).abs();
    if len == 0.0 {
        return 0.0;
    }
    let intervals = (OVERSAMPLING * len / spacing).ceil() as usize;
    simpson(speed, a.min(b), a.max(b), intervals)
}

/// `v1(x) = |int_k^x sqrt(2 - 2 cos 2 pi s) ds|`, `k` the nearest integer: zero on `Z`.
pub fn v1_closed_form(x: f64, spacing: f64) -> f64 {
    let x = x.rem_euclid(2.0);
    integral(x.round(), x, spacing)
}

/// `v2(x) = |int_k^x sqrt(2 - 2 cos 2 pi s) ds|`, `k` the nearest even integer: zero on `2Z`.
pub fn v2_closed_form(x: f64, spacing: f64) -> f64 {
    let x = x.rem_euclid(2.0);
    let k = if x <= 1.0 { 0.0 } else { 2.0 };
    integral(k, x, spacing)
}

/// The two glued candidates for one `lambda`.
#[derive(Debug, Clone)]
pub struct Glued {
    pub lambda: f64,
    /// `u_lambda` on `R/2Z`.
    pub base: DiscountedSolution,
    /// `u_lambda` on `[0, 2)`, `v(x - 2) + u_lambda(2)` on `[2, 4)`.
    pub v1: GridFunction,
    pub v2: GridFunction,
}

struct Gluing {
    m4: QuadraticModel<f64>,
    m2: QuadraticModel<f64>,
    grid2: Grid,
    grid4: Grid,
    sp: SchemeParams,
    c: f64,
    /// Discrete critical solutions on `R/2Z`.
    w1: GridFunction,
    w2: GridFunction,
}

impl Gluing {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        if cfg.model != "alpha_coupled" || cfg.params.period != 4.0 {
            return Err(LabError::Unsupported(format!(
                "the gluing construction needs alpha_coupled with period 4, got {} with period {}",
                cfg.model, cfg.params.period
            )));
        }
        let m4 = model_zoo::<f64>(&cfg.model, &cfg.params)?;
        let m2 = model_zoo::<f64>(&cfg.model, &ZooParams { period: 2.0, ..cfg.params.clone() })?;
        let grid4 = cfg.grid()?;
        let grid2 = Grid::with_density(2.0, cfg.points_per_unit)?;
        let sp = cfg.scheme()?;
        let c = rhs(cfg, &m4, &grid4, &sp)?;
        let pend = QuadraticModel::pendulum(2.0)?;
        let high = GridFunction::constant(grid2, 10.0);
        let one = grid2.nearest_node(1.0);
        let pins1 = [Anchor { node: 0, value: 0.0 }, Anchor { node: one, value: 0.0 }];
        let w1 = solve_discounted(&pend, 0.0, c, &sp, &high, &pins1)?.u;
        let w2 = solve_discounted(&pend, 0.0, c, &sp, &high, &[Anchor { node: 0, value: 0.0 }])?.u;
        Ok(Self { m4, m2, grid2, grid4, sp, c, w1, w2 })
    }

    fn junctions(&self) -> [usize; 2] {
        [0, self.grid2.points()]
    }

    fn glue(&self, base: &GridFunction, w: &GridFunction) -> Result<GridFunction> {
        let half = self.grid2.points();
        let at_two = base.value(0);
        let values = (0..self.grid4.points())
            .map(|i| if i < half { base.value(i) } else { w.value(i - half) + at_two })
            .collect();
        Ok(GridFunction::new(self.grid4, values)?)
    }

    fn family(&self, lambda: f64) -> Result<Glued> {
        let init = GridFunction::constant(self.grid2, 0.0);
        let base = solve_discounted(&self.m2, lambda, self.c, &self.sp, &init, &[])?;
        let v1 = self.glue(&base.u, &self.w1)?;
        let v2 = self.glue(&base.u, &self.w2)?;
        Ok(Glued { lambda, base, v1, v2 })
    }

    /// `(sup |T v - v|, worst node)` on `R/4Z`.
    fn residual(&self, v: &GridFunction, lambda: f64) -> Result<(f64, usize)> {
        let disc = v.map(|u| lambda * u);
        let tv = lax_oleinik_step(&self.m4, &disc, v, self.c, &self.sp)?;
        let mut worst = (0.0, 0);
        for (i, (a, b)) in tv.values().iter().zip(v.values()).enumerate() {
            let r = (a - b).abs();
            if r > worst.0 {
                worst = (r, i);
            }
        }
        Ok(worst)
    }

    fn nearest_junction(&self, node: usize) -> usize {
        let n = self.grid4.points() as isize;
        let dist = |j: usize| {
            let d = (node as isize - j as isize).rem_euclid(n);
            d.min(n - d)
        };
        *self.junctions().iter().min_by_key(|&&j| dist(j)).expect("two junctions")
    }

    /// Largest jump between second-order one-sided slopes at the junctions.
    fn junction_jump(&self, v: &GridFunction) -> f64 {
        self.junctions().iter().map(|&j| slope_jump(v, j)).fold(0.0, f64::max)
    }

    /// Slope jump of the discrete `v2` at `x = 0`, where the continuum `v2` is `C^1`:
    /// the kink the first-order scheme puts at every Aubry point.
    fn intrinsic_jump(&self) -> f64 {
        slope_jump(&self.w2, 0)
    }
}

/// `|left - right|` for second-order one-sided slopes at node `j`.
fn slope_jump(v: &GridFunction, j: usize) -> f64 {
    let grid = v.grid();
    let h = grid.spacing();
    let at = |i: isize| v.value(grid.wrap_index(i));
    let j = j as isize;
    let left = (3.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / (2.0 * h);
    let right = (-3.0 * at(j) + 4.0 * at(j + 1) - at(j + 2)) / (2.0 * h);
    (left - right).abs()
}

/// Builds both glued families over the ladder, certifies them as discrete
/// solutions and reports their sup distance.
pub fn run_counterexample(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let g = Gluing::new(cfg)?;
    let mut report = ExperimentReport::new(cfg, g.m4.label());
    report.set("c", g.c);
    let h = g.grid2.spacing();
    let (peak1, peak2) = (v1_closed_form(0.5, h), v2_closed_form(1.0, h));
    report.set("v1_peak", peak1);
    report.set("v2_peak", peak2);
    report.verdict(Verdict::within("v1(1/2) = 2/pi", peak1, 2.0 / std::f64::consts::PI, 1e-3));
    report.verdict(Verdict::within("v2(1) = 4/pi", peak2, 4.0 / std::f64::consts::PI, 1e-3));
    let q1 = GridFunction::from_fn(g.grid2, |x| v1_closed_form(x, h))?;
    let q2 = GridFunction::from_fn(g.grid2, |x| v2_closed_form(x, h))?;
    report.set("v1_scheme_vs_quadrature", g.w1.sup_dist(&q1)?);
    report.set("v2_scheme_vs_quadrature", g.w2.sup_dist(&q2)?);
    report.artifact("v1.csv", q1.to_csv());
    report.artifact("v2.csv", q2.to_csv());

    let bound = 10.0 * cfg.tol;
    let jump_tol = 2.0 * g.grid4.spacing();
    let intrinsic = g.intrinsic_jump();
    report.set("intrinsic_slope_jump", intrinsic);
    let mut min_gap = f64::INFINITY;
    for (k, &lambda) in cfg.lambda_ladder.iter().enumerate() {
        let fam = g.family(lambda)?;
        let gap = fam.v1.sup_dist(&fam.v2)?;
        min_gap = min_gap.min(gap);
        let mut row = LadderRow::new(lambda, gap, 0.0, fam.base.iterations);
        for (name, v) in [("v1", &fam.v1), ("v2", &fam.v2)] {
            let (res, node) = g.residual(v, lambda)?;
            let sol = DiscountedSolution { lambda, c: g.c, u: v.clone(), iterations: 0, residual: res };
            let dom = verify_domination(&g.m4, &sol, &g.sp, 32, 200, k as u64)?;
            let jump = g.junction_jump(v);
            row.residual = row.residual.max(res);
            row = row
                .with(&format!("{name}_residual"), res)
                .with(&format!("{name}_step_slack"), dom.worst_step_slack)
                .with(&format!("{name}_junction_jump"), jump);
            report.verdict(Verdict::at_most(
                format!("{name} residual[lambda={lambda}] (worst node {node}, junction {})", g.nearest_junction(node)),
                res,
                bound,
                0.0,
            ));
            report.verdict(Verdict::at_least(
                format!("{name} domination[lambda={lambda}]"),
                dom.worst_step_slack.min(dom.worst_rest_slack),
                0.0,
                bound,
            ));
            report.verdict(Verdict::within(
                format!("{name} junction slope jump vs scheme kink[lambda={lambda}]"),
                jump,
                intrinsic,
                jump_tol,
            ));
            report.artifact(format!("{name}_lambda_{k}.csv"), v.to_csv());
        }
        report.verdict(Verdict::at_least(format!("gap[lambda={lambda}]"), gap, GAP_THRESHOLD, 0.0));
        report.rows.push(row);
    }
    report.set("min_gap", min_gap);
    let verdict = if min_gap >= GAP_THRESHOLD { "non-convergence exhibited" } else { "gap below threshold" };
    report.label("verdict", verdict);
    Ok(report)
}

/// Solves from every constant seed (and the glued candidates when
/// `cfg.glued_seeds`) and compares the fixed points pairwise.
pub fn run_uniqueness_probe(cfg: &ExperimentConfig, seeds: &[f64]) -> Result<ExperimentReport> {
    let model = model_zoo::<f64>(&cfg.model, &cfg.params)?;
    let grid = cfg.grid()?;
    let sp = cfg.scheme()?;
    let gluing = if cfg.glued_seeds { Some(Gluing::new(cfg)?) } else { None };
    let c = match &gluing {
        Some(g) => g.c,
        None => rhs(cfg, &model, &grid, &sp)?,
    };
    let mut report = ExperimentReport::new(cfg, model.label());
    report.set("c", c);
    let mut unique = true;
    for (k, &lambda) in cfg.lambda_ladder.iter().enumerate() {
        let mut inits: Vec<(String, GridFunction)> =
            seeds.iter().map(|&s| (format!("{s}"), GridFunction::constant(grid, s))).collect();
        if let Some(g) = &gluing {
            let fam = g.family(lambda)?;
            inits.push(("v1".into(), fam.v1));
            inits.push(("v2".into(), fam.v2));
        }
        let mut sols = Vec::with_capacity(inits.len());
        let mut iterations = 0;
        let mut residual = 0.0f64;
        for (name, init) in &inits {
            let sol = solve_discounted(&model, lambda, c, &sp, init, &[])?;
            iterations = iterations.max(sol.iterations);
            residual = residual.max(sol.residual);
            report.artifact(format!("u_lambda_{k}_seed_{name}.csv"), sol.to_csv());
            sols.push(sol.u);
        }
        let mut gap = 0.0f64;
        for i in 0..sols.len() {
            for j in i + 1..sols.len() {
                gap = gap.max(sols[i].sup_dist(&sols[j])?);
            }
        }
        let threshold = 2.0 * cfg.tol * (1.0f64).max(1.0 / (cfg.tau * lambda));
        unique &= gap <= threshold;
        report.rows.push(LadderRow::new(lambda, gap, residual, iterations).with("threshold", threshold));
        report.verdict(Verdict::at_most(format!("pairwise gap[lambda={lambda}]"), gap, threshold, 0.0));
    }
    report.label("verdict", if unique { "unique (empirical)" } else { "multiple solutions" });
    Ok(report)
}
