use wkam_core::critical::find_c0;
use wkam_core::mather::{
    check_l4, peierls_barrier, select_u0, verify_largest_subsolution, BarrierTable, ClosedMeasurePolytope, L4Report,
    L4Verdict, MatherSolution, ScreenedFace, Selection, SelectionParams, L4_MARGIN,
};
use wkam_core::model::{Frozen, Model, Shifted};
use wkam_core::solver::solve_discounted;
use wkam_core::{Grid, GridFunction, SchemeParams};

use super::basic::json;
use super::{critical_lp, Setup};
use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::report::{ExperimentReport, LadderRow, Verdict};

/// Slack allowed when asserting that the ladder errors do not increase.
pub const MONOTONE_SLACK: f64 = 1e-3;

/// Tolerance of the largest-subsolution checks.
pub const LIMIT_TOL: f64 = 1e-6;

/// Margin of the equiboundedness band.
const BAND_SLACK: f64 = 0.05;

/// Everything needed to evaluate the selected limit `u0`.
#[derive(Debug, Clone)]
pub struct LimitPipeline {
    /// Discrete `c(H^0)`.
    pub c: f64,
    pub polytope: ClosedMeasurePolytope<f64>,
    pub mather: MatherSolution<f64>,
    pub l4: L4Report,
    /// Barrier rows for every node carrying the screened Mather face.
    pub barrier: BarrierTable<f64>,
    pub selection: Selection<f64>,
}

/// Mather LP, (L4) check, barrier from the face support and the selection formula.
pub fn limit_pipeline<M: Model<f64>>(
    m: &M,
    grid: &Grid,
    sp: &SchemeParams,
    cfg: &ExperimentConfig,
) -> Result<LimitPipeline> {
    let (p, sol, c) = critical_lp(m, grid, sp)?;
    let l4 = check_l4(m, &p, &sol, L4_MARGIN)?;
    if l4.verdict != L4Verdict::Holds {
        return Err(LabError::L4Required { model: m.label(), face_max: l4.face_max_dl_du });
    }
    let params = SelectionParams::default();
    let sources = ScreenedFace::new(&p, &sol, params.screen, params.face_tol).support_nodes();
    let bt = peierls_barrier(&Frozen::new(m, 0.0), c, grid, &sources, &cfg.barrier_params(), sp)?;
    let selection = select_u0(m, &bt, &p, &sol, &params)?;
    Ok(LimitPipeline { c, polytope: p, mather: sol, l4, barrier: bt, selection })
}

fn record_pipeline(report: &mut ExperimentReport, lim: &LimitPipeline) {
    report.set("c", lim.c);
    report.set("face_max_dLdu", lim.selection.face_max_dl_du);
    report.set("barrier_sources", lim.barrier.sources().len() as f64);
    report.artifact("u0.csv", lim.selection.u0.to_csv());
    report.artifact("l4.json", json(&lim.l4));
    report.artifact("barrier.csv", lim.barrier.to_csv());
}

/// Selected limit `u0` and the largest-subsolution checks.
pub fn run_limit(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = Setup::new(cfg)?;
    let lim = limit_pipeline(&s.model, &s.grid, &s.sp, cfg)?;
    let mut report = ExperimentReport::new(cfg, s.label());
    record_pipeline(&mut report, &lim);
    let r = verify_largest_subsolution(
        &lim.selection.u0,
        &s.model,
        lim.c,
        &lim.polytope,
        &lim.mather,
        &lim.barrier,
        &s.sp,
        LIMIT_TOL,
        0.05,
    )?;
    report.verdict(Verdict::at_least("u0 is a critical subsolution", r.subsolution_slack, 0.0, LIMIT_TOL));
    report.verdict(Verdict::at_least("u0 meets the Mather constraint", r.face_min, 0.0, LIMIT_TOL));
    report.verdict(Verdict::at_most("u0 + delta breaks the constraint", r.shifted_face_min, -LIMIT_TOL, 0.0));
    report.verdict(Verdict::at_most("no barrier subsolution exceeds u0", r.maximality_gap, 0.0, LIMIT_TOL));
    report.artifact("largest_subsolution.json", json(&r));
    Ok(report)
}

/// `u_lambda` over the ladder against the selected limit `u0`.
///
/// Rows carry `e_lambda = sup |u_lambda - u0|`, the equiboundedness band slack
/// around `u_hat = h(y, .)` and the Lipschitz estimate.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = Setup::new(cfg)?;
    let lim = limit_pipeline(&s.model, &s.grid, &s.sp, cfg)?;
    let mut report = ExperimentReport::new(cfg, s.label());
    record_pipeline(&mut report, &lim);
    let u0 = &lim.selection.u0;
    let hat = lim.barrier.row(lim.barrier.sources()[0]).expect("pipeline source");
    let lower = hat.shifted(-hat.max() - BAND_SLACK);
    let upper = hat.shifted(-hat.min() + BAND_SLACK);

    let mut init = GridFunction::constant(s.grid, 0.0);
    let mut last: Vec<GridFunction> = Vec::new();
    let mut lips = Vec::new();
    for (k, &lambda) in cfg.lambda_ladder.iter().enumerate() {
        let sol = solve_discounted(&s.model, lambda, lim.c, &s.sp, &init, &[])?;
        let e = sol.u.sup_dist(u0)?;
        let below = min_gap(&sol.u, &lower);
        let above = min_gap(&upper, &sol.u);
        let lip = sol.u.lipschitz_estimate();
        lips.push(lip);
        report.rows.push(
            LadderRow::new(lambda, e, sol.residual, sol.iterations)
                .with("sup_error", e)
                .with("band_lower_slack", below)
                .with("band_upper_slack", above)
                .with("lipschitz", lip),
        );
        report.verdict(Verdict::at_least(format!("band lower[lambda={lambda}]"), below, 0.0, 0.0));
        report.verdict(Verdict::at_least(format!("band upper[lambda={lambda}]"), above, 0.0, 0.0));
        report.artifact(format!("u_lambda_{k}.csv"), sol.to_csv());
        init = sol.u.clone();
        last.push(sol.u);
        if last.len() > 2 {
            last.remove(0);
        }
    }
    report.ladder_monotone("e non-increasing", MONOTONE_SLACK);
    let lip_max = lips.iter().fold(0.0f64, |a, &b| a.max(b));
    report.set("lipschitz_max", lip_max);
    for (row, lip) in report.rows.clone().iter().zip(&lips) {
        report.verdict(Verdict::at_most(format!("lipschitz[lambda={}]", row.lambda), *lip, 1.1 * lip_max, 0.0));
    }
    if let Some(row) = report.rows.last() {
        report.set("final_error", row.value);
    }
    let n = cfg.lambda_ladder.len();
    if n >= 2 {
        // linear extrapolation in lambda to lambda = 0 from the last two rungs
        let (l_prev, l_last) = (cfg.lambda_ladder[n - 2], cfg.lambda_ladder[n - 1]);
        let w = l_last / (l_prev - l_last);
        let ext = last[1].zip_with(&last[0], |a, b| a + w * (a - b))?;
        let e_ext = ext.sup_dist(u0)?;
        report.set("extrapolated_error", e_ext);
        report.artifact("u_extrapolated.csv", ext.to_csv());
    }
    report.artifact("errors.csv", errors_csv(&report));
    Ok(report)
}

/// Shifted problem `H(x, v', lambda v) = 0` with `c(H^0) != 0`: finds `c0`,
/// then compares `v_lambda - c0 / lambda` with the selected limit of `H(x, p, c0 + u)`.
pub fn run_shifted(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = Setup::new(cfg)?;
    let (p, _, c_unshifted) = critical_lp(&s.model, &s.grid, &s.sp)?;
    let search = find_c0(&s.model, &p, (cfg.bracket[0], cfg.bracket[1]), 1e-10)?;
    let c0 = search.c0;
    let shifted = Shifted::new(&s.model, c0);
    let lim = limit_pipeline(&shifted, &s.grid, &s.sp, cfg)?;
    let mut report = ExperimentReport::new(cfg, s.label());
    record_pipeline(&mut report, &lim);
    report.set("c_unshifted", c_unshifted);
    report.set("c0", c0);
    report.set("c0_residual", search.critical);
    report.set("c0_iterations", search.iterations as f64);
    let v0 = &lim.selection.u0;
    for (k, &lambda) in cfg.lambda_ladder.iter().enumerate() {
        let init = GridFunction::constant(s.grid, c0 / lambda);
        let sol = solve_discounted(&s.model, lambda, 0.0, &s.sp, &init, &[])?;
        let recentred = sol.u.shifted(-c0 / lambda);
        let e = recentred.sup_dist(v0)?;
        report.rows.push(
            LadderRow::new(lambda, e, sol.residual, sol.iterations)
                .with("sup_error", e)
                .with("lambda_mean", lambda * sol.u.mean()),
        );
        report.artifact(format!("v_lambda_{k}.csv"), recentred.to_csv_with_header("v_minus_c0_over_lambda"));
    }
    report.ladder_monotone("e non-increasing", MONOTONE_SLACK);
    if let Some(row) = report.rows.last() {
        report.set("final_error", row.value);
    }
    report.artifact("errors.csv", errors_csv(&report));
    Ok(report)
}

/// `min_x (a - b)(x)`.
fn min_gap(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).fold(f64::INFINITY, |m, (x, y)| m.min(x - y))
}

fn errors_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("lambda,error,residual,iterations\n");
    for r in &report.rows {
        out.push_str(&format!("{},{},{},{}\n", r.lambda, r.value, r.residual, r.iterations));
    }
    out
}
