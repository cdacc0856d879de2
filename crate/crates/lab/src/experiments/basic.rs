use wkam_core::critical::critical_value_ergodic;
use wkam_core::mather::{aubry_set, check_l4, peierls_barrier, ScreenedFace, SelectionParams, L4_MARGIN};
use wkam_core::model::Frozen;
use wkam_core::solver::{solve_discounted, verify_domination};
use wkam_core::GridFunction;

use super::{critical_lp, rhs, Setup};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{ExperimentReport, LadderRow, Verdict};

/// Largest accepted gap between the ergodic and LP critical values.
pub const CRITICAL_AGREEMENT: f64 = 2e-2;

/// Measures emitted by the LP must meet their constraints to this level.
const MEASURE_TOL: f64 = 1e-9;

/// Solves `H(x, u', lambda u) = c` over the ladder from the first seed, plus
/// an anchored `lambda = 0` solve when anchors are given.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = Setup::new(cfg)?;
    let c = rhs(cfg, &s.model, &s.grid, &s.sp)?;
    let mut report = ExperimentReport::new(cfg, s.label());
    report.set("c", c);
    let seed = cfg.seeds.first().copied().unwrap_or(0.0);
    let init = GridFunction::constant(s.grid, seed);
    let mut lambdas = cfg.lambda_ladder.clone();
    if !cfg.anchors.is_empty() {
        lambdas.push(0.0);
    }
    for (k, &lambda) in lambdas.iter().enumerate() {
        let anchors = if lambda == 0.0 { cfg.anchors.as_slice() } else { &[] };
        let sol = solve_discounted(&s.model, lambda, c, &s.sp, &init, anchors)?;
        let dom = verify_domination(&s.model, &sol, &s.sp, 64, 200, k as u64)?;
        report.rows.push(
            LadderRow::new(lambda, lambda * sol.u.mean(), sol.residual, sol.iterations)
                .with("min", sol.u.min())
                .with("max", sol.u.max())
                .with("lipschitz", sol.u.lipschitz_estimate())
                .with("domination_margin", dom.worst_curve_margin),
        );
        report.verdict(Verdict::at_most(format!("residual[lambda={lambda}]"), sol.residual, cfg.tol, 0.0));
        report.verdict(Verdict::at_least(
            format!("domination[lambda={lambda}]"),
            dom.worst_curve_margin,
            0.0,
            10.0 * cfg.tol,
        ));
        report.artifact(format!("u_{k}.csv"), sol.to_csv());
        report.artifact(format!("u_{k}.json"), json(&sol.summary()));
    }
    Ok(report)
}

/// `c(H^0)` by the ergodic and LP routes; CSV `model,method,value,error`.
pub fn run_critical(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = Setup::new(cfg)?;
    let frozen = Frozen::new(&s.model, 0.0);
    let ergodic = critical_value_ergodic(&frozen, &s.grid, &s.sp)?;
    let (_, _, lp) = critical_lp(&s.model, &s.grid, &s.sp)?;
    let label = s.label();
    let mut report = ExperimentReport::new(cfg, &label);
    report.set("ergodic", ergodic.value);
    report.set("ergodic_error", ergodic.error);
    report.set("ergodic_trend_monotone", if ergodic.trend_monotone { 1.0 } else { 0.0 });
    report.set("lp", lp);
    report.set("gap", (ergodic.value - lp).abs());
    report.verdict(Verdict::within("ergodic vs lp", ergodic.value, lp, CRITICAL_AGREEMENT));
    let csv = format!(
        "model,method,value,error\n\"{label}\",ergodic,{},{}\n\"{label}\",lp,{lp},1e-9\n",
        ergodic.value, ergodic.error
    );
    report.artifact("critical.csv", csv);
    Ok(report)
}

/// Mather LP, (L4) probe and the screened optimal face.
pub fn run_mather(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = Setup::new(cfg)?;
    let (p, sol, c) = critical_lp(&s.model, &s.grid, &s.sp)?;
    let l4 = check_l4(&s.model, &p, &sol, L4_MARGIN)?;
    let face = ScreenedFace::new(&p, &sol, SelectionParams::default().screen, None);
    let mut report = ExperimentReport::new(cfg, s.label());
    report.set("critical", c);
    report.set("lp_value", l4.lp_value);
    report.set("face_max_dLdu", l4.face_max_dl_du);
    report.set("face_columns", face.len() as f64);
    report.label("l4", format!("{:?}", l4.verdict).to_lowercase());

    let mut csv = String::from("x,v\n");
    let (mut far, mut fast) = (0.0f64, 0.0f64);
    let vgrid = p.vgrid();
    for &k in &face.columns {
        let (i, j) = p.split(k);
        let x = s.grid.node(i);
        let v = vgrid.velocity(j);
        csv.push_str(&format!("{x},{v}\n"));
        let nearest_integer = x.round();
        far = far.max(s.grid.distance(x, nearest_integer));
        fast = fast.max(v.abs());
    }
    report.set("face_max_integer_distance", far);
    report.set("face_max_speed", fast);

    let violation = sol.measure.max_constraint_violation(p.tau());
    report.set("measure_violation", violation);
    report.verdict(Verdict::at_most("Mather measure constraints", violation, 0.0, MEASURE_TOL));
    report.verdict(Verdict::within("Mather measure mass", sol.measure.mass(), 1.0, MEASURE_TOL));
    report.artifact("mather.csv", sol.measure.to_csv());
    report.artifact("face.csv", csv);
    report.artifact("l4.json", json(&l4));
    Ok(report)
}

/// Peierls barrier rows for the configured sources and the Aubry nodes among them.
pub fn run_barrier(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = Setup::new(cfg)?;
    let c = rhs(cfg, &s.model, &s.grid, &s.sp)?;
    let sources: Vec<usize> = if cfg.sources.is_empty() {
        (0..s.grid.points()).collect()
    } else {
        let mut v: Vec<usize> = cfg.sources.iter().map(|&x| s.grid.nearest_node(x)).collect();
        v.dedup();
        v
    };
    let bp = cfg.barrier_params();
    let bt = peierls_barrier(&Frozen::new(&s.model, 0.0), c, &s.grid, &sources, &bp, &s.sp)?;
    let mut report = ExperimentReport::new(cfg, s.label());
    report.set("c", c);
    let aubry = aubry_set(&bt, 1e-3);
    report.set("aubry_nodes", aubry.len() as f64);
    report.label("aubry", aubry.iter().map(|&i| s.grid.node(i).to_string()).collect::<Vec<_>>().join(" "));
    let osc = bt.oscillation.iter().fold(0.0f64, |a, &b| a.max(b));
    let res = bt.residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    let diag = sources.iter().map(|&y| bt.value(y, y).unwrap_or(0.0)).fold(f64::INFINITY, f64::min);
    report.set("max_oscillation", osc);
    report.set("max_residual", res);
    report.set("min_diagonal", diag);
    report.verdict(Verdict::at_most("window oscillation", osc, 10.0 * cfg.window_tol, 0.0));
    report.verdict(Verdict::at_least("h(y, y) >= 0", diag, 0.0, 1e-9));
    report.artifact("barrier.csv", bt.to_csv());
    Ok(report)
}

pub(crate) fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}
