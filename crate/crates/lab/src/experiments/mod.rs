//! Experiment drivers, one per [`ExperimentKind`].

mod basic;
mod counterexample;
mod limit;

pub use basic::{run_barrier, run_critical, run_mather, run_solve, CRITICAL_AGREEMENT};
pub use counterexample::{run_counterexample, run_uniqueness_probe, simpson, v1_closed_form, v2_closed_form, Glued};
pub use limit::{run_convergence, run_limit, run_shifted, limit_pipeline, LimitPipeline, LIMIT_TOL, MONOTONE_SLACK};

use wkam_core::critical::critical_value_lp;
use wkam_core::mather::{build_polytope, ClosedMeasurePolytope, MatherSolution};
use wkam_core::model::{model_zoo, Frozen, Model, QuadraticModel};
use wkam_core::{Grid, SchemeParams};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::report::ExperimentReport;

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Solve => run_solve(cfg),
        ExperimentKind::Critical => run_critical(cfg),
        ExperimentKind::Mather => run_mather(cfg),
        ExperimentKind::Barrier => run_barrier(cfg),
        ExperimentKind::Limit => run_limit(cfg),
        ExperimentKind::Converge => run_convergence(cfg),
        ExperimentKind::Counterexample => run_counterexample(cfg),
        ExperimentKind::Uniqueness => run_uniqueness_probe(cfg, &cfg.seeds),
        ExperimentKind::Shifted => run_shifted(cfg),
    }
}

pub(crate) struct Setup {
    pub model: QuadraticModel<f64>,
    pub grid: Grid,
    pub sp: SchemeParams,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let model = model_zoo::<f64>(&cfg.model, &cfg.params)?;
        let grid = cfg.grid()?;
        let sp = cfg.scheme()?;
        sp.validate(&grid)?;
        Ok(Self { model, grid, sp })
    }

    pub fn label(&self) -> String {
        self.model.label()
    }
}

/// Closed-measure polytope priced with `L(., ., 0)`, its Mather LP solution
/// and the discrete critical value `c(H^0)`.
pub(crate) fn critical_lp<M: Model<f64>>(
    m: &M,
    grid: &Grid,
    sp: &SchemeParams,
) -> Result<(ClosedMeasurePolytope<f64>, MatherSolution<f64>, f64)> {
    let p = build_polytope(&Frozen::new(m, 0.0), grid, &sp.vgrid, sp.tau)?;
    let (cv, sol) = critical_value_lp(&p)?;
    Ok((p, sol, cv.value))
}

/// `cfg.c` when set, else the LP critical value of `H^0`.
pub(crate) fn rhs<M: Model<f64>>(cfg: &ExperimentConfig, m: &M, grid: &Grid, sp: &SchemeParams) -> Result<f64> {
    match cfg.c {
        Some(c) => Ok(c),
        None => Ok(critical_lp(m, grid, sp)?.2),
    }
}
