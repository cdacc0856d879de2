//! JSON experiment configuration. Unknown fields are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wkam_core::mather::BarrierParams;
use wkam_core::model::ZooParams;
use wkam_core::solver::{Anchor, Iteration};
use wkam_core::{Grid, SchemeParams, VelocityGrid};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Solve,
    Critical,
    Mather,
    Barrier,
    Limit,
    Converge,
    Counterexample,
    Uniqueness,
    Shifted,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::Solve,
        Self::Critical,
        Self::Mather,
        Self::Barrier,
        Self::Limit,
        Self::Converge,
        Self::Counterexample,
        Self::Uniqueness,
        Self::Shifted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Critical => "critical",
            Self::Mather => "mather",
            Self::Barrier => "barrier",
            Self::Limit => "limit",
            Self::Converge => "converge",
            Self::Counterexample => "counterexample",
            Self::Uniqueness => "uniqueness",
            Self::Shifted => "shifted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// `1/2, 1/4, ..., 1/512`.
pub fn reference_ladder() -> Vec<f64> {
    (1..=9).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: String,
    #[serde(default)]
    pub params: ZooParams,
    /// Grid points per unit length of the period.
    #[serde(default = "defaults::points_per_unit")]
    pub points_per_unit: usize,
    #[serde(default = "defaults::tau")]
    pub tau: f64,
    #[serde(default = "defaults::vmax")]
    pub vmax: f64,
    #[serde(default = "defaults::velocities")]
    pub velocities: usize,
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    #[serde(default = "defaults::damping")]
    pub damping: f64,
    #[serde(default)]
    pub iteration: Iteration,
    /// Right-hand side of `H(x, u', lambda u) = c`; the discrete `c(H^0)` when absent.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default = "reference_ladder")]
    pub lambda_ladder: Vec<f64>,
    /// Pinned nodes for `lambda = 0` solves (`solve` only).
    #[serde(default)]
    pub anchors: Vec<Anchor<f64>>,
    /// Constant initial data for `solve` and `uniqueness`.
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<f64>,
    /// `uniqueness` on `alpha_coupled`: also start from the glued `v1`, `v2`.
    #[serde(default)]
    pub glued_seeds: bool,
    /// Barrier sources as positions; `barrier` only. Empty means every node.
    #[serde(default = "defaults::sources")]
    pub sources: Vec<f64>,
    #[serde(default = "defaults::t1")]
    pub t1: f64,
    #[serde(default = "defaults::t2")]
    pub t2: f64,
    #[serde(default = "defaults::window_tol")]
    pub window_tol: f64,
    /// Bisection bracket for `c0`.
    #[serde(default = "defaults::bracket")]
    pub bracket: [f64; 2],
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

mod defaults {
    pub fn points_per_unit() -> usize {
        256
    }
    pub fn tau() -> f64 {
        0.01
    }
    pub fn vmax() -> f64 {
        3.0
    }
    pub fn velocities() -> usize {
        121
    }
    pub fn tol() -> f64 {
        1e-9
    }
    pub fn max_iter() -> usize {
        200_000
    }
    pub fn damping() -> f64 {
        1.0
    }
    pub fn seeds() -> Vec<f64> {
        vec![-10.0, 0.0, 10.0]
    }
    pub fn sources() -> Vec<f64> {
        vec![0.0]
    }
    pub fn t1() -> f64 {
        20.0
    }
    pub fn t2() -> f64 {
        40.0
    }
    pub fn window_tol() -> f64 {
        1e-4
    }
    pub fn bracket() -> [f64; 2] {
        [-5.0, 5.0]
    }
}

impl ExperimentConfig {
    /// Reference resolution with every optional field at its default.
    pub fn new(kind: ExperimentKind, model: impl Into<String>, params: ZooParams) -> Self {
        Self {
            kind,
            model: model.into(),
            params,
            points_per_unit: defaults::points_per_unit(),
            tau: defaults::tau(),
            vmax: defaults::vmax(),
            velocities: defaults::velocities(),
            tol: defaults::tol(),
            max_iter: defaults::max_iter(),
            damping: defaults::damping(),
            iteration: Iteration::default(),
            c: None,
            lambda_ladder: reference_ladder(),
            anchors: Vec::new(),
            seeds: defaults::seeds(),
            glued_seeds: false,
            sources: defaults::sources(),
            t1: defaults::t1(),
            t2: defaults::t2(),
            window_tol: defaults::window_tol(),
            bracket: defaults::bracket(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io { path: path.to_path_buf(), source: e })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_ladder.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(LabError::Config("lambda_ladder entries must be positive and finite".into()));
        }
        if self.lambda_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::Config("lambda_ladder must be strictly decreasing".into()));
        }
        if self.points_per_unit == 0 {
            return Err(LabError::Config("points_per_unit must be positive".into()));
        }
        self.scheme()?.validate(&self.grid()?)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let n = self.params.period;
        if n <= 0.0 || !n.is_finite() {
            return Err(wkam_core::Error::NonPositivePeriod(n).into());
        }
        let points = (n * self.points_per_unit as f64).round() as usize;
        Ok(Grid::new(n, points)?)
    }

    pub fn scheme(&self) -> Result<SchemeParams> {
        let vgrid = VelocityGrid::new(self.vmax, self.velocities)?;
        let mut sp = SchemeParams::new(self.tau, vgrid, self.tol, self.max_iter);
        sp.damping = self.damping;
        sp.iteration = self.iteration;
        Ok(sp)
    }

    pub fn barrier_params(&self) -> BarrierParams<f64> {
        BarrierParams { t1: self.t1, t2: self.t2, window_tol: self.window_tol }
    }
}
