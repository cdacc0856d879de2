//! Experiment reports: ladder rows, named scalars and verdicts, written as
//! `report.json` next to the CSV artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `observed <= reference + tolerance`
    AtMost,
    /// `observed >= reference - tolerance`
    AtLeast,
    /// `|observed - reference| <= tolerance`
    Within,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub observed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Verdict {
    pub fn new(name: impl Into<String>, observed: f64, relation: Relation, reference: f64, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => observed <= reference + tolerance,
            Relation::AtLeast => observed >= reference - tolerance,
            Relation::Within => (observed - reference).abs() <= tolerance,
        };
        Self { name: name.into(), observed, reference, tolerance, relation, passed }
    }

    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, observed, Relation::AtMost, bound, tolerance)
    }

    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, observed, Relation::AtLeast, bound, tolerance)
    }

    pub fn within(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(name, observed, Relation::Within, expected, tolerance)
    }
}

/// One entry of a discount ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub lambda: f64,
    /// Experiment specific headline number (an error, a gap or `lambda mean(u)`).
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Named sup-norm errors and other per-lambda diagnostics.
    pub errors: BTreeMap<String, f64>,
}

impl LadderRow {
    pub fn new(lambda: f64, value: f64, residual: f64, iterations: usize) -> Self {
        Self { lambda, value, residual, iterations, errors: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.errors.insert(key.to_string(), v);
        self
    }
}

/// File written next to `report.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub model: String,
    pub rows: Vec<LadderRow>,
    pub values: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl ExperimentReport {
    pub fn new(cfg: &ExperimentConfig, model: impl Into<String>) -> Self {
        Self {
            kind: cfg.kind,
            config: cfg.clone(),
            model: model.into(),
            rows: Vec::new(),
            values: BTreeMap::new(),
            labels: BTreeMap::new(),
            verdicts: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    pub fn label(&mut self, key: &str, v: impl Into<String>) {
        self.labels.insert(key.to_string(), v.into());
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn find_verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn artifact(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.artifacts.push(Artifact { name: name.into(), contents: contents.into() });
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// `e[k+1] <= e[k] + slack` along the rows' `value`; no verdict for a single row.
    pub fn ladder_monotone(&mut self, name: &str, slack: f64) {
        let checks: Vec<Verdict> = self
            .rows
            .windows(2)
            .map(|w| Verdict::at_most(format!("{name}[lambda={}]", w[1].lambda), w[1].value, w[0].value, slack))
            .collect();
        self.verdicts.extend(checks);
    }

    /// Rejects NaN and infinities anywhere in the numeric payload.
    pub fn check_finite(&self) -> Result<()> {
        let bad = |what: String| Err(LabError::NonFinite(what));
        for r in &self.rows {
            if !(r.lambda.is_finite() && r.value.is_finite() && r.residual.is_finite()) {
                return bad(format!("row lambda={}", r.lambda));
            }
            if let Some((k, _)) = r.errors.iter().find(|(_, v)| !v.is_finite()) {
                return bad(format!("row lambda={} {k}", r.lambda));
            }
        }
        if let Some((k, _)) = self.values.iter().find(|(_, v)| !v.is_finite()) {
            return bad(k.clone());
        }
        if let Some(v) = self.verdicts.iter().find(|v| !(v.observed.is_finite() && v.reference.is_finite())) {
            return bad(v.name.clone());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.check_finite()?;
        serde_json::to_string_pretty(self).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Writes `report.json` and every artifact into `dir` (created if missing).
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |path: &Path, e| LabError::Io { path: path.to_path_buf(), source: e };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let json = self.to_json()?;
        let path = dir.join("report.json");
        std::fs::write(&path, json).map_err(|e| io(&path, e))?;
        for a in &self.artifacts {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.contents).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }

    /// One line per verdict.
    pub fn summary(&self) -> String {
        let mut out = format!("{} on {}\n", self.kind.name(), self.model);
        for v in &self.verdicts {
            let rel = match v.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
                Relation::Within => "~=",
            };
            out.push_str(&format!(
                "  [{}] {}: {:.6e} {rel} {:.6e} (tol {:.1e})\n",
                if v.passed { "pass" } else { "FAIL" },
                v.name,
                v.observed,
                v.reference,
                v.tolerance
            ));
        }
        out
    }
}
