use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wkam_lab::{run, ExperimentConfig, ExperimentKind, LabError};

/// Runs one weak KAM experiment and writes `report.json` plus CSV artifacts.
#[derive(Debug, Parser)]
#[command(name = "wkam", version)]
struct Cli {
    /// solve, critical, mather, barrier, limit, converge, counterexample, uniqueness or shifted
    kind: String,
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("wkam: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, LabError> {
    let kind = ExperimentKind::parse(&cli.kind)
        .ok_or_else(|| LabError::Config(format!("unknown experiment kind `{}`", cli.kind)))?;
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if cfg.kind != kind {
        return Err(LabError::Config(format!(
            "config describes a `{}` experiment but `{}` was requested",
            cfg.kind.name(),
            kind.name()
        )));
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = Some(out.clone());
    }
    let out = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let report = run(&cfg)?;
    report.write(&out)?;
    print!("{}", report.summary());
    Ok(report.passed())
}
