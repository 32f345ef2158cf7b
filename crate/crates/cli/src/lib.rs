//! Configuration-driven runner for the maglab verification batteries.

pub mod batteries;
pub mod cli;
pub mod config;
pub mod deform;
pub mod report;

use std::path::PathBuf;

use maglab::orbit::marked_length_spectrum;

pub use config::ExperimentConfig;
pub use report::{Outcome, Row, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Verify,
    Spectrum,
    Deform,
    CarlemanSweep,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Verify => "verify",
            Task::Spectrum => "spectrum",
            Task::Deform => "deform",
            Task::CarlemanSweep => "carleman-sweep",
        }
    }
}

/// Runs a task in memory. Configuration problems are errors; failed
/// assertions are rows with `pass == false`.
pub fn execute(task: Task, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let ctx = batteries::Ctx::new(cfg)?;
    match task {
        Task::Verify => {
            let selected: Vec<&batteries::Battery> = cfg
                .battery
                .names
                .iter()
                .map(|n| batteries::find(n).ok_or_else(|| CliError::Config(format!("unknown battery {n:?}"))))
                .collect::<Result<_, _>>()?;
            if selected.iter().any(|b| b.randomized) {
                cfg.seed()?;
            }
            let mut out = Outcome::default();
            for b in selected {
                out.extend(batteries::run(b, &ctx)?);
            }
            Ok(out)
        }
        Task::Spectrum => spectrum(&ctx),
        Task::Deform => {
            let mut out = deform::livsic_rows(&ctx, batteries::find("livsic").unwrap())?;
            if cfg.family()?.fixed_metric() {
                out.extend(deform::jacobi_rows(&ctx, batteries::find("jacobi").unwrap())?);
            }
            Ok(out)
        }
        Task::CarlemanSweep => {
            cfg.seed()?;
            batteries::carleman_sweep(&ctx)
        }
    }
}

fn spectrum(ctx: &batteries::Ctx) -> Result<Outcome, CliError> {
    let me = batteries::find("orbit").unwrap();
    let classes = ctx.cfg.classes(&ctx.cfg.spectrum.classes)?;
    let rows = marked_length_spectrum(&ctx.sys, &classes);
    let mut t = Table::new("spectrum", &["class_key", "period", "closure_defect", "monodromy_trace"]);
    let mut out = Outcome::default();
    for r in rows {
        t.push(vec![r.class_key.clone(), report::num(r.period), report::num(r.closure_defect), report::num(r.monodromy_trace)]);
        match (&r.error, r.closure_defect) {
            (None, Some(d)) => out.rows.push(Row::new(me, &r.class_key, "closure").at_most(d, 1e-9)),
            (e, _) => out.rows.push(Row::new(me, &r.class_key, "orbit").error(e.clone().unwrap_or_default())),
        }
    }
    out.tables.push(t);
    Ok(out)
}

/// Runs a task and writes its report directory.
pub fn run_to_disk(task: Task, cfg: &ExperimentConfig) -> Result<(Outcome, PathBuf), CliError> {
    let out = execute(task, cfg)?;
    let dir = report::write_run(std::path::Path::new(&cfg.output_dir), task.name(), &cfg.to_toml(), &out)?;
    Ok((out, dir))
}
