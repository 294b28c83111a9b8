//! Experiment runner for the Dirac gauge laboratory.
//!
//! A run reads a TOML [`config::ExperimentConfig`], drives `dgl-core`, and
//! writes `summary.json` plus CSV series into an output directory. The exit
//! status is 0 when every check passed, 1 on a tolerance failure, 2 on a
//! configuration error and 3 when the run aborted.

use std::path::{Path, PathBuf};

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::Outcome;
pub use report::Summary;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("run aborted: {0}")]
    Runtime(#[from] dgl_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Runtime(_) | RunError::Io { .. } => EXIT_ABORT,
        }
    }
}

/// `DGL_THREADS`, else the machine's parallelism.
pub fn thread_budget() -> Result<usize, RunError> {
    match std::env::var("DGL_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(RunError::Config(format!("`DGL_THREADS`: expected a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| RunError::Io { path, source })
}

/// What [`execute`] did, for callers that want more than the exit code.
#[derive(Debug)]
pub struct Execution {
    pub exit_code: i32,
    pub out_dir: Option<PathBuf>,
    pub summary: Option<Summary>,
    pub error: Option<RunError>,
}

/// Loads the config, runs the experiment and writes its artifacts. Runtime
/// aborts still leave a `summary.json` with a failure record.
pub fn execute(kind: ExperimentKind, config_path: &Path, out: Option<&Path>) -> Execution {
    let fail = |error: RunError, out_dir: Option<PathBuf>, summary: Option<Summary>| Execution {
        exit_code: error.exit_code(),
        out_dir,
        summary,
        error: Some(error),
    };
    let cfg = match ExperimentConfig::load(config_path) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e, None, None),
    };
    let threads = match thread_budget() {
        Ok(n) => n,
        Err(e) => return fail(e, None, None),
    };
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("dgl-out"));

    let result = experiments::run(kind, &cfg, threads);
    if let Err(RunError::Config(_)) = &result {
        return fail(result.unwrap_err(), None, None);
    }
    if let Err(source) = std::fs::create_dir_all(&dir) {
        return fail(RunError::Io { path: dir.clone(), source }, None, None);
    }
    match result {
        Ok(outcome) => {
            for (name, contents) in &outcome.files {
                if let Err(e) = write(&dir, name, contents) {
                    return fail(e, Some(dir), Some(outcome.summary));
                }
            }
            if let Err(e) = write(&dir, "summary.json", &outcome.summary.to_json()) {
                return fail(e, Some(dir), Some(outcome.summary));
            }
            let exit_code = if outcome.summary.pass { EXIT_PASS } else { EXIT_TOLERANCE };
            Execution { exit_code, out_dir: Some(dir), summary: Some(outcome.summary), error: None }
        }
        Err(error) => {
            let kind_name = match &error {
                RunError::Runtime(_) => "runtime_abort",
                RunError::Io { .. } => "io",
                RunError::Config(_) => unreachable!(),
            };
            let summary = Summary::aborted(
                kind,
                &cfg,
                report::FailureRecord { kind: kind_name, message: error.to_string() },
            );
            // The abort is the primary failure; a failed write here only loses the record.
            let _ = write(&dir, "summary.json", &summary.to_json());
            fail(error, Some(dir), Some(summary))
        }
    }
}
