//! Library side of the `kflow` command line tool: task file schema, task
//! dispatch and report rendering. The binary is a thin argument parser.

pub mod report;
pub mod schema;
pub mod tasks;

use std::fmt::Write as _;

use kflow::spec_flow::TrackPoint;
use kflow::Tolerances;

pub use report::{to_json, Report};
pub use schema::TaskFile;
pub use tasks::{generate, run_task, Outcome, Run};

/// Exit codes of the command line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const SCHEMA: i32 = 2;
    pub const PRECONDITION: i32 = 3;
    pub const CONSISTENCY: i32 = 4;
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable input, malformed JSON or a document violating the schema.
    Schema(String),
    Math(kflow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => exit::SCHEMA,
            CliError::Math(e) if e.is_schema() => exit::SCHEMA,
            CliError::Math(e) if e.is_consistency() => exit::CONSISTENCY,
            CliError::Math(_) => exit::PRECONDITION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema violation: {m}"),
            CliError::Math(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<kflow::Error> for CliError {
    fn from(e: kflow::Error) -> Self {
        CliError::Math(e)
    }
}

/// Command line overrides applied on top of the task file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub tol_kernel: Option<f64>,
    pub tol_gap: Option<f64>,
    pub max_depth: Option<u32>,
    pub seed: Option<u64>,
    /// Collect eigenvalue tracks of the task's path.
    pub tracks: bool,
}

impl RunOptions {
    pub fn tolerances(&self, spec: &schema::ToleranceSpec) -> Result<Tolerances, CliError> {
        let mut spec = spec.clone();
        spec.kernel = self.tol_kernel.or(spec.kernel);
        spec.gap = self.tol_gap.or(spec.gap);
        spec.max_depth = self.max_depth.or(spec.max_depth);
        Ok(spec.resolve()?)
    }
}

pub fn parse_task(text: &str) -> Result<TaskFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
}

/// Rendered artifacts of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub json: String,
    pub tracks_csv: Option<String>,
}

/// Parse, run and render a task document.
pub fn execute(text: &str, opts: &RunOptions) -> Result<Artifacts, CliError> {
    let file = parse_task(text)?;
    let run = run_task(&file, opts)?;
    let json = match &run.outcome {
        Outcome::Report(r) => to_json(r),
        Outcome::Model(m) => to_json(m),
    };
    Ok(Artifacts { json, tracks_csv: run.tracks.as_deref().map(tracks_csv) })
}

pub fn tracks_csv(points: &[TrackPoint]) -> String {
    let mut out = String::from("t,block,index,eigenvalue\n");
    for p in points {
        writeln!(out, "{:.16e},{},{},{:.16e}", p.t, p.block, p.index, p.eigenvalue).expect("write to String");
    }
    out
}
