//! File formats.
//!
//! * Instance files are TOML with a `[penalties]` table and `[[courses]]`
//!   / `[[faculty]]` arrays.
//! * Solution files hold one `section_id|T|faculty_id` row per seat
//!   (`L` for lab seats). Blank lines and `#` comments are ignored.
//! * Trace files are CSV: `elapsed_seconds,best_score,phase,iteration`.
//! * Run summaries are JSON; comparison tables are CSV.

use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::constraints::{HardViolations, PenaltyConfig};
use crate::error::{Error, Result};
use crate::evaluation::{EvaluationReport, FacultyScore};
use crate::harness::{Algorithm, Comparison};
use crate::model::{Assignment, CourseSection, Faculty, Instance, Kind, Solution};
use crate::seeding::{GeneratorSpec, RngSeed};
use crate::solvers::{SolveResult, Termination};
use crate::trace::{Phase, TracePoint};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(default)]
    penalties: PenaltyConfig,
    #[serde(default)]
    courses: Vec<CourseSection>,
    #[serde(default)]
    faculty: Vec<Faculty>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

pub fn parse_instance(text: &str, context: &str) -> Result<Instance> {
    let doc: InstanceDoc =
        toml::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
    Instance::new(doc.courses, doc.faculty, doc.penalties)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    parse_instance(&read(path)?, &path.display().to_string())
}

pub fn instance_to_string(instance: &Instance) -> String {
    let doc = InstanceDoc {
        penalties: *instance.penalties(),
        courses: instance.sections().to_vec(),
        faculty: instance.faculty().to_vec(),
    };
    toml::to_string(&doc).expect("instance documents always serialize")
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    fs::write(path, instance_to_string(instance))?;
    Ok(())
}

pub fn load_generator_spec(path: impl AsRef<Path>) -> Result<GeneratorSpec> {
    let path = path.as_ref();
    toml::from_str(&read(path)?)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Parses a solution file, resolving ids against `instance`.
///
/// Unknown ids and malformed rows are errors; structural problems
/// (missing seats, repeated faculty) are left for evaluation to report.
pub fn parse_solution(instance: &Instance, text: &str, context: &str) -> Result<Solution> {
    let mut elements = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| Error::parse(format!("{context}:{}", n + 1), msg);
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        let [section_id, tag, faculty_id] = fields[..] else {
            return Err(at(format!("expected `section|kind|faculty`, got `{line}`")));
        };
        let section = instance
            .section_index(section_id)
            .ok_or_else(|| at(format!("unknown section `{section_id}`")))?;
        let kind =
            Kind::from_tag(tag).ok_or_else(|| at(format!("kind must be T or L, got `{tag}`")))?;
        if kind != instance.section(section).kind {
            return Err(at(format!("section `{section_id}` is not of kind {tag}")));
        }
        let faculty = instance
            .faculty_index(faculty_id)
            .ok_or_else(|| at(format!("unknown faculty `{faculty_id}`")))?;
        elements.push(Assignment {
            section,
            kind,
            faculty,
        });
    }
    Ok(Solution::from_elements_unchecked(elements))
}

pub fn load_solution(instance: &Instance, path: impl AsRef<Path>) -> Result<Solution> {
    let path = path.as_ref();
    parse_solution(instance, &read(path)?, &path.display().to_string())
}

pub fn solution_to_string(instance: &Instance, solution: &Solution) -> String {
    let mut out = String::new();
    for e in solution.elements() {
        out.push_str(&instance.section(e.section).id);
        out.push('|');
        out.push(e.kind.tag());
        out.push('|');
        out.push_str(&instance.faculty_member(e.faculty).id);
        out.push('\n');
    }
    out
}

pub fn write_solution(
    path: impl AsRef<Path>,
    instance: &Instance,
    solution: &Solution,
) -> Result<()> {
    fs::write(path, solution_to_string(instance, solution))?;
    Ok(())
}

/// One row of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub elapsed_seconds: f64,
    pub best_score: f64,
    pub phase: String,
    pub iteration: u64,
}

impl From<&TracePoint> for TraceRow {
    fn from(p: &TracePoint) -> Self {
        TraceRow {
            elapsed_seconds: p.elapsed.as_secs_f64(),
            best_score: p.best_score.as_f64(),
            phase: p.phase.label().to_string(),
            iteration: p.iteration,
        }
    }
}

impl TraceRow {
    pub fn phase(&self) -> Option<Phase> {
        Phase::from_label(&self.phase)
    }
}

pub fn write_trace_to<W: std::io::Write>(writer: W, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in trace {
        w.serialize(TraceRow::from(p))?;
    }
    if trace.is_empty() {
        w.write_record(["elapsed_seconds", "best_score", "phase", "iteration"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: impl AsRef<Path>, trace: &[TracePoint]) -> Result<()> {
    write_trace_to(fs::File::create(path)?, trace)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub seed: RngSeed,
    pub final_score: f64,
    pub accuracy_percent: f64,
    pub hcv_total: u64,
    pub hcv: HardViolations,
    pub per_faculty: Vec<FacultyScore>,
    pub wall_time_secs: f64,
    pub terminated_by: Termination,
    pub iterations: u64,
}

impl RunSummary {
    pub fn new(
        algorithm: Algorithm,
        seed: RngSeed,
        result: &SolveResult,
        wall_time: Duration,
    ) -> Self {
        let report: &EvaluationReport = &result.best_report;
        RunSummary {
            algorithm,
            seed,
            final_score: report.score.as_f64(),
            accuracy_percent: report.score.percent(),
            hcv_total: report.hcv.total(),
            hcv: report.hcv,
            per_faculty: report.per_faculty.clone(),
            wall_time_secs: wall_time.as_secs_f64(),
            terminated_by: result.terminated_by,
            iterations: result.iterations,
        }
    }
}

pub fn write_summary(path: impl AsRef<Path>, summary: &RunSummary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTableRow {
    pub algorithm: String,
    pub total_time_sec: f64,
    pub accuracy_percent: f64,
}

pub fn comparison_rows(comparison: &Comparison) -> Vec<ComparisonTableRow> {
    comparison
        .rows
        .iter()
        .map(|r| ComparisonTableRow {
            algorithm: r.algorithm.display_name().to_string(),
            total_time_sec: r.total_time.as_secs_f64(),
            accuracy_percent: r.result.best_report.score.percent(),
        })
        .collect()
}

pub fn write_comparison(path: impl AsRef<Path>, comparison: &Comparison) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in comparison_rows(comparison) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width text rendering of a comparison table.
pub fn format_comparison(comparison: &Comparison) -> String {
    let mut out = format!(
        "{:<28} {:>22} {:>13}\n",
        "Algorithm Name", "Total Time Taken (sec)", "Accuracy (%)"
    );
    for row in comparison_rows(comparison) {
        out.push_str(&format!(
            "{:<28} {:>22.2} {:>13.2}\n",
            row.algorithm, row.total_time_sec, row.accuracy_percent
        ));
    }
    out
}
