//! Result files.
//!
//! `trials.csv` holds one row per trial followed by `#` footer lines with the
//! aggregates. It contains nothing that depends on timing, so a rerun with the
//! same seed reproduces it byte for byte; wall-clock times go to
//! `timing.csv`. `plot.csv` lists the iteration counts of successful trials in
//! ascending order, one series per problem and solver.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use csv::StringRecord;

use crate::error::{Error, Result};
use crate::external::format_number;
use crate::harness::{
    plot_series, solver_from_name, summarize, summarize_suite, Summary, SuiteSummary, TrialRow,
    TrialStatus,
};

pub const TRIALS_FILE: &str = "trials.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const PLOT_FILE: &str = "plot.csv";

const TRIAL_COLUMNS: [&str; 9] = [
    "problem",
    "solver",
    "trial",
    "seed",
    "status",
    "iterations",
    "robustness",
    "best_robustness",
    "error",
];

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Keeps every record on one physical line so footer lines stay
/// recognizable.
fn single_line(text: &str) -> String {
    text.split(['\n', '\r']).collect::<Vec<_>>().join(" ")
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

pub fn summary_line(s: &Summary) -> String {
    format!(
        "# aggregate problem={} solver={} trials={} successes={} mean={} sd={} tainted={}",
        s.problem,
        s.solver.name(),
        s.trials,
        s.successes,
        optional(s.mean),
        optional(s.sd),
        s.tainted
    )
}

pub fn suite_line(s: &SuiteSummary) -> String {
    format!(
        "# suite solver={} problems={} trials={} successes={} geomean={} tainted={}",
        s.solver.name(),
        s.problems,
        s.trials,
        s.successes,
        optional(s.geometric_mean),
        s.tainted
    )
}

pub fn write_trials<W: Write>(mut out: W, rows: &[TrialRow]) -> Result<()> {
    {
        let mut writer = csv::Writer::from_writer(&mut out);
        writer.write_record(TRIAL_COLUMNS)?;
        for r in rows {
            writer.write_record([
                r.problem.clone(),
                r.solver.name().to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.status.name().to_string(),
                r.iterations.to_string(),
                optional(r.robustness),
                optional(r.best_robustness),
                r.error.as_deref().map(single_line).unwrap_or_default(),
            ])?;
        }
        writer.flush().map_err(csv_error)?;
    }
    let summaries = summarize(rows);
    let mut footer = String::new();
    for s in &summaries {
        writeln!(footer, "{}", summary_line(s)).expect("writing to a string");
    }
    for s in summarize_suite(&summaries) {
        writeln!(footer, "{}", suite_line(&s)).expect("writing to a string");
    }
    out.write_all(footer.as_bytes()).map_err(csv_error)
}

pub fn write_timing<W: Write>(out: W, rows: &[TrialRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["problem", "solver", "trial", "wall_seconds"])?;
    for r in rows {
        writer.write_record([
            r.problem.clone(),
            r.solver.name().to_string(),
            r.trial.to_string(),
            format!("{:.6}", r.wall_time),
        ])?;
    }
    writer.flush().map_err(csv_error)
}

pub fn write_plot<W: Write>(out: W, rows: &[TrialRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["problem", "solver", "rank", "iterations"])?;
    for (problem, solver, series) in plot_series(rows) {
        for (rank, iterations) in series.iter().enumerate() {
            writer.write_record([
                problem.clone(),
                solver.name().to_string(),
                (rank + 1).to_string(),
                iterations.to_string(),
            ])?;
        }
    }
    writer.flush().map_err(csv_error)
}

fn create(dir: &Path, name: &str) -> Result<(fs::File, PathBuf)> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((file, path))
}

/// Writes `trials.csv` and `timing.csv` into `dir`.
pub fn save_csv(dir: &Path, rows: &[TrialRow]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (file, trials) = create(dir, TRIALS_FILE)?;
    write_trials(file, rows).map_err(|e| e.in_file(&trials))?;
    let (file, timing) = create(dir, TIMING_FILE)?;
    write_timing(file, rows).map_err(|e| e.in_file(&timing))?;
    Ok(vec![trials, timing])
}

/// Writes `plot.csv` into `dir`.
pub fn save_plot(dir: &Path, rows: &[TrialRow]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (file, plot) = create(dir, PLOT_FILE)?;
    write_plot(file, rows).map_err(|e| e.in_file(&plot))?;
    Ok(vec![plot])
}

/// Trials reloaded from `trials.csv`, with the footer lines as written.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialsFile {
    pub rows: Vec<TrialRow>,
    pub footer: Vec<String>,
}

impl TrialsFile {
    /// Footer recomputed from the reloaded rows; equal to `footer` when the
    /// file is consistent.
    pub fn recomputed_footer(&self) -> Vec<String> {
        let summaries = summarize(&self.rows);
        summaries
            .iter()
            .map(summary_line)
            .chain(summarize_suite(&summaries).iter().map(suite_line))
            .collect()
    }
}

fn parse_optional(record: &StringRecord, column: usize, line: u64) -> Result<Option<f64>> {
    let text = record.get(column).unwrap_or("");
    if text.is_empty() {
        return Ok(None);
    }
    text.parse()
        .map(Some)
        .map_err(|_| Error::Csv(format!("line {line}: bad number '{text}'")))
}

pub fn read_trials<R: Read>(mut input: R) -> Result<TrialsFile> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(csv_error)?;
    let footer = text
        .lines()
        .filter(|l| l.starts_with('#'))
        .map(str::to_string)
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    if reader.headers()?.iter().ne(TRIAL_COLUMNS) {
        return Err(Error::Csv(format!("expected header {}", TRIAL_COLUMNS.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let integer = |i: usize| -> Result<u64> {
            field(i)
                .parse()
                .map_err(|_| Error::Csv(format!("line {line}: bad integer '{}'", field(i))))
        };
        let solver = solver_from_name(field(1))
            .ok_or_else(|| Error::Csv(format!("line {line}: unknown solver '{}'", field(1))))?;
        let status = TrialStatus::from_name(field(4))
            .ok_or_else(|| Error::Csv(format!("line {line}: unknown status '{}'", field(4))))?;
        let iterations = integer(5)?;
        rows.push(TrialRow {
            problem: field(0).to_string(),
            solver,
            trial: integer(2)?,
            seed: integer(3)?,
            status,
            iterations,
            robustness: parse_optional(&record, 6, line)?,
            best_robustness: parse_optional(&record, 7, line)?,
            error: Some(field(8).to_string()).filter(|e| !e.is_empty()),
            simulations: iterations,
            wall_time: 0.0,
            witness: None,
        });
    }
    Ok(TrialsFile { rows, footer })
}

pub fn load_trials(path: impl AsRef<Path>) -> Result<TrialsFile> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::read(path, e))?;
    read_trials(file).map_err(|e| e.in_file(path))
}
