//! Trace CSV files: a `time,<name1>,...,<namem>` header, then one row per
//! sample.

use std::io::{Read, Write};
use std::path::Path;

use falsify_core::signal::Trace;

use crate::error::{Error, Result};
use crate::external::format_number;

/// Relative tolerance on the spacing of the time column.
const SPACING_TOLERANCE: f64 = 1e-6;

pub fn write_trace_csv<W: Write, S: AsRef<str>>(out: W, names: &[S], trace: &Trace) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(std::iter::once("time").chain(names.iter().map(AsRef::as_ref)))?;
    for (i, row) in trace.rows().enumerate() {
        let record = std::iter::once(trace.time_of(i))
            .chain(row.iter().copied())
            .map(format_number);
        writer.write_record(record)?;
    }
    writer.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn save_trace_csv<S: AsRef<str>>(path: impl AsRef<Path>, names: &[S], trace: &Trace) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_csv(file, names, trace).map_err(|e| e.in_file(path))
}

/// Reads a trace and arranges its columns in the order of `names`; columns
/// not listed are ignored. The sampling step is taken from the time column,
/// which must start at zero and be uniformly spaced.
pub fn read_trace_csv<R: Read, S: AsRef<str>>(input: R, names: &[S]) -> Result<Trace> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    if header.get(0) != Some("time") {
        return Err(Error::Csv("first column must be 'time'".into()));
    }
    let columns = names
        .iter()
        .map(|name| {
            let name = name.as_ref();
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Csv(format!("missing column '{name}'")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut times = Vec::new();
    let mut data = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |c: usize| -> Result<f64> {
            let text = record.get(c).unwrap_or("");
            text.parse()
                .map_err(|_| Error::Csv(format!("row {}: bad number '{text}'", i + 1)))
        };
        times.push(cell(0)?);
        for &c in &columns {
            data.push(cell(c)?);
        }
    }
    if times.is_empty() {
        return Err(Error::Csv("trace has no rows".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Csv("time must start at 0".into()));
    }
    let step = if times.len() > 1 { times[1] } else { 1.0 };
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Csv("time must be increasing".into()));
    }
    for (i, t) in times.iter().enumerate() {
        if (t - i as f64 * step).abs() > SPACING_TOLERANCE * step {
            return Err(Error::Csv(format!(
                "row {}: time {t} is off the uniform grid of step {step}",
                i + 1
            )));
        }
    }
    Trace::new(names.len(), step, data).map_err(|e| Error::Csv(e.to_string()))
}

pub fn load_trace_csv<S: AsRef<str>>(path: impl AsRef<Path>, names: &[S]) -> Result<Trace> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::read(path, e))?;
    read_trace_csv(file, names).map_err(|e| e.in_file(path))
}
