//! Line-oriented protocol for simulators running in a separate process.
//!
//! Request, written to the simulator's standard input:
//!
//! ```text
//! SIMULATE <step> <length>
//! SEG <duration> <v1> ... <vn>
//! ...
//! END
//! ```
//!
//! Response, read from its standard output:
//!
//! ```text
//! TRACE <m> <rows>
//! <time>,<y1>,...,<ym>
//! ...
//! END
//! ```
//!
//! A simulator may answer `ERROR <message>` instead of a trace. One process
//! serves any number of requests; it is started on first use and killed when
//! the model is dropped or violates the protocol.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use falsify_core::models::{sample_count, ModelError, SystemModel};
use falsify_core::signal::{InputSignal, Segment, Trace};

use crate::problem::ExternalSpec;

/// Bytes of simulator standard error kept for diagnostics.
const STDERR_TAIL: usize = 4096;

/// Relative tolerance on the time column and on the announced length.
const TIME_TOLERANCE: f64 = 1e-6;

/// Formats a number so that it parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    match text {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
        _ => text.parse().ok(),
    }
}

/// Writes a simulation request for `input`.
pub fn write_request(out: &mut impl Write, input: &InputSignal, step: f64) -> io::Result<()> {
    writeln!(
        out,
        "SIMULATE {} {}",
        format_number(step),
        format_number(input.length())
    )?;
    for segment in input.segments() {
        write!(out, "SEG {}", format_number(segment.duration()))?;
        for v in segment.values() {
            write!(out, " {}", format_number(*v))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "END")?;
    out.flush()
}

/// Writes a successful response.
pub fn write_trace(out: &mut impl Write, trace: &Trace) -> io::Result<()> {
    writeln!(out, "TRACE {} {}", trace.dimension(), trace.len())?;
    for (i, row) in trace.rows().enumerate() {
        write!(out, "{}", format_number(trace.time_of(i)))?;
        for y in row {
            write!(out, ",{}", format_number(*y))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "END")?;
    out.flush()
}

fn protocol(message: impl std::fmt::Display) -> ModelError {
    ModelError::Other(format!("protocol error: {message}"))
}

fn read_line(input: &mut impl BufRead) -> Result<Option<String>, ModelError> {
    let mut line = String::new();
    match input.read_line(&mut line) {
        Ok(0) => Ok(None),
        Ok(_) => Ok(Some(line.trim_end_matches(['\n', '\r']).to_string())),
        Err(e) => Err(ModelError::Other(format!("reading simulator output: {e}"))),
    }
}

/// Reads a request; `None` at end of input.
pub fn read_request(
    input: &mut impl BufRead,
    dimension: usize,
) -> Result<Option<(InputSignal, f64)>, ModelError> {
    let header = loop {
        match read_line(input)? {
            None => return Ok(None),
            Some(line) if line.trim().is_empty() => continue,
            Some(line) => break line,
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (step, length) = match fields.as_slice() {
        ["SIMULATE", step, length] => (
            parse_number(step).ok_or_else(|| protocol(format!("bad step '{step}'")))?,
            parse_number(length).ok_or_else(|| protocol(format!("bad length '{length}'")))?,
        ),
        _ => return Err(protocol(format!("expected 'SIMULATE step length', got '{header}'"))),
    };
    let mut signal = InputSignal::empty(dimension);
    loop {
        let line = read_line(input)?.ok_or_else(|| protocol("request ended before END"))?;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("END") => break,
            Some("SEG") => {
                let numbers = fields
                    .map(|f| parse_number(f).ok_or_else(|| protocol(format!("bad number '{f}'"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let (duration, values) = numbers
                    .split_first()
                    .ok_or_else(|| protocol("SEG without duration"))?;
                if values.len() != dimension {
                    return Err(ModelError::DimensionMismatch {
                        expected: dimension,
                        actual: values.len(),
                    });
                }
                let segment = Segment::new(*duration, values.to_vec()).map_err(protocol)?;
                signal.push(segment).map_err(protocol)?;
            }
            _ => return Err(protocol(format!("expected SEG or END, got '{line}'"))),
        }
    }
    if (signal.length() - length).abs() > TIME_TOLERANCE * length.abs().max(1.0) {
        return Err(protocol(format!(
            "segments cover {} but the request announced {length}",
            signal.length()
        )));
    }
    Ok(Some((signal, step)))
}

/// Reads a response to a request for an input of `length` sampled at `step`.
pub fn read_trace(
    input: &mut impl BufRead,
    outputs: usize,
    length: f64,
    step: f64,
) -> Result<Trace, ModelError> {
    let header = read_line(input)?.ok_or_else(|| protocol("simulator closed its output"))?;
    if let Some(message) = header.strip_prefix("ERROR") {
        return Err(ModelError::Other(format!("simulator error: {}", message.trim())));
    }
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (m, rows) = match fields.as_slice() {
        ["TRACE", m, rows] => match (m.parse::<usize>(), rows.parse::<usize>()) {
            (Ok(m), Ok(rows)) => (m, rows),
            _ => return Err(protocol(format!("bad header '{header}'"))),
        },
        _ => return Err(protocol(format!("expected 'TRACE m rows', got '{header}'"))),
    };
    if m != outputs {
        return Err(protocol(format!("simulator reports {m} outputs, expected {outputs}")));
    }
    let expected_rows = sample_count(length, step);
    if rows != expected_rows {
        return Err(protocol(format!(
            "simulator reports {rows} rows, expected {expected_rows}"
        )));
    }
    let mut data = Vec::with_capacity(rows * m);
    for i in 0..rows {
        let line = read_line(input)?.ok_or_else(|| protocol(format!("trace ended after {i} rows")))?;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != m + 1 {
            return Err(protocol(format!(
                "row {i} has {} columns, expected {}",
                cells.len(),
                m + 1
            )));
        }
        let numbers = cells
            .iter()
            .map(|c| parse_number(c).ok_or_else(|| protocol(format!("row {i}: bad number '{c}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        let expected_time = i as f64 * step;
        if (numbers[0] - expected_time).abs() > TIME_TOLERANCE * step {
            return Err(protocol(format!(
                "row {i} has time {}, expected {expected_time}",
                numbers[0]
            )));
        }
        data.extend_from_slice(&numbers[1..]);
    }
    match read_line(input)? {
        Some(line) if line.trim() == "END" => {}
        other => {
            return Err(protocol(format!(
                "expected END after {rows} rows, got {:?}",
                other.unwrap_or_default()
            )))
        }
    }
    Trace::new(m, step, data).map_err(protocol)
}

/// Answers requests from `input` with `model` until end of input.
///
/// Malformed requests end the session with an error; simulation failures are
/// reported to the client as `ERROR` lines and the session continues.
pub fn serve<M: SystemModel + ?Sized>(
    model: &mut M,
    input: &mut impl BufRead,
    output: &mut impl Write,
) -> Result<(), ModelError> {
    let io = |e: io::Error| ModelError::Other(format!("writing response: {e}"));
    while let Some((signal, step)) = read_request(input, model.input_dimension())? {
        match model.simulate(&signal, step) {
            Ok(trace) => write_trace(output, &trace).map_err(io)?,
            Err(e) => {
                writeln!(output, "ERROR {e}").map_err(io)?;
                output.flush().map_err(io)?;
            }
        }
    }
    Ok(())
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    stderr: Arc<Mutex<Vec<u8>>>,
    drain: Option<JoinHandle<()>>,
}

impl Process {
    fn spawn(spec: &ExternalSpec) -> Result<Process, ModelError> {
        let mut child = Command::new(&spec.command)
            .args(&spec.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| ModelError::Other(format!("cannot start '{}': {e}", spec.command)))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = BufReader::new(child.stdout.take().expect("piped"));
        let mut pipe = child.stderr.take().expect("piped");
        let stderr = Arc::new(Mutex::new(Vec::new()));
        let sink = Arc::clone(&stderr);
        // Drained continuously so a chatty simulator never blocks on a full pipe.
        let drain = thread::spawn(move || {
            let mut buf = [0u8; 1024];
            while let Ok(n) = pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let mut tail = sink.lock().unwrap_or_else(|e| e.into_inner());
                tail.extend_from_slice(&buf[..n]);
                if tail.len() > STDERR_TAIL {
                    let excess = tail.len() - STDERR_TAIL;
                    tail.drain(..excess);
                }
            }
        });
        Ok(Process {
            child,
            stdin,
            stdout,
            stderr,
            drain: Some(drain),
        })
    }

    /// Kills the process and returns what it wrote to standard error.
    fn terminate(mut self) -> String {
        let _ = self.child.kill();
        let _ = self.child.wait();
        if let Some(drain) = self.drain.take() {
            let _ = drain.join();
        }
        let tail = self.stderr.lock().unwrap_or_else(|e| e.into_inner());
        String::from_utf8_lossy(&tail).trim().to_string()
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A model simulated by an external process.
pub struct ExternalModel {
    spec: ExternalSpec,
    process: Option<Process>,
}

impl ExternalModel {
    pub fn new(spec: ExternalSpec) -> Self {
        ExternalModel {
            spec,
            process: None,
        }
    }

    fn exchange(process: &mut Process, input: &InputSignal, step: f64, outputs: usize) -> Result<Trace, ModelError> {
        write_request(&mut process.stdin, input, step)
            .map_err(|e| ModelError::Other(format!("writing request: {e}")))?;
        read_trace(&mut process.stdout, outputs, input.length(), step)
    }
}

impl SystemModel for ExternalModel {
    fn input_names(&self) -> &[String] {
        &self.spec.inputs
    }

    fn output_names(&self) -> &[String] {
        &self.spec.outputs
    }

    fn simulate(&mut self, input: &InputSignal, step: f64) -> Result<Trace, ModelError> {
        if input.dimension() != self.spec.inputs.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.spec.inputs.len(),
                actual: input.dimension(),
            });
        }
        if input.is_empty() {
            return Err(ModelError::EmptyInput);
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(ModelError::BadStep(step));
        }
        let mut process = match self.process.take() {
            Some(p) => p,
            None => Process::spawn(&self.spec)?,
        };
        match Self::exchange(&mut process, input, step, self.spec.outputs.len()) {
            Ok(trace) => {
                self.process = Some(process);
                Ok(trace)
            }
            // The simulator reported a failure but is still in sync.
            Err(e @ ModelError::Other(_)) if is_reported(&e) => {
                self.process = Some(process);
                Err(e)
            }
            Err(e) => {
                let stderr = process.terminate();
                Err(if stderr.is_empty() {
                    e
                } else {
                    ModelError::Other(format!("{e}; simulator stderr: {stderr}"))
                })
            }
        }
    }
}

fn is_reported(e: &ModelError) -> bool {
    matches!(e, ModelError::Other(m) if m.starts_with("simulator error:"))
}
