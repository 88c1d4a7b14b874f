//! Piecewise-constant input signals and uniformly sampled output traces.

use alloc::vec::Vec;

use thiserror::Error;

/// Slack used when mapping real times onto segment boundaries and sample
/// indices, relative to the quantity being compared.
pub(crate) const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("segment duration must be positive and finite, got {0}")]
    BadDuration(f64),
    #[error("time {time} outside [0, {length}]")]
    OutOfRange { time: f64, length: f64 },
    #[error("signal is empty")]
    Empty,
    #[error("sampling step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("trace needs at least one sample with {dimension} values per row")]
    BadSamples { dimension: usize },
}

/// A constant input segment `(duration, values)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    duration: f64,
    values: Vec<f64>,
}

impl Segment {
    pub fn new(duration: f64, values: Vec<f64>) -> Result<Self, SignalError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(SignalError::BadDuration(duration));
        }
        Ok(Segment { duration, values })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// A time-bounded piecewise-constant signal `u : [0, |u|] -> R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal {
    dimension: usize,
    segments: Vec<Segment>,
}

impl InputSignal {
    /// The empty signal of the given dimensionality.
    pub fn empty(dimension: usize) -> Self {
        InputSignal {
            dimension,
            segments: Vec::new(),
        }
    }

    pub fn from_segments(dimension: usize, segments: Vec<Segment>) -> Result<Self, SignalError> {
        let mut signal = InputSignal::empty(dimension);
        for segment in segments {
            signal.push(segment)?;
        }
        Ok(signal)
    }

    pub fn push(&mut self, segment: Segment) -> Result<(), SignalError> {
        if segment.dimension() != self.dimension {
            return Err(SignalError::DimensionMismatch {
                expected: self.dimension,
                actual: segment.dimension(),
            });
        }
        self.segments.push(segment);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total length `|u|`, the sum of the segment durations.
    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Concatenation `a·b`.
    pub fn concat(&self, other: &InputSignal) -> Result<InputSignal, SignalError> {
        if self.dimension != other.dimension {
            return Err(SignalError::DimensionMismatch {
                expected: self.dimension,
                actual: other.dimension,
            });
        }
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Ok(InputSignal {
            dimension: self.dimension,
            segments,
        })
    }

    /// Value of the signal at time `t`.
    ///
    /// Segments cover half-open intervals `[start, start + duration)`; the
    /// final instant `t = |u|` takes the last segment's value.
    pub fn value_at(&self, t: f64) -> Result<&[f64], SignalError> {
        let last = self.segments.last().ok_or(SignalError::Empty)?;
        let length = self.length();
        let slack = TIME_EPS * length.max(1.0);
        if !(t >= -slack && t <= length + slack) {
            return Err(SignalError::OutOfRange { time: t, length });
        }
        let mut start = 0.0;
        for segment in &self.segments {
            let end = start + segment.duration;
            if t < end {
                return Ok(&segment.values);
            }
            start = end;
        }
        Ok(&last.values)
    }
}

/// An output trace sampled every `step` time units starting at time 0.
///
/// Samples are stored row-major; each row has `dimension` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dimension: usize,
    step: f64,
    data: Vec<f64>,
}

impl Trace {
    pub fn new(dimension: usize, step: f64, data: Vec<f64>) -> Result<Self, SignalError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(SignalError::BadStep(step));
        }
        if dimension == 0 || data.is_empty() || data.len() % dimension != 0 {
            return Err(SignalError::BadSamples { dimension });
        }
        Ok(Trace {
            dimension,
            step,
            data,
        })
    }

    /// Builds a trace from a sequence of rows.
    pub fn from_rows<R>(dimension: usize, step: f64, rows: R) -> Result<Self, SignalError>
    where
        R: IntoIterator,
        R::Item: AsRef<[f64]>,
    {
        let mut data = Vec::new();
        for row in rows {
            let row = row.as_ref();
            if row.len() != dimension {
                return Err(SignalError::DimensionMismatch {
                    expected: dimension,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Trace::new(dimension, step, data)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time length `|y| = (samples - 1) * step`.
    pub fn length(&self) -> f64 {
        (self.len() - 1) as f64 * self.step
    }

    pub fn sample(&self, index: usize) -> &[f64] {
        &self.data[index * self.dimension..(index + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dimension)
    }

    pub fn time_of(&self, index: usize) -> f64 {
        index as f64 * self.step
    }

    /// Index of the last sample at or before `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let raw = libm::floor(t / self.step + TIME_EPS);
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.len() - 1)
        }
    }

    /// The samples at times `<= t`.
    pub fn prefix(&self, t: f64) -> Result<Trace, SignalError> {
        let length = self.length();
        let slack = TIME_EPS * length.max(1.0);
        if !(t >= -slack && t <= length + slack) {
            return Err(SignalError::OutOfRange { time: t, length });
        }
        Ok(self.prefix_samples(self.index_at(t) + 1))
    }

    /// The first `count` samples (clamped to `1..=len`).
    pub fn prefix_samples(&self, count: usize) -> Trace {
        let count = count.clamp(1, self.len());
        Trace {
            dimension: self.dimension,
            step: self.step,
            data: self.data[..count * self.dimension].to_vec(),
        }
    }
}
