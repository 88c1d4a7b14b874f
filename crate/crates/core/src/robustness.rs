//! Quantitative STL semantics over sampled traces, plus sound bounds for
//! traces that are only a prefix of the eventual output.
//!
//! Every subformula is evaluated into a pair of arrays `(lo, hi)` indexed by
//! sample. Atoms are exact where the trace has samples; past the end of the
//! trace a subformula is unknown, i.e. `[-inf, +inf]`. Min, max and negation
//! are monotone (antitone), so propagating interval end points through them
//! gives sound bounds for every completion of the prefix. When the trace
//! covers the formula horizon the interval at time 0 collapses to a point.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::signal::{Trace, TIME_EPS};
use crate::stl::{Formula, Interval};
use crate::window::{sliding_window_extrema, Extremum};

/// Robustness value; `+inf` and `-inf` are permitted.
pub type Robustness = f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustnessError {
    #[error("trace of length {available} too short, formula needs {needed}")]
    InsufficientTrace { needed: f64, available: f64 },
    #[error("time {0} outside the trace")]
    OutOfRange(f64),
}

/// Sound lower and upper bounds on the robustness of all completions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessInterval {
    pub lo: Robustness,
    pub hi: Robustness,
}

impl RobustnessInterval {
    pub fn point(value: Robustness) -> Self {
        RobustnessInterval {
            lo: value,
            hi: value,
        }
    }

    /// Every completion violates the requirement.
    pub fn is_falsified(&self) -> bool {
        self.hi < 0.0
    }

    /// Every completion satisfies the requirement.
    pub fn is_satisfied(&self) -> bool {
        self.lo > 0.0
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, value: Robustness) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Robustness `rho(phi, y, t)`, with `t` snapped to the sample at or before it.
pub fn rho(phi: &Formula, trace: &Trace, t: f64) -> Result<Robustness, RobustnessError> {
    let length = trace.length();
    let slack = TIME_EPS * length.max(1.0);
    if !(t >= -slack && t <= length + slack) {
        return Err(RobustnessError::OutOfRange(t));
    }
    let needed = t + phi.horizon();
    if needed > length + slack {
        return Err(RobustnessError::InsufficientTrace {
            needed,
            available: length,
        });
    }
    let bounds = evaluate(phi, trace);
    let i = trace.index_at(t);
    debug_assert_eq!(bounds.lo[i], bounds.hi[i]);
    Ok(bounds.lo[i])
}

/// Bounds on `rho(phi, y·y', 0)` over every suffix `y'`.
pub fn rho_bounds(phi: &Formula, trace: &Trace) -> RobustnessInterval {
    let bounds = evaluate(phi, trace);
    RobustnessInterval {
        lo: bounds.lo[0],
        hi: bounds.hi[0],
    }
}

/// Per-sample robustness bounds of `phi` over the whole trace.
pub fn robustness_signal(phi: &Formula, trace: &Trace) -> (Vec<Robustness>, Vec<Robustness>) {
    let b = evaluate(phi, trace);
    (b.lo, b.hi)
}

struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Sample offsets `ceil(lo/step) ..= floor(hi/step)` covered by an interval.
pub(crate) fn window_offsets(interval: &Interval, step: f64) -> (usize, usize) {
    let a = libm::ceil(interval.lo() / step - TIME_EPS).max(0.0) as usize;
    let b = libm::floor(interval.hi() / step + TIME_EPS).max(0.0) as usize;
    (a, b)
}

fn evaluate(phi: &Formula, trace: &Trace) -> Bounds {
    let n = trace.len();
    match phi {
        Formula::Atom(f) => {
            let values: Vec<f64> = trace.rows().map(|row| f.eval(row)).collect();
            Bounds {
                lo: values.clone(),
                hi: values,
            }
        }
        Formula::Not(f) => {
            let inner = evaluate(f, trace);
            Bounds {
                lo: inner.hi.iter().map(|x| -x).collect(),
                hi: inner.lo.iter().map(|x| -x).collect(),
            }
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (x, y) = (evaluate(a, trace), evaluate(b, trace));
            let op: fn(f64, f64) -> f64 = if matches!(phi, Formula::And(..)) {
                f64::min
            } else {
                f64::max
            };
            Bounds {
                lo: x.lo.iter().zip(&y.lo).map(|(&p, &q)| op(p, q)).collect(),
                hi: x.hi.iter().zip(&y.hi).map(|(&p, &q)| op(p, q)).collect(),
            }
        }
        Formula::Always(interval, f) | Formula::Eventually(interval, f) => {
            let inner = evaluate(f, trace);
            let (a, b) = window_offsets(interval, trace.step());
            let mode = if matches!(phi, Formula::Always(..)) {
                Extremum::Min
            } else {
                Extremum::Max
            };
            if a > b {
                // No sample instant falls inside the interval.
                let empty = vec![mode.identity(); n];
                return Bounds {
                    lo: empty.clone(),
                    hi: empty,
                };
            }
            // `inner` is never empty: a trace has at least one sample
            let mut lo = sliding_window_extrema(&inner.lo, a, b, mode).unwrap_or_default();
            let mut hi = sliding_window_extrema(&inner.hi, a, b, mode).unwrap_or_default();
            // A window reaching past the last sample contains unknown values,
            // which pull the lower bound of a min (upper bound of a max) to
            // its extreme.
            for i in 0..n {
                if i.saturating_add(b) >= n {
                    match mode {
                        Extremum::Min => lo[i] = f64::NEG_INFINITY,
                        Extremum::Max => hi[i] = f64::INFINITY,
                    }
                }
            }
            Bounds { lo, hi }
        }
        Formula::Until(interval, f1, f2) => {
            let (x, y) = (evaluate(f1, trace), evaluate(f2, trace));
            let (a, b) = window_offsets(interval, trace.step());
            Bounds {
                lo: until_pass(&x.lo, &y.lo, a, b, f64::NEG_INFINITY),
                hi: until_pass(&x.hi, &y.hi, a, b, f64::INFINITY),
            }
        }
    }
}

/// One end point of the until operator, with `unknown` substituted for
/// samples past the end of the trace.
///
/// `out[i] = max_{t' in i+[a,b]} min(min_{t'' in [i, t')} lhs[t''], rhs[t'])`
fn until_pass(lhs: &[f64], rhs: &[f64], a: usize, b: usize, unknown: f64) -> Vec<f64> {
    let n = lhs.len();
    (0..n)
        .map(|i| {
            let mut best = f64::NEG_INFINITY;
            let mut prefix_min = f64::INFINITY;
            let last = i.saturating_add(b);
            let mut t = i;
            while t <= last {
                if t >= n {
                    // every remaining t' contributes min(prefix_min, unknown)
                    if t.max(i + a) <= last {
                        best = best.max(prefix_min.min(unknown));
                    }
                    break;
                }
                if t >= i + a {
                    best = best.max(prefix_min.min(rhs[t]));
                }
                prefix_min = prefix_min.min(lhs[t]);
                t += 1;
            }
            best
        })
        .collect()
}
