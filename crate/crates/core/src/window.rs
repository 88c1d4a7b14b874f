//! Sliding-window minimum and maximum in amortized O(1) per element.
//!
//! This is the monotone-deque ("wedge") technique: the deque keeps indices
//! whose values are strictly improving from back to front, so the front is
//! always the extremum of the current window.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    /// Value of the extremum over an empty set.
    pub fn identity(self) -> f64 {
        match self {
            Extremum::Min => f64::INFINITY,
            Extremum::Max => f64::NEG_INFINITY,
        }
    }

    /// True when `a` is at least as extreme as `b`.
    fn dominates(self, a: f64, b: f64) -> bool {
        match self {
            Extremum::Min => a <= b,
            Extremum::Max => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("sliding window over an empty array")]
    Empty,
    #[error("window lower offset {lo} exceeds upper offset {hi}")]
    Inverted { lo: usize, hi: usize },
}

/// `out[i] = extremum(values[i+lo ..= min(i+hi, len-1)])`.
///
/// Windows that start past the end of the array are empty and yield the
/// identity of the extremum (`+inf` for min, `-inf` for max).
pub fn sliding_window_extrema(
    values: &[f64],
    lo: usize,
    hi: usize,
    mode: Extremum,
) -> Result<Vec<f64>, WindowError> {
    if values.is_empty() {
        return Err(WindowError::Empty);
    }
    if lo > hi {
        return Err(WindowError::Inverted { lo, hi });
    }
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    let mut wedge: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let start = i.saturating_add(lo);
        if start >= n {
            out.push(mode.identity());
            continue;
        }
        let end = i.saturating_add(hi).min(n - 1);
        while next <= end {
            while let Some(&back) = wedge.back() {
                if mode.dominates(values[next], values[back]) {
                    wedge.pop_back();
                } else {
                    break;
                }
            }
            wedge.push_back(next);
            next += 1;
        }
        while let Some(&front) = wedge.front() {
            if front < start {
                wedge.pop_front();
            } else {
                break;
            }
        }
        out.push(wedge.front().map_or(mode.identity(), |&j| values[j]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn naive(values: &[f64], lo: usize, hi: usize, mode: Extremum) -> Vec<f64> {
        let n = values.len();
        (0..n)
            .map(|i| {
                let mut acc = mode.identity();
                let mut j = i + lo;
                while j <= i + hi && j < n {
                    acc = match mode {
                        Extremum::Min => acc.min(values[j]),
                        Extremum::Max => acc.max(values[j]),
                    };
                    j += 1;
                }
                acc
            })
            .collect()
    }

    #[test]
    fn identity_window() {
        let v = [3.0, -1.0, 2.0];
        assert_eq!(sliding_window_extrema(&v, 0, 0, Extremum::Min).unwrap(), v);
        assert_eq!(sliding_window_extrema(&v, 0, 0, Extremum::Max).unwrap(), v);
    }

    #[test]
    fn small_min_example() {
        let v = [3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(
            sliding_window_extrema(&v, 0, 1, Extremum::Min).unwrap(),
            vec![1.0, 1.0, 1.0, 1.0, 5.0]
        );
    }

    #[test]
    fn offset_window_runs_off_the_end() {
        let v = [3.0, 1.0, 4.0];
        assert_eq!(
            sliding_window_extrema(&v, 2, 5, Extremum::Max).unwrap(),
            vec![4.0, f64::NEG_INFINITY, f64::NEG_INFINITY]
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            sliding_window_extrema(&[], 0, 1, Extremum::Min),
            Err(WindowError::Empty)
        );
        assert!(sliding_window_extrema(&[1.0], 2, 1, Extremum::Min).is_err());
    }

    proptest! {
        #[test]
        fn matches_naive_scan(
            values in prop::collection::vec(-100.0f64..100.0, 1..64),
            lo in 0usize..10,
            width in 0usize..20,
            max in any::<bool>(),
        ) {
            let mode = if max { Extremum::Max } else { Extremum::Min };
            let fast = sliding_window_extrema(&values, lo, lo + width, mode).unwrap();
            let slow = naive(&values, lo, lo + width, mode);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!(a == b || (a - b).abs() <= 1e-9);
            }
        }
    }
}
