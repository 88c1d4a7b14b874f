//! The black-box system interface and built-in surrogate hybrid models.

use alloc::string::String;

use thiserror::Error;

use crate::signal::{InputSignal, Trace};

mod thermostat;
mod transmission;

pub use thermostat::Thermostat;
pub use transmission::Transmission;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("input has {actual} dimensions, model expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("input signal is empty")]
    EmptyInput,
    #[error("sampling step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("state became non-finite at time {time}")]
    NonFinite { time: f64 },
    #[error("{0}")]
    Other(String),
}

/// A deterministic input/output map from input signals to sampled traces of
/// the same length.
pub trait SystemModel {
    fn input_names(&self) -> &[String];

    fn output_names(&self) -> &[String];

    /// Runs the model on `input`, sampling outputs every `step`.
    fn simulate(&mut self, input: &InputSignal, step: f64) -> Result<Trace, ModelError>;

    fn input_dimension(&self) -> usize {
        self.input_names().len()
    }

    fn output_dimension(&self) -> usize {
        self.output_names().len()
    }
}

impl<M: SystemModel + ?Sized> SystemModel for alloc::boxed::Box<M> {
    fn input_names(&self) -> &[String] {
        (**self).input_names()
    }

    fn output_names(&self) -> &[String] {
        (**self).output_names()
    }

    fn simulate(&mut self, input: &InputSignal, step: f64) -> Result<Trace, ModelError> {
        (**self).simulate(input, step)
    }
}

/// Number of samples covering `[0, length]` at `step`.
pub fn sample_count(length: f64, step: f64) -> usize {
    libm::round(length / step) as usize + 1
}

fn check_input(input: &InputSignal, expected: usize, step: f64) -> Result<(), ModelError> {
    if input.dimension() != expected {
        return Err(ModelError::DimensionMismatch {
            expected,
            actual: input.dimension(),
        });
    }
    if input.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(ModelError::BadStep(step));
    }
    Ok(())
}

/// One classical Runge-Kutta step for a scalar ODE.
fn rk4(x: f64, h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let k1 = f(x);
    let k2 = f(x + 0.5 * h * k1);
    let k3 = f(x + 0.5 * h * k2);
    let k4 = f(x + h * k3);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Fixed-step driver shared by the surrogates.
///
/// Each sample period is split into `substeps` RK4 steps; the input is held at
/// its value at the midpoint of each step. `advance` integrates one step from
/// the given state and input, `observe` writes one output row.
fn integrate<S>(
    input: &InputSignal,
    step: f64,
    substeps: usize,
    outputs: usize,
    mut state: S,
    mut advance: impl FnMut(&mut S, &[f64], f64) -> bool,
    mut observe: impl FnMut(&S, &mut alloc::vec::Vec<f64>),
) -> Result<Trace, ModelError> {
    let samples = sample_count(input.length(), step);
    let h = step / substeps as f64;
    let mut data = alloc::vec::Vec::with_capacity(samples * outputs);
    observe(&state, &mut data);
    for k in 0..samples - 1 {
        for s in 0..substeps {
            let t = k as f64 * step + s as f64 * h;
            let u = input
                .value_at((t + 0.5 * h).min(input.length()))
                .map_err(|_| ModelError::EmptyInput)?;
            if !advance(&mut state, u, h) {
                return Err(ModelError::NonFinite { time: t + h });
            }
        }
        observe(&state, &mut data);
    }
    Trace::new(outputs, step, data).map_err(|e| ModelError::Other(alloc::format!("{e}")))
}
