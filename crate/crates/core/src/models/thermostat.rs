use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{check_input, integrate, rk4, ModelError, SystemModel};
use crate::signal::{InputSignal, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Heat,
    Cool,
}

/// Room temperature under a two-mode controller plus an external heat input.
///
/// `dx/dt = -rate * (x - target(mode)) + input_gain * power`, with the mode
/// switching to heat at `x <= low` and to cool at `x >= high`. Outputs are the
/// temperature `x` and the mode (`1` heat, `0` cool).
#[derive(Debug, Clone)]
pub struct Thermostat {
    pub rate: f64,
    pub input_gain: f64,
    pub low: f64,
    pub high: f64,
    pub heat_target: f64,
    pub cool_target: f64,
    pub initial: f64,
    pub initial_mode: Mode,
    pub substeps: usize,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl Default for Thermostat {
    fn default() -> Self {
        Thermostat {
            rate: 0.1,
            input_gain: 2.0,
            low: 18.0,
            high: 22.0,
            heat_target: 30.0,
            cool_target: 10.0,
            initial: 20.0,
            initial_mode: Mode::Heat,
            substeps: 4,
            inputs: vec!["power".to_string()],
            outputs: ["x", "mode"].map(ToString::to_string).to_vec(),
        }
    }
}

impl Thermostat {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    fn target(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Heat => self.heat_target,
            Mode::Cool => self.cool_target,
        }
    }
}

impl SystemModel for Thermostat {
    fn input_names(&self) -> &[String] {
        &self.inputs
    }

    fn output_names(&self) -> &[String] {
        &self.outputs
    }

    fn simulate(&mut self, input: &InputSignal, step: f64) -> Result<Trace, ModelError> {
        check_input(input, 1, step)?;
        let model = &*self;
        integrate(
            input,
            step,
            model.substeps,
            2,
            (model.initial, model.initial_mode),
            |(x, mode), u, h| {
                let target = model.target(*mode);
                *x = rk4(*x, h, |s| -model.rate * (s - target) + model.input_gain * u[0]);
                if *mode == Mode::Cool && *x <= model.low {
                    *mode = Mode::Heat;
                } else if *mode == Mode::Heat && *x >= model.high {
                    *mode = Mode::Cool;
                }
                x.is_finite()
            },
            |&(x, mode), out| {
                out.extend_from_slice(&[x, if mode == Mode::Heat { 1.0 } else { 0.0 }]);
            },
        )
    }
}
