use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{check_input, integrate, rk4, ModelError, SystemModel};
use crate::signal::{InputSignal, Trace};

/// Four-gear vehicle with memoryless gear selection.
///
/// Inputs are throttle and brake in percent. The speed obeys
///
/// ```text
/// dv/dt = gain(g) * throttle/100 - brake_gain * brake/100 - drag * v,   v >= 0
/// ```
///
/// where the gear `g` is one plus the number of shift thresholds strictly
/// below `v`. Outputs are speed `v`, engine speed `w = ratio(g) * v` and gear
/// `g`.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub gains: [f64; 4],
    pub brake_gain: f64,
    pub drag: f64,
    pub thresholds: [f64; 3],
    pub ratios: [f64; 4],
    /// RK4 steps per output sample.
    pub substeps: usize,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl Default for Transmission {
    fn default() -> Self {
        Transmission {
            gains: [4.0, 3.2, 2.6, 2.0],
            brake_gain: 6.0,
            drag: 0.02,
            thresholds: [15.0, 30.0, 45.0],
            ratios: [120.0, 75.0, 50.0, 40.0],
            substeps: 4,
            inputs: ["throttle", "brake"].map(ToString::to_string).to_vec(),
            outputs: ["v", "w", "g"].map(ToString::to_string).to_vec(),
        }
    }
}

impl Transmission {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    pub fn gear(&self, v: f64) -> usize {
        1 + self.thresholds.iter().filter(|&&th| th < v).count()
    }

    fn accel(&self, v: f64, throttle: f64, brake: f64) -> f64 {
        let g = self.gear(v);
        self.gains[g - 1] * throttle / 100.0 - self.brake_gain * brake / 100.0 - self.drag * v
    }
}

impl SystemModel for Transmission {
    fn input_names(&self) -> &[String] {
        &self.inputs
    }

    fn output_names(&self) -> &[String] {
        &self.outputs
    }

    fn simulate(&mut self, input: &InputSignal, step: f64) -> Result<Trace, ModelError> {
        check_input(input, 2, step)?;
        let model = &*self;
        integrate(
            input,
            step,
            model.substeps,
            3,
            0.0f64,
            |v, u, h| {
                let next = rk4(*v, h, |x| model.accel(x, u[0], u[1])).max(0.0);
                *v = next;
                next.is_finite()
            },
            |&v, out| {
                let g = model.gear(v);
                out.extend_from_slice(&[v, model.ratios[g - 1] * v, g as f64]);
            },
        )
    }
}
