//! Falsification search: adaptive Las Vegas tree search and the uniform
//! random baseline.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::inputspace::{InputDomain, SegmentSpace, SpaceError};
use crate::models::ModelError;
use crate::signal::{InputSignal, SignalError};
use crate::stl::Formula;

mod alvts;
mod random;
pub mod tree;

pub use alvts::alvts;
pub use random::random_search;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("formula horizon {horizon} exceeds the input horizon {length}")]
    HorizonTooLong { horizon: f64, length: f64 },
    #[error("model expects {expected} inputs, problem provides {actual}")]
    InputMismatch { expected: usize, actual: usize },
    #[error("random search needs at least one segment")]
    NoSegments,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Alvts,
    Random,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Alvts => "alvts",
            Solver::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Simulation budget per trial.
    pub max_iterations: u64,
    pub seed: u64,
    pub solver: Solver,
    /// Base of the per-level scaling factor in the level weights.
    pub level_base: f64,
    /// Consecutive descents that end without a simulation before the tree is
    /// declared exhausted.
    pub max_idle_descents: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_iterations: 300,
            seed: 0,
            solver: Solver::Alvts,
            level_base: 2.0,
            max_idle_descents: 100_000,
        }
    }
}

impl SearchConfig {
    /// Independent generator for one trial, seeded with `seed ^ trial`.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ trial)
    }
}

/// What the search needs to know about a falsification problem.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    pub formula: Formula,
    /// Segments for the time-varying inputs.
    pub space: SegmentSpace,
    /// Constant parameters, fixed at the root and appended after the
    /// time-varying inputs in every segment.
    pub params: Vec<InputDomain>,
    /// Output sampling period.
    pub step: f64,
}

impl SearchProblem {
    pub fn new(formula: Formula, space: SegmentSpace, step: f64) -> Self {
        SearchProblem {
            formula,
            space,
            params: Vec::new(),
            step,
        }
    }

    pub fn with_params(mut self, params: Vec<InputDomain>) -> Self {
        self.params = params;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.space.horizon()
    }

    /// Dimension of the signals handed to the model.
    pub fn input_dimension(&self) -> usize {
        self.space.dimension() + self.params.len()
    }

    fn check(&self, model_inputs: usize) -> Result<(), SearchError> {
        let horizon = self.formula.horizon();
        let length = self.space.horizon();
        if horizon > length * (1.0 + 1e-9) {
            return Err(SearchError::HorizonTooLong { horizon, length });
        }
        if model_inputs != self.input_dimension() {
            return Err(SearchError::InputMismatch {
                expected: model_inputs,
                actual: self.input_dimension(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Falsified,
    /// Every reachable edge of the tree was tried.
    Exhausted,
    BudgetReached,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Falsified => "falsified",
            Status::Exhausted => "exhausted",
            Status::BudgetReached => "budget-reached",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalsificationOutcome {
    pub status: Status,
    /// Falsifying input; present exactly when `status` is `Falsified`.
    pub witness: Option<InputSignal>,
    /// Upper robustness bound of the witness, otherwise the best seen.
    pub robustness: f64,
    /// Number of model simulations.
    pub iterations: u64,
    /// Least robustness observed over all simulations.
    pub best_robustness: f64,
}
