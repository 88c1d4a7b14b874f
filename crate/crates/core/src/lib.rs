//! Falsification of signal temporal logic requirements for black-box hybrid
//! systems by adaptive Las Vegas tree search.
//!
//! The crate is `no_std` and only needs an allocator. It contains the pure
//! parts of the engine: signals and traces, STL formulas and their
//! robustness semantics, the multi-granularity space of input segments, the
//! search itself, and two small surrogate hybrid models. Process-based
//! simulators, file formats and the command line live in the `falsify` crate.

#![no_std]

extern crate alloc;

pub mod inputspace;
pub mod models;
pub mod robustness;
pub mod search;
pub mod sexpr;
pub mod signal;
pub mod stl;
pub mod window;

pub use inputspace::{InputDomain, Proportion, SegmentId, SegmentSpace};
pub use models::{ModelError, SystemModel, Thermostat, Transmission};
pub use robustness::{rho, rho_bounds, Robustness, RobustnessInterval};
pub use search::{
    alvts, random_search, FalsificationOutcome, SearchConfig, SearchProblem, Solver, Status,
};
pub use signal::{InputSignal, Segment, Trace};
pub use stl::{parse_formula, Formula, Interval};
