//! File formats, external simulators, repeated trials and reporting on top
//! of [`falsify_core`].

pub mod error;
pub mod external;
pub mod harness;
pub mod problem;
pub mod report;
pub mod tracefile;

pub use error::{Error, Result};
pub use external::{serve, ExternalModel};
pub use falsify_core;
pub use harness::{run_trials, search, summarize, summarize_suite, Summary, SuiteSummary, TrialRow, TrialStatus};
pub use problem::{builtin_model, load_input, load_problem, ExternalSpec, ModelSpec, Problem};
pub use tracefile::{load_trace_csv, read_trace_csv, save_trace_csv, write_trace_csv};
