//! Repeated independent trials and their statistics.

use std::time::Instant;

use falsify_core::models::{ModelError, SystemModel};
use falsify_core::search::{alvts, random_search, FalsificationOutcome, SearchConfig, Solver, Status};
use falsify_core::signal::{InputSignal, Trace};
use rayon::prelude::*;

use crate::error::Result;
use crate::problem::Problem;

/// Wraps a model and counts the simulations it performs.
pub struct Counting<M> {
    inner: M,
    simulations: u64,
}

impl<M> Counting<M> {
    pub fn new(inner: M) -> Self {
        Counting {
            inner,
            simulations: 0,
        }
    }

    pub fn simulations(&self) -> u64 {
        self.simulations
    }
}

impl<M: SystemModel> SystemModel for Counting<M> {
    fn input_names(&self) -> &[String] {
        self.inner.input_names()
    }

    fn output_names(&self) -> &[String] {
        self.inner.output_names()
    }

    fn simulate(&mut self, input: &InputSignal, step: f64) -> Result<Trace, ModelError> {
        self.simulations += 1;
        self.inner.simulate(input, step)
    }
}

/// How a trial ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Search(Status),
    /// The model or the search failed; the message is in the row.
    Error,
}

impl TrialStatus {
    pub fn name(self) -> &'static str {
        match self {
            TrialStatus::Search(s) => s.name(),
            TrialStatus::Error => "error",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "falsified" => TrialStatus::Search(Status::Falsified),
            "exhausted" => TrialStatus::Search(Status::Exhausted),
            "budget-reached" => TrialStatus::Search(Status::BudgetReached),
            "error" => TrialStatus::Error,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub problem: String,
    pub solver: Solver,
    pub trial: u64,
    pub seed: u64,
    pub status: TrialStatus,
    /// Simulations reported by the search (counted ones for failed trials).
    pub iterations: u64,
    /// Robustness upper bound of the witness, for falsified trials.
    pub robustness: Option<f64>,
    /// Least robustness seen; absent for failed trials.
    pub best_robustness: Option<f64>,
    pub error: Option<String>,
    /// Simulations observed by the counting wrapper.
    pub simulations: u64,
    /// Wall-clock seconds.
    pub wall_time: f64,
    pub witness: Option<InputSignal>,
}

impl TrialRow {
    pub fn is_success(&self) -> bool {
        self.status == TrialStatus::Search(Status::Falsified)
    }
}

pub fn solver_from_name(name: &str) -> Option<Solver> {
    match name {
        "alvts" => Some(Solver::Alvts),
        "random" => Some(Solver::Random),
        _ => None,
    }
}

/// Runs one search with an explicit model.
pub fn search<M: SystemModel + ?Sized>(
    model: &mut M,
    problem: &Problem,
    config: &SearchConfig,
    trial: u64,
) -> Result<FalsificationOutcome> {
    let search_problem = problem.search_problem()?;
    let mut rng = config.trial_rng(trial);
    let outcome = match config.solver {
        Solver::Alvts => alvts(model, &search_problem, config, &mut rng)?,
        Solver::Random => random_search(
            model,
            &search_problem,
            problem.random_segments,
            config,
            &mut rng,
        )?,
    };
    Ok(outcome)
}

fn run_one<M: SystemModel>(
    model: &mut Counting<M>,
    problem: &Problem,
    config: &SearchConfig,
    trial: u64,
) -> TrialRow {
    let before = model.simulations();
    let start = Instant::now();
    let result = search(model, problem, config, trial);
    let wall_time = start.elapsed().as_secs_f64();
    let simulations = model.simulations() - before;
    let mut row = TrialRow {
        problem: problem.name.clone(),
        solver: config.solver,
        trial,
        seed: config.seed ^ trial,
        status: TrialStatus::Error,
        iterations: simulations,
        robustness: None,
        best_robustness: None,
        error: None,
        simulations,
        wall_time,
        witness: None,
    };
    match result {
        Ok(outcome) => {
            row.status = TrialStatus::Search(outcome.status);
            row.iterations = outcome.iterations;
            row.best_robustness = Some(outcome.best_robustness);
            if outcome.status == Status::Falsified {
                row.robustness = Some(outcome.robustness);
            }
            row.witness = outcome.witness;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs `trials` independent searches in parallel, trial `i` seeded with
/// `config.seed ^ i`. Each worker owns its own model instance. Rows come back
/// sorted by trial index; failing trials are recorded, not dropped.
pub fn run_trials(problem: &Problem, config: &SearchConfig, trials: u64) -> Vec<TrialRow> {
    let mut rows: Vec<TrialRow> = (0..trials)
        .into_par_iter()
        .map_init(
            || Counting::new(problem.build_model()),
            |model, trial| run_one(model, problem, config, trial),
        )
        .collect();
    rows.sort_by_key(|r| r.trial);
    rows
}

/// Statistics of one (problem, solver) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub problem: String,
    pub solver: Solver,
    pub trials: u64,
    pub successes: u64,
    /// Mean iterations over successful trials.
    pub mean: Option<f64>,
    /// Sample standard deviation of iterations over successful trials.
    pub sd: Option<f64>,
    /// Some trial ended in an error.
    pub tainted: bool,
}

/// Statistics of one solver across the problems of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub solver: Solver,
    pub problems: u64,
    pub trials: u64,
    pub successes: u64,
    /// Geometric mean of the per-problem means, over problems with at least
    /// one success.
    pub geometric_mean: Option<f64>,
    pub tainted: bool,
}

pub fn mean_and_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    (Some(mean), Some((ss / (n - 1.0)).sqrt()))
}

pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let log_sum: f64 = values.iter().map(|x| x.ln()).sum();
    Some((log_sum / values.len() as f64).exp())
}

/// Per-(problem, solver) statistics, in order of first appearance.
pub fn summarize(rows: &[TrialRow]) -> Vec<Summary> {
    let mut keys: Vec<(String, Solver)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(p, s)| *p == r.problem && *s == r.solver) {
            keys.push((r.problem.clone(), r.solver));
        }
    }
    keys.into_iter()
        .map(|(problem, solver)| {
            let mut group: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.problem == problem && r.solver == solver)
                .collect();
            group.sort_by_key(|r| r.trial);
            let successes: Vec<f64> = group
                .iter()
                .filter(|r| r.is_success())
                .map(|r| r.iterations as f64)
                .collect();
            let (mean, sd) = mean_and_sd(&successes);
            Summary {
                problem,
                solver,
                trials: group.len() as u64,
                successes: successes.len() as u64,
                mean,
                sd,
                tainted: group.iter().any(|r| r.status == TrialStatus::Error),
            }
        })
        .collect()
}

/// Per-solver suite statistics, in order of first appearance.
pub fn summarize_suite(summaries: &[Summary]) -> Vec<SuiteSummary> {
    let mut solvers: Vec<Solver> = Vec::new();
    for s in summaries {
        if !solvers.contains(&s.solver) {
            solvers.push(s.solver);
        }
    }
    solvers
        .into_iter()
        .map(|solver| {
            let group: Vec<&Summary> = summaries.iter().filter(|s| s.solver == solver).collect();
            let means: Vec<f64> = group.iter().filter_map(|s| s.mean).collect();
            SuiteSummary {
                solver,
                problems: group.len() as u64,
                trials: group.iter().map(|s| s.trials).sum(),
                successes: group.iter().map(|s| s.successes).sum(),
                geometric_mean: geometric_mean(&means),
                tainted: group.iter().any(|s| s.tainted),
            }
        })
        .collect()
}

/// Iteration counts of the successful trials of each (problem, solver),
/// sorted ascending; the rank is the 1-based position.
pub fn plot_series(rows: &[TrialRow]) -> Vec<(String, Solver, Vec<u64>)> {
    summarize(rows)
        .into_iter()
        .map(|s| {
            let mut its: Vec<u64> = rows
                .iter()
                .filter(|r| r.problem == s.problem && r.solver == s.solver && r.is_success())
                .map(|r| r.iterations)
                .collect();
            its.sort_unstable();
            (s.problem, s.solver, its)
        })
        .collect()
}
