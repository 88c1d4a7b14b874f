use alloc::vec::Vec;

use rand::Rng;

use super::{FalsificationOutcome, SearchConfig, SearchError, SearchProblem, Status};
use crate::inputspace::InputDomain;
use crate::models::SystemModel;
use crate::robustness::rho_bounds;
use crate::signal::{InputSignal, Segment};

fn uniform<R: Rng + ?Sized>(domain: &InputDomain, rng: &mut R) -> f64 {
    domain.lo + rng.gen::<f64>() * (domain.hi - domain.lo)
}

/// Uniform random sampling of inputs with `segments` equal-duration pieces.
///
/// Every iteration draws each value of each piece (and each constant
/// parameter) uniformly from its domain and simulates the whole input once.
pub fn random_search<M, R>(
    model: &mut M,
    problem: &SearchProblem,
    segments: usize,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<FalsificationOutcome, SearchError>
where
    M: SystemModel + ?Sized,
    R: Rng + ?Sized,
{
    if segments == 0 {
        return Err(SearchError::NoSegments);
    }
    problem.check(model.input_dimension())?;
    let horizon = problem.space.horizon();
    let duration = horizon / segments as f64;
    let dims = problem.input_dimension();
    let mut best = f64::INFINITY;

    for iteration in 1..=config.max_iterations {
        let params: Vec<f64> = problem.params.iter().map(|d| uniform(d, rng)).collect();
        let mut input = InputSignal::empty(dims);
        for _ in 0..segments {
            let mut values: Vec<f64> = problem
                .space
                .domains()
                .iter()
                .map(|d| uniform(d, rng))
                .collect();
            values.extend_from_slice(&params);
            input.push(Segment::new(duration, values)?)?;
        }
        let trace = model.simulate(&input, problem.step)?;
        let bounds = rho_bounds(&problem.formula, &trace);
        best = best.min(bounds.hi);
        if bounds.is_falsified() {
            return Ok(FalsificationOutcome {
                status: Status::Falsified,
                witness: Some(input),
                robustness: bounds.hi,
                iterations: iteration,
                best_robustness: best,
            });
        }
    }
    Ok(FalsificationOutcome {
        status: Status::BudgetReached,
        witness: None,
        robustness: best,
        iterations: config.max_iterations,
        best_robustness: best,
    })
}
