use alloc::vec::Vec;

use rand::Rng;

use super::tree::{Choice, EdgeId, NodeId, Tree};
use super::{FalsificationOutcome, SearchConfig, SearchError, SearchProblem, Status};
use crate::inputspace::{SegmentId, SegmentSpace};
use crate::models::SystemModel;
use crate::robustness::rho_bounds;
use crate::signal::{InputSignal, Segment};

/// A segment committed during the current descent, classified after the
/// simulation.
struct Pending {
    parent: NodeId,
    segment: SegmentId,
    child: NodeId,
    /// Input time at which this segment ends.
    end: f64,
    /// Number of input segments up to and including this one.
    depth: usize,
}

/// Adaptive Las Vegas tree search.
///
/// Each iteration descends from the root, drawing edges from the sampling
/// distribution. Explored edges are followed without simulating. Once an
/// unexplored segment is drawn the descent keeps drawing fresh segments until
/// the input covers the horizon, and the complete input is simulated once.
/// The new edges are then classified shallowest first on the matching prefix
/// of the output: a prefix whose robustness upper bound is negative is
/// returned as the witness, one whose lower bound is positive is dropped
/// together with everything below it, and any other becomes an explored edge.
/// The full-trace robustness is finally propagated to every explored edge on
/// the path.
pub fn alvts<M, R>(
    model: &mut M,
    problem: &SearchProblem,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<FalsificationOutcome, SearchError>
where
    M: SystemModel + ?Sized,
    R: Rng + ?Sized,
{
    problem.check(model.input_dimension())?;
    let space = &problem.space;
    let root_space = if problem.params.is_empty() {
        space.clone()
    } else {
        space.augmented(&problem.params)?
    };
    let sizes = level_sizes(space);
    let horizon = space.horizon();
    let end_slack = horizon * 1e-9;
    let signal_dims = space.dimension();
    let input_dims = problem.input_dimension();

    let mut tree = Tree::new(&level_sizes(&root_space));
    let mut iterations = 0u64;
    let mut idle = 0u64;
    let mut best = f64::INFINITY;

    let outcome = |status, witness, robustness, iterations, best| FalsificationOutcome {
        status,
        witness,
        robustness,
        iterations,
        best_robustness: best,
    };

    while iterations < config.max_iterations {
        if tree.nodes[Tree::ROOT].is_exhausted() || idle >= config.max_idle_descents {
            return Ok(outcome(Status::Exhausted, None, best, iterations, best));
        }

        let mut node = Tree::ROOT;
        let mut path: Vec<EdgeId> = Vec::new();
        let mut pending: Vec<Pending> = Vec::new();
        let mut segments: Vec<Segment> = Vec::new();
        let mut params: Vec<f64> = Vec::new();
        let mut length = 0.0;
        let mut stuck = false;

        while length < horizon - end_slack {
            let (segment, fresh) = match tree.sample_edge(node, config.level_base, rng) {
                Err(_) => {
                    stuck = true;
                    break;
                }
                Ok(Choice::Explored(edge, _)) => {
                    path.push(edge);
                    node = tree.edges[edge].child;
                    (tree.edges[edge].segment, None)
                }
                Ok(Choice::Unexplored(segment)) => {
                    let parent = node;
                    node = tree.add_node(&sizes);
                    (segment, Some(parent))
                }
            };
            let level_space = if segments.is_empty() { &root_space } else { space };
            let mut values = level_space.values(segment)?;
            if segments.is_empty() {
                params = values.split_off(signal_dims);
            }
            values.extend_from_slice(&params);
            let duration = level_space.duration(segment.level).min(horizon - length);
            segments.push(Segment::new(duration, values)?);
            length += duration;
            if let Some(parent) = fresh {
                pending.push(Pending {
                    parent,
                    segment,
                    child: node,
                    end: length,
                    depth: segments.len(),
                });
            }
        }

        if stuck || pending.is_empty() {
            idle += 1;
            continue;
        }
        idle = 0;

        let input = InputSignal::from_segments(input_dims, segments)?;
        let trace = model.simulate(&input, problem.step)?;
        iterations += 1;

        let full = rho_bounds(&problem.formula, &trace);
        best = best.min(full.hi);

        for p in &pending {
            let prefix = trace.prefix(p.end.min(trace.length()))?;
            let bounds = rho_bounds(&problem.formula, &prefix);
            if bounds.is_falsified() {
                let witness =
                    InputSignal::from_segments(input_dims, input.segments()[..p.depth].to_vec())
                        ?;
                best = best.min(bounds.hi);
                return Ok(outcome(
                    Status::Falsified,
                    Some(witness),
                    bounds.hi,
                    iterations,
                    best,
                ));
            }
            if bounds.is_satisfied() {
                break;
            }
            path.push(tree.add_explored(p.parent, p.segment, p.child, bounds.hi));
        }
        tree.backpropagate(&path, full.hi);
    }
    Ok(outcome(Status::BudgetReached, None, best, iterations, best))
}

fn level_sizes(space: &SegmentSpace) -> Vec<u64> {
    (0..space.level_count()).map(|l| space.level_size(l)).collect()
}
