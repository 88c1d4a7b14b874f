use std::collections::HashMap;

use falsify_core::inputspace::{InputDomain, SegmentId, SegmentSpace};
use falsify_core::models::{ModelError, SystemModel, Thermostat, Transmission};
use falsify_core::robustness::rho_bounds;
use falsify_core::search::tree::{Choice, Strategy, Tree};
use falsify_core::search::{
    alvts, random_search, FalsificationOutcome, SearchConfig, SearchError, SearchProblem, Status,
};
use falsify_core::signal::{InputSignal, Trace};
use falsify_core::stl::parse_formula;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Counting<M> {
    inner: M,
    simulations: u64,
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

fn counting<M>(inner: M) -> Counting<M> {
    Counting {
        inner,
        simulations: 0,
    }
}

fn transmission_problem(requirement: &str) -> SearchProblem {
    let space = SegmentSpace::new(
        vec![
            InputDomain::new("throttle", 0.0, 100.0),
            InputDomain::new("brake", 0.0, 100.0),
        ],
        vec![2, 2, 3, 3, 3, 4],
        30.0,
    )
    .unwrap();
    let formula = parse_formula(requirement, &["v", "w", "g"]).unwrap();
    SearchProblem::new(formula, space, 0.1)
}

fn thermostat_problem(requirement: &str, levels: Vec<u32>) -> SearchProblem {
    let space = SegmentSpace::new(vec![InputDomain::new("power", -2.0, 2.0)], levels, 20.0).unwrap();
    let formula = parse_formula(requirement, &["x", "mode"]).unwrap();
    SearchProblem::new(formula, space, 0.1)
}

fn config(max_iterations: u64) -> SearchConfig {
    SearchConfig {
        max_iterations,
        ..SearchConfig::default()
    }
}

/// Re-simulates the witness from scratch and checks that it violates the
/// requirement.
fn assert_valid_witness<M: SystemModel>(model: &mut M, problem: &SearchProblem, outcome: &FalsificationOutcome) {
    let witness = outcome.witness.as_ref().expect("falsified outcomes carry a witness");
    assert!(witness.length() <= problem.horizon() + 1e-9);
    let trace = model.simulate(witness, problem.step).unwrap();
    let bounds = rho_bounds(&problem.formula, &trace);
    assert!(bounds.hi < 0.0, "witness upper bound {}", bounds.hi);
}

#[test]
fn fresh_node_level_frequencies() {
    // l_max = 4: weights 1, 1/2, 1/4, 1/8, 1/16
    let sizes = [4, 4, 9, 20, 44];
    let draws = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut counts = [0u64; 5];
    for _ in 0..draws {
        let mut tree = Tree::new(&sizes);
        match tree.sample_edge(Tree::ROOT, 2.0, &mut rng) {
            Ok(Choice::Unexplored(id)) => counts[id.level] += 1,
            other => panic!("fresh node gave {other:?}"),
        }
    }
    for (l, &count) in counts.iter().enumerate() {
        let p = [16.0, 8.0, 4.0, 2.0, 1.0][l] / 31.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (count as f64 - mean).abs() <= 3.0 * sigma,
            "level {l}: {count} draws, expected {mean} +- {}",
            3.0 * sigma
        );
    }
}

#[test]
fn level_weights_use_the_base() {
    let tree = Tree::new(&[4, 4, 9]);
    assert_eq!(tree.level_weights(Tree::ROOT, 3.0), [1.0, 1.0 / 3.0, 1.0 / 9.0]);
}

/// A root with one level of four segments, one explored edge per score pair
/// (prefix, suffix), the rest still unexplored.
fn partially_explored(scores: &[(f64, f64)]) -> Tree {
    let mut tree = Tree::new(&[4]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (i, &(prefix, suffix)) in scores.iter().enumerate() {
        let index = tree.nodes[Tree::ROOT].levels[0].unexplored.draw(&mut rng).unwrap();
        let id = SegmentId { level: 0, index };
        let child = tree.add_node(&[4]);
        let e = tree.add_explored(Tree::ROOT, id, child, prefix);
        assert_eq!(e, i);
        if suffix.is_finite() {
            tree.backpropagate(&[e], suffix);
        }
    }
    tree
}

#[test]
fn strategies_are_uniform_over_the_feasible_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 40_000;
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for _ in 0..draws {
        let mut tree = partially_explored(&[(1.0, 0.5), (2.0, 0.2)]);
        let name = match tree.sample_edge(Tree::ROOT, 2.0, &mut rng).unwrap() {
            Choice::Unexplored(_) => "explore",
            Choice::Explored(_, Strategy::Revisit) => "revisit",
            Choice::Explored(_, Strategy::BestPrefix) => "prefix",
            Choice::Explored(_, Strategy::BestSuffix) => "suffix",
            Choice::Explored(_, Strategy::Explore) => unreachable!(),
        };
        *counts.entry(name).or_default() += 1;
    }
    let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
    for name in ["explore", "revisit", "prefix", "suffix"] {
        let c = counts.get(name).copied().unwrap_or(0) as f64;
        assert!((c - draws as f64 / 4.0).abs() <= 4.0 * sigma, "{name}: {c}");
    }
}

#[test]
fn fully_explored_levels_never_explore() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tree = partially_explored(&[(3.0, 1.0), (1.0, 4.0), (2.0, 2.0), (5.0, 0.5)]);
    for _ in 0..1000 {
        match tree.sample_edge(Tree::ROOT, 2.0, &mut rng).unwrap() {
            Choice::Explored(e, Strategy::BestPrefix) => assert_eq!(e, 1),
            Choice::Explored(e, Strategy::BestSuffix) => assert_eq!(e, 3),
            Choice::Explored(_, Strategy::Revisit) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn best_strategies_break_ties_uniformly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut tree = partially_explored(&[(1.0, 2.0), (1.0, 2.0), (1.0, 2.0), (9.0, 9.0)]);
    let mut prefix = [0u64; 4];
    let mut suffix = [0u64; 4];
    for _ in 0..30_000 {
        match tree.sample_edge(Tree::ROOT, 2.0, &mut rng).unwrap() {
            Choice::Explored(e, Strategy::BestPrefix) => prefix[e] += 1,
            Choice::Explored(e, Strategy::BestSuffix) => suffix[e] += 1,
            _ => {}
        }
    }
    for counts in [prefix, suffix] {
        assert_eq!(counts[3], 0);
        let n: u64 = counts.iter().sum();
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &c in &counts[..3] {
            assert!((c as f64 - n as f64 / 3.0).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }
}

#[test]
fn unsimulated_suffix_falls_back_to_prefix_score() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // edge 0 has no simulated descendant, so its prefix score 0.1 is used
    let mut tree = partially_explored(&[(0.1, f64::INFINITY), (5.0, 0.3), (6.0, 0.2), (7.0, 7.0)]);
    assert_eq!(tree.edges[0].suffix_score, f64::INFINITY);
    for _ in 0..500 {
        if let Choice::Explored(e, Strategy::BestSuffix) = tree.sample_edge(Tree::ROOT, 2.0, &mut rng).unwrap() {
            assert_eq!(e, 0);
        }
    }
}

#[test]
fn suffix_scores_are_minima_over_simulated_descendants() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let mut tree = Tree::new(&[3, 3]);
        let mut children: HashMap<(usize, u64), usize> = HashMap::new();
        let mut simulated: Vec<(Vec<usize>, f64)> = Vec::new();
        for _ in 0..40 {
            let depth = rng.gen_range(1..=4);
            let mut node = Tree::ROOT;
            let mut path = Vec::new();
            for _ in 0..depth {
                let index = rng.gen_range(0..3);
                let edge = *children.entry((node, index)).or_insert_with(|| {
                    let child = tree.add_node(&[3, 3]);
                    tree.add_explored(node, SegmentId { level: 0, index }, child, 100.0)
                });
                path.push(edge);
                node = tree.edges[edge].child;
            }
            let value = rng.gen_range(-10.0..10.0);
            tree.backpropagate(&path, value);
            simulated.push((path, value));
        }
        for (e, edge) in tree.edges.iter().enumerate() {
            let expected = simulated
                .iter()
                .filter(|(path, _)| path.contains(&e))
                .map(|&(_, v)| v)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(edge.suffix_score, expected);
        }
    }
}

#[test]
fn alvts_witnesses_violate_the_requirement() {
    let requirements = [
        "(always (0 30) (< v 45))",
        "(always (0 30) (implies (and (>= g 3.5) (<= g 4.5)) (> v 50)))",
        "(always (0 30) (< w 4500))",
        "(eventually (0 30) (> v 60))",
        "(always (0 10) (< v 10))",
    ];
    let mut falsified = 0;
    for requirement in requirements {
        let problem = transmission_problem(requirement);
        for trial in 0..5 {
            let cfg = config(300);
            let mut model = counting(Transmission::new());
            let outcome = alvts(&mut model, &problem, &cfg, &mut cfg.trial_rng(trial)).unwrap();
            assert_eq!(outcome.iterations, model.simulations);
            assert!(outcome.best_robustness <= outcome.robustness);
            if outcome.status == Status::Falsified {
                falsified += 1;
                assert!(outcome.robustness < 0.0);
                assert_valid_witness(&mut Transmission::new(), &problem, &outcome);
            } else {
                assert!(outcome.witness.is_none());
            }
        }
    }
    assert!(falsified >= 15, "only {falsified} falsified");
}

#[test]
fn random_witnesses_violate_the_requirement() {
    let problem = thermostat_problem("(always (5 20) (> x 11))", vec![2, 2, 3, 4]);
    let mut falsified = 0;
    for trial in 0..20 {
        let cfg = config(300);
        let mut model = counting(Thermostat::new());
        let outcome = random_search(&mut model, &problem, 4, &cfg, &mut cfg.trial_rng(trial)).unwrap();
        assert_eq!(outcome.iterations, model.simulations);
        if outcome.status == Status::Falsified {
            falsified += 1;
            assert_valid_witness(&mut Thermostat::new(), &problem, &outcome);
        }
    }
    assert!(falsified >= 15);
}

#[test]
fn same_seed_same_outcome() {
    let problem = transmission_problem("(always (0 30) (< v 47))");
    for trial in 0..5 {
        let cfg = SearchConfig {
            seed: 42,
            ..config(300)
        };
        let a = alvts(&mut Transmission::new(), &problem, &cfg, &mut cfg.trial_rng(trial)).unwrap();
        let b = alvts(&mut Transmission::new(), &problem, &cfg, &mut cfg.trial_rng(trial)).unwrap();
        assert_eq!(a, b);
        let a = random_search(&mut Transmission::new(), &problem, 4, &cfg, &mut cfg.trial_rng(trial)).unwrap();
        let b = random_search(&mut Transmission::new(), &problem, 4, &cfg, &mut cfg.trial_rng(trial)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn trivially_false_requirement_falls_at_the_first_simulation() {
    let problem = transmission_problem("(always (0 30) (< v -1))");
    let cfg = config(300);
    let outcome = alvts(&mut Transmission::new(), &problem, &cfg, &mut cfg.trial_rng(0)).unwrap();
    assert_eq!(outcome.status, Status::Falsified);
    assert_eq!(outcome.iterations, 1);
    // violated at time 0, so the first segment alone is a witness
    assert_eq!(outcome.witness.unwrap().segments().len(), 1);
}

#[test]
fn unfalsifiable_requirement_uses_the_whole_budget() {
    let problem = transmission_problem("(always (0 30) (< v 1000))");
    let cfg = config(40);
    let mut model = counting(Transmission::new());
    let outcome = alvts(&mut model, &problem, &cfg, &mut cfg.trial_rng(0)).unwrap();
    assert_eq!(outcome.status, Status::BudgetReached);
    assert_eq!(outcome.iterations, 40);
    assert_eq!(model.simulations, 40);
    assert!(outcome.best_robustness > 0.0);
}

#[test]
fn tiny_space_is_exhausted() {
    // Every prefix is decided as satisfied after its first segment, so no
    // edge is ever kept and the root runs out of segments.
    let problem = thermostat_problem("(always (0 1) (> x 0))", vec![1]);
    let cfg = config(300);
    let mut model = counting(Thermostat::new());
    let outcome = alvts(&mut model, &problem, &cfg, &mut cfg.trial_rng(0)).unwrap();
    assert_eq!(outcome.status, Status::Exhausted);
    assert_eq!(outcome.iterations, 2);
    assert_eq!(model.simulations, 2);
}

#[test]
fn parameters_are_constant_across_segments() {
    let space = SegmentSpace::new(vec![InputDomain::new("throttle", 0.0, 100.0)], vec![2, 3, 4], 30.0).unwrap();
    let formula = parse_formula("(always (0 30) (< v 40))", &["v", "w", "g"]).unwrap();
    let problem = SearchProblem::new(formula, space, 0.1)
        .with_params(vec![InputDomain::new("brake", 0.0, 10.0)]);
    let cfg = config(300);
    let outcome = alvts(&mut Transmission::new(), &problem, &cfg, &mut cfg.trial_rng(1)).unwrap();
    assert_eq!(outcome.status, Status::Falsified);
    let witness = outcome.witness.unwrap();
    let brake = witness.segments()[0].values()[1];
    assert!(witness.segments().iter().all(|s| s.values()[1] == brake));
}

#[test]
fn mismatched_problems_are_rejected() {
    let problem = thermostat_problem("(always (0 20) (> x 11))", vec![2]);
    let cfg = config(10);
    assert!(matches!(
        alvts(&mut Transmission::new(), &problem, &cfg, &mut cfg.trial_rng(0)),
        Err(SearchError::InputMismatch { .. })
    ));
    let problem = thermostat_problem("(always (0 25) (> x 11))", vec![2]);
    assert!(matches!(
        alvts(&mut Thermostat::new(), &problem, &cfg, &mut cfg.trial_rng(0)),
        Err(SearchError::HorizonTooLong { .. })
    ));
}
