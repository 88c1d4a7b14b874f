//! Random formulas and traces, and direct (slow) implementations of the
//! semantics used as oracles.
#![allow(dead_code)]

use falsify_core::signal::Trace;
use falsify_core::stl::{Affine, Formula, Interval};
use rand::Rng;

/// Sample offsets `j` with `lo <= j * step <= hi`, found by scanning.
fn offsets_in(interval: &Interval, step: f64, limit: usize) -> impl Iterator<Item = usize> + '_ {
    let eps = 1e-9;
    (0..limit).filter(move |&j| {
        let t = j as f64 * step;
        t >= interval.lo() - eps && t <= interval.hi() + eps
    })
}

/// Whether the last sample offset of `interval` lies within `limit` samples.
fn covered(interval: &Interval, step: f64, limit: usize) -> bool {
    (limit as f64 - 1.0) * step >= interval.hi() - 1e-9
}

/// Robustness straight from the recursive definition. Panics when a needed
/// sample is missing.
pub fn naive_rho(phi: &Formula, y: &Trace, i: usize) -> f64 {
    let n = y.len();
    let step = y.step();
    match phi {
        Formula::Atom(f) => f.eval(y.sample(i)),
        Formula::Not(f) => -naive_rho(f, y, i),
        Formula::And(a, b) => naive_rho(a, y, i).min(naive_rho(b, y, i)),
        Formula::Or(a, b) => naive_rho(a, y, i).max(naive_rho(b, y, i)),
        Formula::Always(iv, f) => {
            assert!(covered(iv, step, n - i), "trace too short");
            offsets_in(iv, step, n - i)
                .map(|j| naive_rho(f, y, i + j))
                .fold(f64::INFINITY, f64::min)
        }
        Formula::Eventually(iv, f) => {
            assert!(covered(iv, step, n - i), "trace too short");
            offsets_in(iv, step, n - i)
                .map(|j| naive_rho(f, y, i + j))
                .fold(f64::NEG_INFINITY, f64::max)
        }
        Formula::Until(iv, a, b) => {
            assert!(covered(iv, step, n - i), "trace too short");
            offsets_in(iv, step, n - i)
                .map(|j| {
                    let before = (i..i + j)
                        .map(|k| naive_rho(a, y, k))
                        .fold(f64::INFINITY, f64::min);
                    before.min(naive_rho(b, y, i + j))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Boolean satisfaction with atoms `f >= 0`.
pub fn holds(phi: &Formula, y: &Trace, i: usize) -> bool {
    let n = y.len();
    let step = y.step();
    match phi {
        Formula::Atom(f) => f.eval(y.sample(i)) >= 0.0,
        Formula::Not(f) => !holds(f, y, i),
        Formula::And(a, b) => holds(a, y, i) && holds(b, y, i),
        Formula::Or(a, b) => holds(a, y, i) || holds(b, y, i),
        Formula::Always(iv, f) => {
            assert!(covered(iv, step, n - i), "trace too short");
            offsets_in(iv, step, n - i).all(|j| holds(f, y, i + j))
        }
        Formula::Eventually(iv, f) => {
            assert!(covered(iv, step, n - i), "trace too short");
            offsets_in(iv, step, n - i).any(|j| holds(f, y, i + j))
        }
        Formula::Until(iv, a, b) => {
            assert!(covered(iv, step, n - i), "trace too short");
            offsets_in(iv, step, n - i)
                .any(|j| holds(b, y, i + j) && (i..i + j).all(|k| holds(a, y, k)))
        }
    }
}

/// A random affine atom over `vars` variables with small integer
/// coefficients.
pub fn random_atom<R: Rng>(rng: &mut R, vars: usize) -> Formula {
    let terms: Vec<(usize, f64)> = (0..rng.gen_range(1..=vars.min(2)))
        .map(|_| {
            let c = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0][rng.gen_range(0..6)];
            (rng.gen_range(0..vars), c)
        })
        .collect();
    let constant = rng.gen_range(-6..=6) as f64 * 0.5;
    Formula::atom(Affine::new(constant, terms))
}

fn random_interval<R: Rng>(rng: &mut R, budget: f64, step: f64) -> Interval {
    // Mostly grid-aligned end points, sometimes between samples.
    let slots = (budget / step).floor() as i64;
    let pick = |rng: &mut R| -> f64 {
        let k = rng.gen_range(0..=slots) as f64 * step;
        if rng.gen_bool(0.2) {
            (k + rng.gen_range(0.0..step)).min(budget)
        } else {
            k
        }
    };
    let (a, b) = (pick(rng), pick(rng));
    Interval::new(a.min(b), a.max(b)).expect("ordered end points")
}

/// A random formula of depth at most `depth` whose horizon is at most
/// `budget`.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize, vars: usize, budget: f64, step: f64) -> Formula {
    if depth <= 1 || rng.gen_bool(0.2) {
        return random_atom(rng, vars);
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 => Formula::not(random_formula(rng, d, vars, budget, step)),
        1 => Formula::and(
            random_formula(rng, d, vars, budget, step),
            random_formula(rng, d, vars, budget, step),
        ),
        2 => Formula::or(
            random_formula(rng, d, vars, budget, step),
            random_formula(rng, d, vars, budget, step),
        ),
        kind => {
            let iv = random_interval(rng, budget, step);
            let rest = budget - iv.hi();
            match kind {
                3 => Formula::always(iv, random_formula(rng, d, vars, rest, step)),
                4 => Formula::eventually(iv, random_formula(rng, d, vars, rest, step)),
                _ => Formula::until(
                    iv,
                    random_formula(rng, d, vars, rest, step),
                    random_formula(rng, d, vars, rest, step),
                ),
            }
        }
    }
}

/// A random trace; half of the time values are small integers so that ties
/// and exact zeros occur.
pub fn random_rows<R: Rng>(rng: &mut R, vars: usize, len: usize) -> Vec<Vec<f64>> {
    let integral = rng.gen_bool(0.5);
    (0..len)
        .map(|_| {
            (0..vars)
                .map(|_| {
                    if integral {
                        rng.gen_range(-4..=4) as f64
                    } else {
                        rng.gen_range(-5.0..5.0)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn trace(vars: usize, step: f64, rows: &[Vec<f64>]) -> Trace {
    Trace::from_rows(vars, step, rows).expect("valid rows")
}

/// Number of samples needed to evaluate `phi` at time 0.
pub fn samples_for(phi: &Formula, step: f64) -> usize {
    (phi.horizon() / step + 1e-9).ceil() as usize + 1
}
