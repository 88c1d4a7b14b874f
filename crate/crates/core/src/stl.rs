//! Signal temporal logic formulas over named trace dimensions.
//!
//! Formulas are read from S-expressions:
//!
//! ```text
//! (always (0 30) (implies (= g 4) (> v 50)))
//! ```
//!
//! Only bounded temporal intervals are accepted, so every formula has a finite
//! time horizon. Atoms are affine comparisons; `<` and `<=` (likewise `>` and
//! `>=`) share the same quantitative meaning.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::sexpr::{self, Position, Sexp, SexpError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StlError {
    #[error(transparent)]
    Syntax(#[from] SexpError),
    #[error("{0}: unknown operator '{1}'")]
    UnknownOperator(Position, String),
    #[error("{0}: unknown variable '{1}'")]
    UnknownVariable(Position, String),
    #[error("{0}: malformed interval: {1}")]
    BadInterval(Position, String),
    #[error("{0}: '{1}' expects {2}")]
    Arity(Position, String, &'static str),
    #[error("{0}: non-affine expression: {1}")]
    NonAffine(Position, String),
    #[error("{0}: expected a formula")]
    Expected(Position),
}

/// A bounded time interval `[lo, hi]` with `0 <= lo <= hi < inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Option<Interval> {
        (lo >= 0.0 && lo <= hi && hi.is_finite()).then_some(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// `constant + sum(coef * x[var])` over trace dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

impl Affine {
    pub fn constant(c: f64) -> Affine {
        Affine {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn var(index: usize) -> Affine {
        Affine {
            constant: 0.0,
            terms: alloc::vec![(index, 1.0)],
        }
    }

    pub fn new(constant: f64, terms: impl IntoIterator<Item = (usize, f64)>) -> Affine {
        let mut a = Affine::constant(constant);
        for (var, coef) in terms {
            a.add_term(var, coef);
        }
        a
    }

    fn add_term(&mut self, var: usize, coef: f64) {
        match self.terms.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(i) => {
                self.terms[i].1 += coef;
                if self.terms[i].1 == 0.0 {
                    self.terms.remove(i);
                }
            }
            Err(i) if coef != 0.0 => self.terms.insert(i, (var, coef)),
            Err(_) => {}
        }
    }

    pub fn plus(mut self, other: &Affine) -> Affine {
        self.constant += other.constant;
        for &(var, coef) in &other.terms {
            self.add_term(var, coef);
        }
        self
    }

    pub fn scale(mut self, k: f64) -> Affine {
        self.constant *= k;
        if k == 0.0 {
            self.terms.clear();
        } else {
            for term in &mut self.terms {
                term.1 *= k;
            }
        }
        self
    }

    pub fn minus(self, other: &Affine) -> Affine {
        self.plus(&other.clone().scale(-1.0))
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates at one trace sample.
    pub fn eval(&self, sample: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(var, coef)| acc + coef * sample[var])
    }
}

/// An STL formula. Atoms denote `f(x) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Affine),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
}

impl Formula {
    pub fn atom(f: Affine) -> Formula {
        Formula::Atom(f)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn until(i: Interval, a: Formula, b: Formula) -> Formula {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    pub fn always(i: Interval, f: Formula) -> Formula {
        Formula::Always(i, Box::new(f))
    }

    pub fn eventually(i: Interval, f: Formula) -> Formula {
        Formula::Eventually(i, Box::new(f))
    }

    /// Least `T` such that robustness at time 0 only depends on `[0, T]`.
    pub fn horizon(&self) -> f64 {
        match self {
            Formula::Atom(_) => 0.0,
            Formula::Not(f) => f.horizon(),
            Formula::And(a, b) | Formula::Or(a, b) => a.horizon().max(b.horizon()),
            Formula::Until(i, a, b) => i.hi + a.horizon().max(b.horizon()),
            Formula::Always(i, f) | Formula::Eventually(i, f) => i.hi + f.horizon(),
        }
    }

    /// Nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Sorted, deduplicated trace dimensions referenced by atoms.
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Formula::Atom(f) => out.extend(f.terms.iter().map(|&(v, _)| v)),
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => {
                f.collect_vars(out)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Renders the formula as an S-expression using `names` for variables.
    pub fn display<'a, S: AsRef<str>>(&'a self, names: &'a [S]) -> impl fmt::Display + 'a {
        Printer {
            formula: self,
            names,
        }
    }
}

struct Printer<'a, S> {
    formula: &'a Formula,
    names: &'a [S],
}

impl<S: AsRef<str>> Printer<'_, S> {
    fn write_affine(&self, f: &mut fmt::Formatter<'_>, a: &Affine) -> fmt::Result {
        if a.terms.is_empty() {
            return write!(f, "{}", a.constant);
        }
        f.write_str("(+")?;
        if a.constant != 0.0 {
            write!(f, " {}", a.constant)?;
        }
        for &(var, coef) in &a.terms {
            let name = self.names.get(var).map(AsRef::as_ref).unwrap_or("?");
            if coef == 1.0 {
                write!(f, " {name}")?;
            } else {
                write!(f, " (* {coef} {name})")?;
            }
        }
        f.write_str(")")
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, phi: &Formula) -> fmt::Result {
        match phi {
            Formula::Atom(a) => {
                f.write_str("(>= ")?;
                self.write_affine(f, a)?;
                f.write_str(" 0)")
            }
            Formula::Not(a) => {
                f.write_str("(not ")?;
                self.write(f, a)?;
                f.write_str(")")
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let op = if matches!(phi, Formula::And(..)) { "and" } else { "or" };
                write!(f, "({op} ")?;
                self.write(f, a)?;
                f.write_str(" ")?;
                self.write(f, b)?;
                f.write_str(")")
            }
            Formula::Until(i, a, b) => {
                write!(f, "(until ({} {}) ", i.lo, i.hi)?;
                self.write(f, a)?;
                f.write_str(" ")?;
                self.write(f, b)?;
                f.write_str(")")
            }
            Formula::Always(i, a) | Formula::Eventually(i, a) => {
                let op = if matches!(phi, Formula::Always(..)) {
                    "always"
                } else {
                    "eventually"
                };
                write!(f, "({op} ({} {}) ", i.lo, i.hi)?;
                self.write(f, a)?;
                f.write_str(")")
            }
        }
    }
}

impl<S: AsRef<str>> fmt::Display for Printer<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.formula)
    }
}

/// Parses a formula from text, resolving variables against `outputs`.
pub fn parse_formula<S: AsRef<str>>(text: &str, outputs: &[S]) -> Result<Formula, StlError> {
    let expr = sexpr::parse_one(text)?;
    formula_from_sexp(&expr, outputs)
}

/// Converts an already-read S-expression into a formula.
pub fn formula_from_sexp<S: AsRef<str>>(expr: &Sexp, outputs: &[S]) -> Result<Formula, StlError> {
    let pos = expr.pos();
    let Some((op, args)) = expr.call() else {
        return Err(StlError::Expected(pos));
    };
    let sub = |e: &Sexp| formula_from_sexp(e, outputs);
    let arity = |n: usize, what: &'static str| {
        if args.len() == n {
            Ok(())
        } else {
            Err(StlError::Arity(pos, op.to_string(), what))
        }
    };
    match op {
        "not" => {
            arity(1, "one argument")?;
            Ok(Formula::not(sub(&args[0])?))
        }
        "and" | "or" => {
            if args.len() < 2 {
                return Err(StlError::Arity(pos, op.to_string(), "at least two arguments"));
            }
            let mut acc = sub(&args[0])?;
            for arg in &args[1..] {
                let rhs = sub(arg)?;
                acc = if op == "and" {
                    Formula::and(acc, rhs)
                } else {
                    Formula::or(acc, rhs)
                };
            }
            Ok(acc)
        }
        "implies" => {
            arity(2, "two arguments")?;
            Ok(Formula::implies(sub(&args[0])?, sub(&args[1])?))
        }
        "always" | "eventually" => {
            arity(2, "an interval and a formula")?;
            let interval = parse_interval(&args[0])?;
            let body = sub(&args[1])?;
            Ok(if op == "always" {
                Formula::always(interval, body)
            } else {
                Formula::eventually(interval, body)
            })
        }
        "until" => {
            arity(3, "an interval and two formulas")?;
            let interval = parse_interval(&args[0])?;
            Ok(Formula::until(interval, sub(&args[1])?, sub(&args[2])?))
        }
        "<" | "<=" | ">" | ">=" | "=" => {
            arity(2, "two expressions")?;
            let lhs = parse_affine(&args[0], outputs)?;
            let rhs = parse_affine(&args[1], outputs)?;
            Ok(match op {
                "<" | "<=" => Formula::atom(rhs.minus(&lhs)),
                ">" | ">=" => Formula::atom(lhs.minus(&rhs)),
                _ => Formula::and(
                    Formula::atom(lhs.clone().minus(&rhs)),
                    Formula::atom(rhs.minus(&lhs)),
                ),
            })
        }
        _ => Err(StlError::UnknownOperator(pos, op.to_string())),
    }
}

fn parse_interval(expr: &Sexp) -> Result<Interval, StlError> {
    let pos = expr.pos();
    let bad = |msg: &str| StlError::BadInterval(pos, msg.to_string());
    let items = expr.list().ok_or_else(|| bad("expected (lo hi)"))?;
    if items.len() != 2 {
        return Err(bad("expected (lo hi)"));
    }
    let lo = items[0].number()?;
    let hi = items[1].number()?;
    if !hi.is_finite() {
        return Err(bad("unbounded intervals are not supported"));
    }
    if lo < 0.0 {
        return Err(bad("lower bound is negative"));
    }
    if lo > hi {
        return Err(bad("lower bound exceeds upper bound"));
    }
    Interval::new(lo, hi).ok_or_else(|| bad("invalid bounds"))
}

fn parse_affine<S: AsRef<str>>(expr: &Sexp, outputs: &[S]) -> Result<Affine, StlError> {
    let pos = expr.pos();
    if let Some(text) = expr.symbol() {
        if let Some(x) = sexpr::parse_number(text) {
            if !x.is_finite() {
                return Err(StlError::NonAffine(pos, "infinite literal".to_string()));
            }
            return Ok(Affine::constant(x));
        }
        return outputs
            .iter()
            .position(|name| name.as_ref() == text)
            .map(Affine::var)
            .ok_or_else(|| StlError::UnknownVariable(pos, text.to_string()));
    }
    let Some((op, args)) = expr.call() else {
        return Err(StlError::NonAffine(pos, "expected an expression".to_string()));
    };
    let parsed = args
        .iter()
        .map(|a| parse_affine(a, outputs))
        .collect::<Result<Vec<_>, _>>()?;
    match (op, parsed.as_slice()) {
        ("+", [first, rest @ ..]) => Ok(rest.iter().fold(first.clone(), |acc, a| acc.plus(a))),
        ("-", [only]) => Ok(only.clone().scale(-1.0)),
        ("-", [first, rest @ ..]) => Ok(rest.iter().fold(first.clone(), |acc, a| acc.minus(a))),
        ("*", [a, b]) => match (a.is_constant(), b.is_constant()) {
            (true, _) => Ok(b.clone().scale(a.constant)),
            (_, true) => Ok(a.clone().scale(b.constant)),
            _ => Err(StlError::NonAffine(pos, "product of two variables".to_string())),
        },
        ("/", [a, b]) if b.is_constant() && b.constant != 0.0 => Ok(a.clone().scale(1.0 / b.constant)),
        ("+" | "-" | "*" | "/", _) => Err(StlError::NonAffine(pos, alloc::format!("bad use of '{op}'"))),
        _ => Err(StlError::UnknownOperator(pos, op.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    const AT: [&str; 3] = ["v", "w", "g"];

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn at1_parses_to_always_atom() {
        let phi = parse_formula("(always (0 30) (< v 120))", &AT).unwrap();
        let expected = Formula::always(iv(0.0, 30.0), Formula::atom(Affine::new(120.0, [(0, -1.0)])));
        assert_eq!(phi, expected);
        assert_eq!(phi.horizon(), 30.0);
    }

    #[test]
    fn not_and_implies() {
        let p = parse_formula("(> v 1)", &AT).unwrap();
        let q = parse_formula("(< g 2)", &AT).unwrap();
        assert_eq!(parse_formula("(not (> v 1))", &AT).unwrap(), Formula::not(p.clone()));
        assert_eq!(
            parse_formula("(implies (> v 1) (< g 2))", &AT).unwrap(),
            Formula::or(Formula::not(p), q)
        );
    }

    #[test]
    fn equality_desugars_to_two_inequalities() {
        let phi = parse_formula("(= g 4)", &AT).unwrap();
        let expected = Formula::and(
            Formula::atom(Affine::new(-4.0, [(2, 1.0)])),
            Formula::atom(Affine::new(4.0, [(2, -1.0)])),
        );
        assert_eq!(phi, expected);
    }

    #[test]
    fn affine_expressions() {
        let phi = parse_formula("(>= (+ v (* 2 w) (- g) 3) (/ v 2))", &AT).unwrap();
        let Formula::Atom(a) = phi else { panic!() };
        assert_eq!(a, Affine::new(3.0, [(0, 0.5), (1, 2.0), (2, -1.0)]));
        assert_eq!(a.eval(&[2.0, 1.0, 4.0]), 3.0 + 1.0 + 2.0 - 4.0);
        assert!(matches!(
            parse_formula("(> (* v w) 0)", &AT),
            Err(StlError::NonAffine(..))
        ));
    }

    #[test]
    fn afc27_horizon() {
        // rise/fall edge detectors nested under a global and a local always
        let names = ["theta", "mu"];
        let text = "(always (11 50) (implies \
            (or (and (< theta 8.8) (eventually (0 0.1) (< 40.0 theta))) \
                (and (< 40.0 theta) (eventually (0 0.1) (< theta 8.8)))) \
            (always (1 5) (< mu 0.008))))";
        let phi = parse_formula(text, &names).unwrap();
        assert_eq!(phi.horizon(), 55.0);
    }

    #[test]
    fn horizon_recursion() {
        let a = Formula::atom(Affine::constant(1.0));
        assert_eq!(a.horizon(), 0.0);
        let u = Formula::until(iv(1.0, 4.0), Formula::always(iv(0.0, 2.0), a.clone()), a.clone());
        assert_eq!(u.horizon(), 6.0);
        assert_eq!(Formula::not(u.clone()).horizon(), u.horizon());
    }

    #[test]
    fn parse_errors() {
        let err = parse_formula("(always (0 30)\n (foo v))", &AT).unwrap_err();
        assert!(matches!(err, StlError::UnknownOperator(Position { line: 2, column: 2 }, _)));
        assert!(matches!(
            parse_formula("(always (0 30) (< speed 1))", &AT),
            Err(StlError::UnknownVariable(..))
        ));
        assert!(matches!(
            parse_formula("(always (5 3) (< v 1))", &AT),
            Err(StlError::BadInterval(..))
        ));
        assert!(matches!(
            parse_formula("(always (0 inf) (< v 1))", &AT),
            Err(StlError::BadInterval(..))
        ));
        assert!(matches!(parse_formula("(always (0 1)", &AT), Err(StlError::Syntax(_))));
        assert!(matches!(parse_formula("(not)", &AT), Err(StlError::Arity(..))));
    }

    #[test]
    fn print_parse_fixpoint() {
        let text = "(or (until (0 2.5) (> v 0) (<= (- v w) 5)) (not (eventually (1 3) (= g 2))))";
        let phi = parse_formula(text, &AT).unwrap();
        let printed = format!("{}", phi.display(&AT));
        let again = parse_formula(&printed, &AT).unwrap();
        assert_eq!(again, phi);
        assert_eq!(format!("{}", again.display(&AT)), printed);
    }
}
