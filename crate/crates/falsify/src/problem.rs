//! Problem files.
//!
//! ```text
//! (problem
//!   (name "AT1")
//!   (model transmission)
//!   (input-space
//!     (time 30)
//!     (levels 2 2 3 3 3 4)
//!     (dim throttle 0 100)
//!     (dim brake 0 100))
//!   (params (omega 900 1100))
//!   (step 0.1)
//!   (random-segments 4)
//!   (requirement (always (0 30) (< v 47))))
//! ```
//!
//! `name`, `params`, `step` (default `T/300`) and `random-segments`
//! (default 4) are optional. An external simulator is declared as
//!
//! ```text
//! (model (external (command "python3" "sim.py") (inputs u) (outputs y)))
//! ```

use std::fs;
use std::path::Path;

use falsify_core::inputspace::{InputDomain, SegmentSpace};
use falsify_core::models::{SystemModel, Thermostat, Transmission};
use falsify_core::search::SearchProblem;
use falsify_core::sexpr::{self, Position, Sexp};
use falsify_core::signal::{InputSignal, Segment};
use falsify_core::stl::{formula_from_sexp, Formula};

use crate::error::{Error, Result};
use crate::external::ExternalModel;

pub const BUILTIN_MODELS: [&str; 2] = ["transmission", "thermostat"];

pub type BoxedModel = Box<dyn SystemModel + Send>;

/// Instantiates a built-in surrogate by name.
pub fn builtin_model(name: &str) -> Option<BoxedModel> {
    match name {
        "transmission" => Some(Box::new(Transmission::new())),
        "thermostat" => Some(Box::new(Thermostat::new())),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpec {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Builtin(String),
    External(ExternalSpec),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub model: ModelSpec,
    pub inputs: Vec<InputDomain>,
    pub levels: Vec<u32>,
    pub horizon: f64,
    pub params: Vec<InputDomain>,
    pub step: f64,
    pub random_segments: usize,
    pub requirement: Formula,
    pub output_names: Vec<String>,
}

impl Problem {
    pub fn space(&self) -> Result<SegmentSpace> {
        SegmentSpace::new(self.inputs.clone(), self.levels.clone(), self.horizon)
            .map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn search_problem(&self) -> Result<SearchProblem> {
        Ok(
            SearchProblem::new(self.requirement.clone(), self.space()?, self.step)
                .with_params(self.params.clone()),
        )
    }

    /// A fresh model instance; external models start their process lazily.
    pub fn build_model(&self) -> BoxedModel {
        match &self.model {
            ModelSpec::Builtin(name) => builtin_model(name).expect("validated at load time"),
            ModelSpec::External(spec) => Box::new(ExternalModel::new(spec.clone())),
        }
    }

    /// Names of the model inputs: time-varying dimensions, then parameters.
    pub fn input_names(&self) -> Vec<String> {
        self.inputs
            .iter()
            .chain(&self.params)
            .map(|d| d.name.clone())
            .collect()
    }

    pub fn parse(text: &str) -> Result<Problem> {
        let expr = sexpr::parse_one(text)?;
        let pos = expr.pos();
        let (head, clauses) = expr
            .call()
            .filter(|(h, _)| *h == "problem")
            .ok_or_else(|| Error::Invalid(pos, "expected (problem ...)".into()))?;
        debug_assert_eq!(head, "problem");

        let mut name = None;
        let mut model = None;
        let mut space = None;
        let mut params = Vec::new();
        let mut step = None;
        let mut random_segments = None;
        let mut requirement = None;
        for clause in clauses {
            let pos = clause.pos();
            let (key, args) = clause
                .call()
                .ok_or_else(|| Error::Invalid(pos, "expected (key ...)".into()))?;
            match key {
                "name" => name = Some(single_text(pos, args)?.to_string()),
                "model" => model = Some(parse_model(pos, args)?),
                "input-space" => space = Some(parse_input_space(pos, args)?),
                "params" => params = args.iter().map(parse_domain).collect::<Result<_>>()?,
                "step" => step = Some(positive(pos, single(pos, args)?.number()?, "step")?),
                "random-segments" => {
                    let k = single(pos, args)?.number()?;
                    if !(k >= 1.0 && k.fract() == 0.0) {
                        return Err(Error::Invalid(pos, "random-segments must be a positive integer".into()));
                    }
                    random_segments = Some(k as usize);
                }
                "requirement" => requirement = Some(single(pos, args)?.clone()),
                other => return Err(Error::Invalid(pos, format!("unknown clause '{other}'"))),
            }
        }
        let missing = |what: &str| Error::Invalid(pos, format!("missing ({what} ...)"));
        let model = model.ok_or_else(|| missing("model"))?;
        let (horizon, levels, inputs) = space.ok_or_else(|| missing("input-space"))?;
        let requirement = requirement.ok_or_else(|| missing("requirement"))?;

        let (model_inputs, output_names) = match &model {
            ModelSpec::Builtin(name) => {
                let m = builtin_model(name).ok_or_else(|| {
                    Error::Validation(format!(
                        "unknown model '{name}', expected one of {BUILTIN_MODELS:?}"
                    ))
                })?;
                (m.input_names().to_vec(), m.output_names().to_vec())
            }
            ModelSpec::External(spec) => (spec.inputs.clone(), spec.outputs.clone()),
        };
        let requirement = formula_from_sexp(&requirement, &output_names)?;

        let problem = Problem {
            name: name.unwrap_or_else(|| "problem".into()),
            model,
            inputs,
            levels,
            horizon,
            params,
            step: step.unwrap_or(horizon / 300.0),
            random_segments: random_segments.unwrap_or(4),
            requirement,
            output_names,
        };

        let declared = problem.input_names();
        if declared != model_inputs {
            return Err(Error::Validation(format!(
                "input dimensions and parameters {declared:?} do not match model inputs {model_inputs:?}"
            )));
        }
        let h = problem.requirement.horizon();
        if h > horizon * (1.0 + 1e-9) {
            return Err(Error::Validation(format!(
                "requirement horizon {h} exceeds signal length {horizon}"
            )));
        }
        problem.space()?;
        Ok(problem)
    }
}

/// Reads and validates a problem file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    Problem::parse(&text).map_err(|e| e.in_file(path))
}

/// Reads an input signal `(input (seg duration v1 ... vn) ...)`.
pub fn parse_input(text: &str, dimension: usize) -> Result<InputSignal> {
    let expr = sexpr::parse_one(text)?;
    let pos = expr.pos();
    let (_, segs) = expr
        .call()
        .filter(|(h, _)| *h == "input")
        .ok_or_else(|| Error::Invalid(pos, "expected (input (seg ...) ...)".into()))?;
    let mut signal = InputSignal::empty(dimension);
    for seg in segs {
        let pos = seg.pos();
        let (head, args) = seg
            .call()
            .filter(|(h, _)| *h == "seg")
            .ok_or_else(|| Error::Invalid(pos, "expected (seg duration v1 ... vn)".into()))?;
        debug_assert_eq!(head, "seg");
        let numbers = args.iter().map(Sexp::number).collect::<Result<Vec<_>, _>>()?;
        let (duration, values) = numbers
            .split_first()
            .ok_or_else(|| Error::Invalid(pos, "empty segment".into()))?;
        if values.len() != dimension {
            return Err(Error::Invalid(
                pos,
                format!("segment has {} values, expected {dimension}", values.len()),
            ));
        }
        let segment = Segment::new(*duration, values.to_vec())
            .map_err(|e| Error::Invalid(pos, e.to_string()))?;
        signal
            .push(segment)
            .map_err(|e| Error::Invalid(pos, e.to_string()))?;
    }
    Ok(signal)
}

pub fn load_input(path: impl AsRef<Path>, dimension: usize) -> Result<InputSignal> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    parse_input(&text, dimension).map_err(|e| e.in_file(path))
}

fn single(pos: Position, args: &[Sexp]) -> Result<&Sexp> {
    match args {
        [one] => Ok(one),
        _ => Err(Error::Invalid(pos, "expected exactly one argument".into())),
    }
}

fn single_text(pos: Position, args: &[Sexp]) -> Result<&str> {
    single(pos, args)?
        .text()
        .ok_or_else(|| Error::Invalid(pos, "expected a name".into()))
}

fn positive(pos: Position, x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Invalid(pos, format!("{what} must be positive and finite")))
    }
}

fn names(args: &[Sexp]) -> Result<Vec<String>> {
    args.iter()
        .map(|a| {
            a.text()
                .map(str::to_string)
                .ok_or_else(|| Error::Invalid(a.pos(), "expected a name".into()))
        })
        .collect()
}

fn parse_model(pos: Position, args: &[Sexp]) -> Result<ModelSpec> {
    let arg = single(pos, args)?;
    if let Some(name) = arg.symbol() {
        return Ok(ModelSpec::Builtin(name.to_string()));
    }
    let (head, clauses) = arg
        .call()
        .filter(|(h, _)| *h == "external")
        .ok_or_else(|| Error::Invalid(arg.pos(), "expected a model name or (external ...)".into()))?;
    debug_assert_eq!(head, "external");
    let mut command = None;
    let mut inputs = None;
    let mut outputs = None;
    for clause in clauses {
        let pos = clause.pos();
        let (key, args) = clause
            .call()
            .ok_or_else(|| Error::Invalid(pos, "expected (key ...)".into()))?;
        match key {
            "command" => {
                let mut parts = names(args)?;
                if parts.is_empty() {
                    return Err(Error::Invalid(pos, "empty command".into()));
                }
                let program = parts.remove(0);
                command = Some((program, parts));
            }
            "inputs" => inputs = Some(names(args)?),
            "outputs" => outputs = Some(names(args)?),
            other => return Err(Error::Invalid(pos, format!("unknown clause '{other}'"))),
        }
    }
    let pos = arg.pos();
    let (command, args) =
        command.ok_or_else(|| Error::Invalid(pos, "missing (command ...)".into()))?;
    let inputs = inputs.ok_or_else(|| Error::Invalid(pos, "missing (inputs ...)".into()))?;
    let outputs = outputs.ok_or_else(|| Error::Invalid(pos, "missing (outputs ...)".into()))?;
    if outputs.is_empty() {
        return Err(Error::Invalid(pos, "external model needs at least one output".into()));
    }
    Ok(ModelSpec::External(ExternalSpec {
        command,
        args,
        inputs,
        outputs,
    }))
}

fn parse_domain(expr: &Sexp) -> Result<InputDomain> {
    let pos = expr.pos();
    let bad = || Error::Invalid(pos, "expected (name lo hi)".into());
    let items = expr.list().ok_or_else(bad)?;
    let [name, lo, hi] = items else {
        return Err(bad());
    };
    let name = name.text().ok_or_else(bad)?;
    let (lo, hi) = (lo.number()?, hi.number()?);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Invalid(pos, format!("invalid range for '{name}'")));
    }
    Ok(InputDomain::new(name, lo, hi))
}

fn parse_input_space(pos: Position, args: &[Sexp]) -> Result<(f64, Vec<u32>, Vec<InputDomain>)> {
    let mut time = None;
    let mut levels = None;
    let mut dims = Vec::new();
    for clause in args {
        let cpos = clause.pos();
        let (key, rest) = clause
            .call()
            .ok_or_else(|| Error::Invalid(cpos, "expected (key ...)".into()))?;
        match key {
            "time" => time = Some(positive(cpos, single(cpos, rest)?.number()?, "time")?),
            "levels" => {
                let ks = rest
                    .iter()
                    .map(|k| {
                        let x = k.number()?;
                        if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                            Ok(x as u32)
                        } else {
                            Err(Error::Invalid(k.pos(), "control points must be positive integers".into()))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if ks.is_empty() {
                    return Err(Error::Invalid(cpos, "at least one level is required".into()));
                }
                levels = Some(ks);
            }
            "dim" => {
                let domain = parse_domain(&Sexp::List {
                    items: rest.to_vec(),
                    pos: cpos,
                })?;
                dims.push(domain);
            }
            other => return Err(Error::Invalid(cpos, format!("unknown clause '{other}'"))),
        }
    }
    let time = time.ok_or_else(|| Error::Invalid(pos, "missing (time T)".into()))?;
    let levels = levels.ok_or_else(|| Error::Invalid(pos, "missing (levels k0 ...)".into()))?;
    if dims.is_empty() {
        return Err(Error::Invalid(pos, "at least one (dim name lo hi) is required".into()));
    }
    Ok((time, levels, dims))
}
