use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use falsify::external::format_number;
use falsify::falsify_core::robustness::{rho, rho_bounds};
use falsify::falsify_core::search::{SearchConfig, Solver};
use falsify::harness::{run_trials, summarize, summarize_suite};
use falsify::report::{save_csv, save_plot};
use falsify::{builtin_model, load_input, load_problem, load_trace_csv, save_trace_csv, write_trace_csv, Error};

#[derive(Parser)]
#[command(name = "falsify", version, about = "Falsify temporal-logic requirements of black-box systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Alvts,
    Random,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Solver {
        match s {
            SolverArg::Alvts => Solver::Alvts,
            SolverArg::Random => Solver::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Plot,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated falsification trials on one or more problems.
    Run {
        #[arg(required = true)]
        problems: Vec<PathBuf>,
        /// Solver to run; repeat to compare several.
        #[arg(long, value_enum, default_values_t = [SolverArg::Alvts])]
        solver: Vec<SolverArg>,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Simulation budget per trial.
        #[arg(long = "max-iters", default_value_t = 300)]
        max_iters: u64,
        /// Base seed; trial i uses seed ^ i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print the robustness of a trace against a problem's requirement.
    Robustness { problem: PathBuf, trace: PathBuf },
    /// Simulate a problem's model on an input file.
    Simulate {
        problem: PathBuf,
        input: PathBuf,
        /// Trace CSV to write; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer simulation requests on standard input with a built-in model.
    Serve { model: String },
}

fn brief(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            problems,
            solver,
            trials,
            max_iters,
            seed,
            out,
            format,
        } => {
            let problems = problems
                .iter()
                .map(load_problem)
                .collect::<Result<Vec<_>, _>>()?;
            let mut rows = Vec::new();
            for problem in &problems {
                for &s in &solver {
                    let config = SearchConfig {
                        max_iterations: max_iters,
                        seed,
                        solver: s.into(),
                        ..SearchConfig::default()
                    };
                    rows.extend(run_trials(problem, &config, trials));
                }
            }
            let written = match format {
                Format::Csv => save_csv(&out, &rows)?,
                Format::Plot => save_plot(&out, &rows)?,
            };
            let summaries = summarize(&rows);
            for s in &summaries {
                println!(
                    "{} {}: {}/{} falsified, mean {}, sd {}{}",
                    s.problem,
                    s.solver.name(),
                    s.successes,
                    s.trials,
                    brief(s.mean),
                    brief(s.sd),
                    if s.tainted { " (some trials failed)" } else { "" }
                );
            }
            for s in summarize_suite(&summaries) {
                println!(
                    "suite {}: {}/{} falsified over {} problems, geometric mean {}",
                    s.solver.name(),
                    s.successes,
                    s.trials,
                    s.problems,
                    brief(s.geometric_mean)
                );
            }
            for r in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "warning: {} {} trial {} failed: {}",
                    r.problem,
                    r.solver.name(),
                    r.trial,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Robustness { problem, trace } => {
            let problem = load_problem(&problem)?;
            let trace = load_trace_csv(&trace, &problem.output_names)?;
            let bounds = rho_bounds(&problem.requirement, &trace);
            match rho(&problem.requirement, &trace, 0.0) {
                Ok(value) => println!("rho {}", format_number(value)),
                Err(e) => println!("rho undefined ({e})"),
            }
            println!("bounds {} {}", format_number(bounds.lo), format_number(bounds.hi));
            Ok(())
        }
        Command::Simulate { problem, input, out } => {
            let problem = load_problem(&problem)?;
            let signal = load_input(&input, problem.input_names().len())?;
            let mut model = problem.build_model();
            let trace = model.simulate(&signal, problem.step)?;
            match out {
                Some(path) => save_trace_csv(&path, &problem.output_names, &trace),
                None => write_trace_csv(io::stdout().lock(), &problem.output_names, &trace),
            }
        }
        Command::Serve { model } => {
            let mut model = builtin_model(&model)
                .ok_or_else(|| Error::Validation(format!("unknown model '{model}'")))?;
            let mut output = BufWriter::new(io::stdout().lock());
            falsify::serve(&mut model, &mut io::stdin().lock(), &mut output)?;
            output.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
