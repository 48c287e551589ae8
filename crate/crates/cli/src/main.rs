mod dosyntax;
mod error;
mod report;
mod spec;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvi::analysis::{rank_components, treatment_effect_all};
use cvi::models::braess::{path_delays, PATH_NAMES};
use cvi::solvers::{integrate_pds, trajectory_residuals};
use cvi::{apply_all, check_properties, solve, Algorithm, CviError, Point, Problem, Solution, SolverConfig};

use error::{CliError, CliResult};
use report::{CheckDocument, CompareDocument, ComponentDocument, DirectionalDocument, PathDelay, SolveDocument};
use spec::{InterventionSpec, ProblemSpecFile, SolveFlags};

#[derive(Parser)]
#[command(name = "cvi", version, about = "Solve, intervene on and analyze monotone variational inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the model in a spec file.
    Solve {
        spec: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print a single JSON document.
        #[arg(long)]
        json: bool,
    },
    /// Apply interventions and solve the submodel.
    Intervene {
        spec: PathBuf,
        /// clamp:index=I,value=V | shift:index=I,delta=D | noise:component=C,stddev=S[,seed=N]
        #[arg(long = "do", required = true, allow_hyphen_values = true)]
        interventions: Vec<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        json: bool,
    },
    /// Compare the untreated and intervened solutions.
    Compare {
        spec: PathBuf,
        #[arg(long = "do", required = true, allow_hyphen_values = true)]
        interventions: Vec<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        json: bool,
    },
    /// Integrate the projected dynamics and write the trajectory as CSV.
    Pds {
        spec: PathBuf,
        #[arg(long = "do", allow_hyphen_values = true)]
        interventions: Vec<String>,
        /// Comma-separated start point; the origin when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report symmetry, monotonicity and the estimated constants.
    Check {
        spec: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SolverArgs {
    /// projection, extragradient or incremental
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Overrides the spec file and the CVI_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
        .map_err(|_| format!("expected projection, extragradient or incremental, found {s:?}"))
}

impl SolverArgs {
    fn flags(&self) -> SolveFlags {
        SolveFlags {
            algorithm: self.algorithm,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(Failure { output, error }) => {
            if let Some(output) = output {
                print!("{output}");
            }
            eprintln!("error: {error}");
            error.exit_code()
        }
    }
}

/// An error, plus any report that should still be printed.
struct Failure {
    output: Option<String>,
    error: CliError,
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            output: None,
            error: e.into(),
        }
    }
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Solve { spec, solver, json } => cmd_solve(&spec, &[], &solver.flags(), json, "solve"),
        Command::Intervene {
            spec,
            interventions,
            solver,
            json,
        } => cmd_solve(&spec, &interventions, &solver.flags(), json, "intervene"),
        Command::Compare {
            spec,
            interventions,
            solver,
            json,
        } => Ok(cmd_compare(&spec, &interventions, &solver.flags(), json)?),
        Command::Pds {
            spec,
            interventions,
            x0,
            delta,
            steps,
            out,
        } => Ok(cmd_pds(&spec, &interventions, x0, delta, steps, out.as_deref())?),
        Command::Check {
            spec,
            samples,
            seed,
            json,
        } => Ok(cmd_check(&spec, samples, seed, json)?),
    }
}

/// The spec's model with its own interventions applied, plus the parsed
/// `--do` list. Everything is validated before any solve.
struct Loaded {
    file: ProblemSpecFile,
    problem: Problem,
    /// Spec-file interventions first, then `--do` ones, in `--do` syntax.
    echo: Vec<String>,
    treatments: Vec<InterventionSpec>,
}

fn load(path: &Path, do_args: &[String]) -> CliResult<Loaded> {
    let file = ProblemSpecFile::read(path)?;
    let model = file.build_problem()?;
    let problem = apply_all(&model, &file.interventions(&model)?)?.intervened;
    let treatments = do_args.iter().map(|d| dosyntax::parse_do(d)).collect::<CliResult<Vec<_>>>()?;
    let echo = file
        .interventions
        .iter()
        .chain(&treatments)
        .map(ToString::to_string)
        .collect();
    Ok(Loaded {
        file,
        problem,
        echo,
        treatments,
    })
}

fn build_treatments(loaded: &Loaded) -> CliResult<Vec<cvi::Intervention>> {
    loaded.treatments.iter().map(|t| t.build(&loaded.problem)).collect()
}

fn labels(problem: &Problem) -> Vec<String> {
    (0..problem.dim()).map(|i| problem.label(i)).collect()
}

fn cmd_solve(path: &Path, do_args: &[String], flags: &SolveFlags, json: bool, command: &str) -> Result<String, Failure> {
    let loaded = load(path, do_args)?;
    let treatments = build_treatments(&loaded)?;
    let problem = apply_all(&loaded.problem, &treatments)?.intervened;
    let config = loaded.file.solver.config(flags)?;
    let solution = solve(&problem, &config)?;
    let path_delays = if loaded.file.is_braess() {
        let delays = path_delays(&problem, solution.point.as_vector())?;
        Some(
            PATH_NAMES
                .iter()
                .zip(delays)
                .map(|(p, delay)| PathDelay {
                    path: p.to_string(),
                    delay,
                })
                .collect(),
        )
    } else {
        None
    };
    let doc = SolveDocument {
        command: command.to_string(),
        model: loaded.file.model_name().to_string(),
        interventions: loaded.echo,
        algorithm: config.algorithm.to_string(),
        seed: config.seed,
        converged: solution.converged,
        iterations: solution.iterations,
        residual: solution.residual,
        labels: labels(&problem),
        point: solution.point.to_vec(),
        path_delays,
    };
    let output = if json {
        report::to_json(&doc) + "\n"
    } else {
        report::render_solve(&doc)
    };
    if solution.converged {
        Ok(output)
    } else {
        Err(Failure {
            output: Some(output),
            error: not_converged(&solution, &config),
        })
    }
}

fn not_converged(solution: &Solution, config: &SolverConfig) -> CliError {
    CliError::NotConverged(format!(
        "{} did not reach tolerance {:e} within {} iterations (residual {:e})",
        config.algorithm, config.options.tol, solution.iterations, solution.residual
    ))
}

fn solve_or_fail(problem: &Problem, config: &SolverConfig, which: &str) -> CliResult<Solution> {
    let solution = solve(problem, config)?;
    if !solution.converged {
        return Err(CliError::NotConverged(format!(
            "{which} solve: {}",
            not_converged(&solution, config)
        )));
    }
    Ok(solution)
}

fn cmd_compare(path: &Path, do_args: &[String], flags: &SolveFlags, json: bool) -> CliResult<String> {
    let loaded = load(path, do_args)?;
    let treatments = build_treatments(&loaded)?;
    let base = &loaded.problem;
    let treated_problem = apply_all(base, &treatments)?.intervened;
    let config = loaded.file.solver.config(flags)?;

    let effect = if treatments.iter().all(|t| t.is_mapping_type()) {
        match treatment_effect_all(base, &treatments, &config) {
            Ok(report) => Ok(report),
            Err(CviError::NotStronglyMonotone { mu }) => Err(format!(
                "the mapping is not strongly monotone (mu = {mu:.6}), so no sensitivity bound is available; showing both solutions"
            )),
            Err(e) => return Err(e.into()),
        }
    } else {
        Err("clamps change the feasible set, so the sensitivity bound and directional analysis do not apply; showing both solutions".to_string())
    };

    let mut doc = CompareDocument {
        command: "compare".into(),
        model: loaded.file.model_name().into(),
        interventions: loaded.echo.clone(),
        algorithm: config.algorithm.to_string(),
        seed: config.seed,
        mode: String::new(),
        labels: labels(base),
        untreated: Vec::new(),
        treated: Vec::new(),
        difference: Vec::new(),
        effect_norm: 0.0,
        bound: None,
        mu: None,
        mu_certified: None,
        bound_satisfied: None,
        directional: None,
        components: None,
        note: None,
        warnings: Vec::new(),
    };
    let (x0, x1) = match effect {
        Ok(report) => {
            let localization = rank_components(base.mapping(), &treatments, report);
            let report = localization.report;
            doc.mode = "treatment_effect".into();
            doc.bound = Some(report.bound);
            doc.mu = Some(report.mu_used);
            doc.mu_certified = Some(report.mu_certified);
            doc.bound_satisfied = Some(report.bound_satisfied);
            doc.directional = Some(DirectionalDocument {
                first: report.directional.first,
                second: report.directional.second,
                first_negative: report.directional.first_negative,
                second_nonpositive: report.directional.second_nonpositive,
            });
            doc.components = Some(
                localization
                    .ranked
                    .iter()
                    .map(|c| ComponentDocument {
                        component: c.component,
                        contribution: c.contribution,
                        treated: c.treated,
                    })
                    .collect(),
            );
            doc.warnings = report.warnings;
            (report.x0, report.x1)
        }
        Err(note) => {
            doc.mode = "solution_diff".into();
            doc.note = Some(note);
            let x0 = solve_or_fail(base, &config, "untreated")?.point;
            let x1 = solve_or_fail(&treated_problem, &config, "treated")?.point;
            (x0, x1)
        }
    };
    doc.difference = x1.iter().zip(x0.iter()).map(|(a, b)| a - b).collect();
    doc.effect_norm = x1.distance(&x0);
    doc.untreated = x0.to_vec();
    doc.treated = x1.to_vec();
    Ok(if json {
        report::to_json(&doc) + "\n"
    } else {
        report::render_compare(&doc)
    })
}

fn cmd_pds(
    path: &Path,
    do_args: &[String],
    x0: Option<Vec<f64>>,
    delta: f64,
    steps: usize,
    out: Option<&Path>,
) -> CliResult<String> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(CliError::Input(format!("--delta must be positive, got {delta}")));
    }
    let loaded = load(path, do_args)?;
    let treatments = build_treatments(&loaded)?;
    let problem = apply_all(&loaded.problem, &treatments)?.intervened;
    let x0 = match x0 {
        Some(v) if v.len() != problem.dim() => {
            return Err(CliError::Input(format!(
                "--x0 has {} entries, the model has {} variables",
                v.len(),
                problem.dim()
            )))
        }
        Some(v) => Point::new(v)?,
        None => Point::zeros(problem.dim()),
    };
    // check the destination before integrating
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    let trajectory = integrate_pds(&problem, &x0, delta, steps)?;
    let residuals = trajectory_residuals(&problem, &trajectory, 1.0)?;
    let write_err = |e: std::io::Error| CliError::Input(format!("writing trajectory: {e}"));
    let header: Vec<String> = (1..=problem.dim()).map(|i| format!("x_{i}")).collect();
    writeln!(sink, "step,{},residual", header.join(",")).map_err(write_err)?;
    for (step, (x, r)) in trajectory.iter().zip(&residuals).enumerate() {
        let values: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        writeln!(sink, "{step},{},{r}", values.join(",")).map_err(write_err)?;
    }
    sink.flush().map_err(write_err)?;
    Ok(match out {
        Some(p) => format!("wrote {} rows to {}\n", trajectory.len(), p.display()),
        None => String::new(),
    })
}

fn cmd_check(path: &Path, samples: usize, seed: Option<u64>, json: bool) -> CliResult<String> {
    let loaded = load(path, &[])?;
    let problem = &loaded.problem;
    let seed = match seed.or(loaded.file.solver.seed) {
        Some(s) => s,
        None => spec::env_seed()?.unwrap_or(0),
    };
    let r = check_properties(problem.mapping(), problem.set(), samples, seed)?;
    // exact modulus when available: sampling cannot certify a zero modulus
    let mu = r.certified.map_or(r.mu_estimate, |c| c.mu);
    let doc = CheckDocument {
        command: "check".into(),
        model: loaded.file.model_name().into(),
        dim: problem.dim(),
        symmetric: r.symmetric,
        positive_definite: r.positive_definite,
        monotone: r.monotone,
        mu_hat: r.mu_estimate,
        lipschitz_hat: r.lipschitz_estimate,
        mu_certified: r.certified.map(|c| c.mu),
        lipschitz_certified: r.certified.map(|c| c.lipschitz),
        strongly_monotone: r.monotone && mu > 0.0,
        optimization_equivalent: r.optimization_equivalent(),
        samples: r.samples,
        seed: r.seed,
    };
    Ok(if json {
        report::to_json(&doc) + "\n"
    } else {
        report::render_check(&doc)
    })
}
