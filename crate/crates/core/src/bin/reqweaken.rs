use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use reqweaken::env::{parse_model, TransitionSystem};
use reqweaken::milp::{encode_resolution, export_lp, EncodingContext, MilpError};
use reqweaken::resolver::{resolve, FeatureAction, FeatureSpec, Outcome, ResolveError, ResolveOptions};
use reqweaken::sim::{run_experiment, run_scenario, CaseStudy, ExperimentOptions, Mode, ScenarioConfig, SimError};
use reqweaken::stl::{Monitor, Signal, StlError};
use reqweaken::weakstl::WeakError;

/// Feature-interaction resolution by minimal requirement weakening.
#[derive(Parser)]
#[command(name = "reqweaken", version)]
struct Cli {
    /// Master seed for scenario generation.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Robustness of an STL formula on a CSV signal.
    Monitor {
        formula: PathBuf,
        signal: PathBuf,
        #[arg(long, default_value_t = 0)]
        t: usize,
        #[arg(long)]
        json: bool,
    },
    /// Resolve a conflict between two features by weakening their requirements.
    Resolve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Feature whose own action runs when no weakening is admissible.
        #[arg(long)]
        fallback: String,
        #[arg(long)]
        json: bool,
    },
    /// Write the resolution MILP in LP format.
    Encode {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run one scenario file.
    Simulate {
        scenario: PathBuf,
        /// Override the scenario's resolution mode, e.g. `priority(land>deliver)`.
        #[arg(long)]
        mode: Option<String>,
        /// Write the full trace here as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run generated scenarios under every resolution mode.
    Experiment {
        /// `organ_delivery`, `surveillance` or `all`.
        #[arg(default_value = "all")]
        case: String,
        #[arg(default_value_t = 25)]
        count: usize,
        /// Comma-separated families (`weakening`, `priority`) or exact modes.
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<String>>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads (default: one per CPU).
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct ProblemArgs {
    feature1: PathBuf,
    feature2: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// CSV of the observed signal; its last row is the current step.
    #[arg(long)]
    past: PathBuf,
    #[arg(long, short = 'n', default_value_t = 2)]
    horizon: usize,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 4,
        }
    }
}

impl From<ResolveError> for Failure {
    fn from(e: ResolveError) -> Self {
        match e {
            ResolveError::Solver(MilpError::Numeric(_) | MilpError::LimitWithoutIncumbent { .. }) => {
                Failure::Internal(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Resolve(r) => r.into(),
            SimError::Io(_) | SimError::Csv(_) | SimError::Finished => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<MilpError> for Failure {
    fn from(e: MilpError) -> Self {
        ResolveError::from(e).into()
    }
}

impl From<StlError> for Failure {
    fn from(e: StlError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<WeakError> for Failure {
    fn from(e: WeakError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_signal(path: &Path) -> Result<Signal, Failure> {
    let f = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Signal::read_csv(BufReader::new(f))?)
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

struct Problem {
    f1: FeatureSpec,
    f2: FeatureSpec,
    model: TransitionSystem,
    past: Signal,
    horizon: usize,
}

fn load(p: &ProblemArgs) -> Result<Problem, Failure> {
    let feature = |path: &Path| FeatureSpec::parse(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())));
    Ok(Problem {
        f1: feature(&p.feature1)?,
        f2: feature(&p.feature2)?,
        model: parse_model(&read(&p.model)?).map_err(|e| Failure::Input(format!("{}: {e}", p.model.display())))?,
        past: read_signal(&p.past)?,
        horizon: p.horizon,
    })
}

fn monitor(formula: &Path, signal: &Path, t: usize, as_json: bool) -> Result<u8, Failure> {
    let phi = reqweaken::parse_stl(&read(formula)?)?;
    let s = read_signal(signal)?;
    let rho = Monitor::default().robustness(&phi, &s, t)?;
    if as_json {
        println!("{}", json!({ "formula": phi.to_string(), "t": t, "robustness": rho, "satisfied": rho >= 0.0 }));
    } else {
        println!("{rho:?}");
    }
    Ok(0)
}

fn resolve_cmd(p: &ProblemArgs, fallback: &str, as_json: bool) -> Result<u8, Failure> {
    let pr = load(p)?;
    let fb_spec = [&pr.f1, &pr.f2]
        .into_iter()
        .find(|f| f.id == fallback)
        .ok_or_else(|| Failure::Input(format!("fallback `{fallback}` is neither feature")))?;
    let fb = FeatureAction::tag(&fb_spec.id, &fb_spec.space, "native");
    let opts = ResolveOptions { horizon: pr.horizon, ..ResolveOptions::default() };
    let r = resolve(&pr.f1, &pr.f2, &pr.model, &pr.past, &fb, &opts)?;
    let names: Vec<String> = pr.model.actions().iter().map(|a| a.name.clone()).collect();
    let ids = [&pr.f1.id, &pr.f2.id];
    if as_json {
        let mut out = json!({ "kind": r.kind().to_string() });
        match &r.outcome {
            Outcome::Weakened(plan) => {
                out["theta"] = json!({ ids[0].as_str(): plan.theta[0].values(), ids[1].as_str(): plan.theta[1].values() });
                out["delta"] = json!({ ids[0].as_str(): plan.delta[0], ids[1].as_str(): plan.delta[1] });
                let steps: Vec<serde_json::Value> = plan
                    .actions
                    .0
                    .iter()
                    .map(|a| names.iter().cloned().zip(a.0.iter().map(|&v| json!(round(v)))).collect::<serde_json::Map<_, _>>().into())
                    .collect();
                out["actions"] = steps.into();
            }
            Outcome::Fallback(a) => out["fallback"] = json!(a.feature),
            Outcome::NoConflict => {}
        }
        println!("{out}");
    } else {
        println!("kind = {}", r.kind());
        match &r.outcome {
            Outcome::Weakened(plan) => {
                for i in 0..2 {
                    println!("theta.{} = {:?}", ids[i], plan.theta[i].values());
                }
                for i in 0..2 {
                    println!("delta.{} = {}", ids[i], round(plan.delta[i]));
                }
                for (k, a) in plan.actions.0.iter().enumerate() {
                    let cells: Vec<String> = names.iter().zip(&a.0).map(|(n, v)| format!("{n}={}", round(*v))).collect();
                    println!("action[{k}] = {}", cells.join(" "));
                }
            }
            Outcome::Fallback(a) => println!("fallback = {}", a.feature),
            Outcome::NoConflict => {}
        }
    }
    Ok(if matches!(r.outcome, Outcome::Fallback(_)) { 3 } else { 0 })
}

/// Rounds away solver noise below 1e-9 for display.
fn round(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn encode_cmd(p: &ProblemArgs, out: &Path) -> Result<u8, Failure> {
    let pr = load(p)?;
    let enc = encode_resolution(&pr.f1.requirement, &pr.f2.requirement, &pr.model, &pr.past, pr.horizon, &EncodingContext::default())
        .map_err(ResolveError::from)?;
    create(out)?
        .write_all(export_lp(&enc.problem).as_bytes())
        .map_err(|e| Failure::Internal(e.to_string()))?;
    eprintln!(
        "wrote {} ({} variables, {} constraints)",
        out.display(),
        enc.problem.variables().len(),
        enc.problem.constraints().len()
    );
    Ok(0)
}

fn simulate(path: &Path, mode: Option<&str>, trace_out: Option<&Path>, as_json: bool) -> Result<u8, Failure> {
    let mut cfg = ScenarioConfig::parse(&read(path)?)?;
    if let Some(m) = mode {
        cfg = cfg.with_mode(m.parse::<Mode>()?);
        cfg.validate()?;
    }
    let (trace, m) = run_scenario(&cfg)?;
    if let Some(p) = trace_out {
        trace.write_csv(create(p)?)?;
    }
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    if as_json {
        let features: Vec<serde_json::Value> = m
            .features
            .iter()
            .map(|f| {
                json!({ "feature": f.feature, "average": f.average, "minimum": f.minimum,
                        "normalized_average": f.normalized_average, "minimal_minimum": f.minimal_minimum })
            })
            .collect();
        println!(
            "{}",
            json!({
                "mode": cfg.mode.to_string(), "ending": m.ending.to_string(), "steps": m.steps,
                "window": m.window.map(|w| [w.0, w.1]), "features": features, "overall": m.overall,
                "resolutions": m.solver.resolutions, "weakened": m.solver.weakened, "unsat": m.solver.unsat,
                "closure_failures": m.solver.closure_failures,
                "mean_solve_ms": m.solver.mean_time().map(ms),
            })
        );
    } else {
        println!("mode = {}", cfg.mode);
        println!("ending = {}", m.ending);
        println!("steps = {}", m.steps);
        match m.window {
            Some((a, b)) => println!("window = {a}..{b}"),
            None => println!("window = none"),
        }
        for f in &m.features {
            println!("robustness.{} = avg {:.4} min {:.4} normalized {:.4}", f.feature, f.average, f.minimum, f.normalized_average);
        }
        if let Some(o) = m.overall {
            println!("overall = {o:.4}");
        }
        println!("resolutions = {} (weakened {}, unsat {})", m.solver.resolutions, m.solver.weakened, m.solver.unsat);
        if let Some(t) = m.solver.mean_time() {
            println!("mean_solve_ms = {:.3}", ms(t));
        }
    }
    Ok(0)
}

fn experiment(case: &str, count: usize, seed: u64, modes: Option<Vec<String>>, out: &Path, workers: Option<usize>) -> Result<u8, Failure> {
    let cases = match case {
        "all" => vec![CaseStudy::OrganDelivery, CaseStudy::Surveillance],
        c => vec![c.parse::<CaseStudy>()?],
    };
    if let Some(sel) = &modes {
        for s in sel {
            if s != "weakening" && s != "priority" {
                s.parse::<Mode>()?;
            }
        }
    }
    if count == 0 {
        return Err(Failure::Input("count must be at least 1".into()));
    }
    let report = run_experiment(&ExperimentOptions { cases, count, seed, workers, modes })?;
    report.write_dir(out)?;
    print!("{}", report.render_summary());
    eprintln!("wrote {} rows to {}", report.rows.len(), out.join("results.csv").display());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Monitor { formula, signal, t, json } => monitor(formula, signal, *t, *json),
        Command::Resolve { problem, fallback, json } => resolve_cmd(problem, fallback, *json),
        Command::Encode { problem, out } => encode_cmd(problem, out),
        Command::Simulate { scenario, mode, trace, json } => simulate(scenario, mode.as_deref(), trace.as_deref(), *json),
        Command::Experiment { case, count, modes, out, workers } => {
            experiment(case, *count, cli.seed, modes.clone(), out, *workers)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let (Failure::Input(m) | Failure::Internal(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
