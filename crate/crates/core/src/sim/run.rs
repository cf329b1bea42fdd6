use std::time::Duration;

use crate::env::Actions;
use crate::milp::EncodingContext;
use crate::resolver::{
    detect, replay_robustness, resolve, resolve_priority, Detection, FeatureAction, FeatureSpec, Outcome,
    ResolveOptions,
};
use crate::stl::{Monitor, Signal};
use crate::weakstl::minimal_requirement;

use super::features::{idle_action, native_action, normalization, scenario_features};
use super::scenario::{Mode, ScenarioConfig};
use super::world::{Ending, World};
use super::SimError;

/// Where the executed action of a step came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Idle,
    /// Only this feature was active, or the active actions agreed.
    Feature(String),
    Weakened,
    Fallback(String),
    Priority(String),
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::Idle => f.write_str("idle"),
            Decision::Feature(x) => write!(f, "feature:{x}"),
            Decision::Weakened => f.write_str("weakened"),
            Decision::Fallback(x) => write!(f, "fallback:{x}"),
            Decision::Priority(x) => write!(f, "priority:{x}"),
        }
    }
}

/// Executed run. `signal` has one more sample than `decisions`/`executed`;
/// `active[t]` holds the activation of both features at sample `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub features: [String; 2],
    pub signal: Signal,
    pub active: Vec<[bool; 2]>,
    pub decisions: Vec<Decision>,
    pub executed: Vec<Actions>,
    /// Native actions of both features per step, active or not.
    pub requested: Vec<[FeatureAction; 2]>,
}

impl Trace {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["step".to_string()];
        header.extend(self.signal.variables().iter().cloned());
        header.extend(self.features.iter().map(|f| format!("active_{f}")));
        header.push("decision".into());
        out.write_record(&header)?;
        for (t, row) in self.signal.samples().iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            rec.extend(self.active[t].iter().map(|&a| u8::from(a).to_string()));
            rec.push(self.decisions.get(t).map_or(String::new(), |d| d.to_string()));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| SimError::Io(e.to_string()))?;
        Ok(())
    }
}

/// Robustness of one feature's original requirement over the interaction window.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMetrics {
    pub feature: String,
    pub series: Vec<f64>,
    pub average: f64,
    pub minimum: f64,
    pub scale: f64,
    pub normalized_average: f64,
    pub normalized_minimum: f64,
    /// Lowest robustness of the minimal (fully weakened) requirement.
    pub minimal_minimum: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverMetrics {
    pub resolutions: usize,
    pub weakened: usize,
    pub unsat: usize,
    pub nodes: usize,
    pub total_time: Duration,
    pub max_time: Duration,
    /// SAT plans whose replay through the model missed a weakened requirement.
    pub closure_failures: usize,
    pub closure_min: Option<f64>,
}

impl SolverMetrics {
    pub fn mean_time(&self) -> Option<Duration> {
        (self.resolutions > 0).then(|| self.total_time / self.resolutions as u32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub ending: Ending,
    pub steps: usize,
    /// Half-open step range `[start, end)`; `None` when the features never overlapped.
    pub window: Option<(usize, usize)>,
    pub features: Vec<FeatureMetrics>,
    pub overall: Option<f64>,
    pub solver: SolverMetrics,
}

impl RunMetrics {
    pub fn interaction(&self) -> bool {
        self.window.is_some()
    }
}

/// Total reward per normalized unit of original robustness. Small enough
/// that it never outweighs one unit of weakening.
pub const ORIGINAL_WEIGHT: f64 = 1e-5;

fn options(cfg: &ScenarioConfig, specs: &[FeatureSpec; 2], prefer: Option<Actions>) -> ResolveOptions {
    let w = |s: &FeatureSpec| ORIGINAL_WEIGHT / normalization(s, cfg);
    ResolveOptions {
        horizon: cfg.horizon,
        prefer,
        original_weights: Some([w(&specs[0]), w(&specs[1])]),
        ..ResolveOptions::default()
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(Trace, RunMetrics), SimError> {
    let mut world = World::new(cfg)?;
    let specs = scenario_features(cfg);
    let ids = [specs[0].id.clone(), specs[1].id.clone()];
    let mut rows = vec![world.sample()];
    let mut active = Vec::new();
    let mut decisions = Vec::new();
    let mut executed = Vec::new();
    let mut requested = Vec::new();
    let mut solver = SolverMetrics::default();
    let ctx = EncodingContext::default();

    while world.ending().is_none() {
        let acts = [native_action(&specs[0], &world), native_action(&specs[1], &world)];
        active.push([acts[0].active, acts[1].active]);
        let command = |a: &FeatureAction| a.command.clone().expect("built-in features carry commands");
        let on: Vec<&FeatureAction> = acts.iter().filter(|a| a.active).collect();
        let (decision, action) = match on.len() {
            0 => (Decision::Idle, idle_action(&world)),
            1 => (Decision::Feature(on[0].feature.clone()), command(on[0])),
            _ => match (&cfg.mode, detect(&acts, cfg.tolerance)?) {
                (Mode::Priority { ordering }, _) => {
                    let top = resolve_priority(&acts, ordering)?;
                    (Decision::Priority(top.feature.clone()), command(top))
                }
                (Mode::Weakening { fallback }, Detection::Consistent) => {
                    let fb = acts.iter().find(|a| a.feature == *fallback).expect("validated fallback");
                    (Decision::Feature(fb.feature.clone()), command(fb))
                }
                (Mode::Weakening { fallback }, Detection::Conflict(_)) => {
                    let fb = acts.iter().find(|a| a.feature == *fallback).expect("validated fallback");
                    let past = Signal::new(world.variables(), vec![world.sample()])?;
                    let r = resolve(&specs[0], &specs[1], world.model(), &past, fb, &options(cfg, &specs, fb.command.clone()))?;
                    solver.resolutions += 1;
                    if let Some(st) = r.stats {
                        solver.nodes += st.nodes;
                        solver.total_time += st.wall_time;
                        solver.max_time = solver.max_time.max(st.wall_time);
                    }
                    match r.outcome {
                        Outcome::Weakened(plan) => {
                            solver.weakened += 1;
                            let rho = replay_robustness(&specs[0], &specs[1], world.model(), &past, &plan, &ctx)?;
                            let worst = rho[0].min(rho[1]);
                            if worst < ctx.epsilon_sat - 1e-6 {
                                solver.closure_failures += 1;
                            }
                            solver.closure_min = Some(solver.closure_min.map_or(worst, |m: f64| m.min(worst)));
                            (Decision::Weakened, plan.actions.0[0].clone())
                        }
                        Outcome::Fallback(a) => {
                            solver.unsat += 1;
                            (Decision::Fallback(a.feature.clone()), command(&a))
                        }
                        Outcome::NoConflict => unreachable!("resolve never reports no conflict"),
                    }
                }
            },
        };
        world.apply(&action)?;
        rows.push(world.sample());
        decisions.push(decision);
        executed.push(action);
        requested.push(acts);
    }
    let last = [
        native_action(&specs[0], &world).active,
        native_action(&specs[1], &world).active,
    ];
    active.push(last);
    let signal = Signal::new(world.variables(), rows)?;
    let trace = Trace { features: ids, signal, active, decisions, executed, requested };
    let metrics = measure(cfg, &trace, world.ending().expect("loop ends with an ending"), solver)?;
    Ok((trace, metrics))
}

/// First step where both features are active, up to the first later step
/// where neither is.
pub fn interaction_window(active: &[[bool; 2]]) -> Option<(usize, usize)> {
    let start = active.iter().position(|a| a[0] && a[1])?;
    let end = active[start..].iter().position(|a| !a[0] && !a[1]).map_or(active.len(), |k| start + k);
    Some((start, end))
}

fn padded(signal: &Signal, extra: usize) -> Result<Signal, SimError> {
    let mut rows = signal.samples().to_vec();
    let last = rows.last().cloned().expect("signals are non-empty");
    rows.extend(std::iter::repeat_n(last, extra));
    Ok(Signal::new(signal.variables().to_vec(), rows)?)
}

fn measure(cfg: &ScenarioConfig, trace: &Trace, ending: Ending, solver: SolverMetrics) -> Result<RunMetrics, SimError> {
    let specs = scenario_features(cfg);
    let window = interaction_window(&trace.active);
    let mut features = Vec::new();
    if let Some((start, end)) = window {
        let h = specs.iter().map(|s| s.requirement.max_horizon()).max().unwrap_or(0);
        let sig = padded(&trace.signal, h)?;
        let monitor = Monitor::default();
        for s in &specs {
            let original = s.requirement.strip();
            let minimal = minimal_requirement(&s.requirement)?;
            let series = (start..end).map(|t| monitor.robustness(&original, &sig, t)).collect::<Result<Vec<_>, _>>()?;
            let minimal_minimum = (start..end)
                .map(|t| monitor.robustness(&minimal, &sig, t))
                .try_fold(f64::INFINITY, |m, r| r.map(|r| m.min(r)))?;
            let average = series.iter().sum::<f64>() / series.len() as f64;
            let minimum = series.iter().copied().fold(f64::INFINITY, f64::min);
            let scale = normalization(s, cfg);
            features.push(FeatureMetrics {
                feature: s.id.clone(),
                series,
                average,
                minimum,
                scale,
                normalized_average: average / scale,
                normalized_minimum: minimum / scale,
                minimal_minimum,
            });
        }
    }
    let overall = (!features.is_empty())
        .then(|| features.iter().map(|f| f.normalized_average).sum::<f64>() / features.len() as f64);
    Ok(RunMetrics { ending, steps: trace.decisions.len(), window, features, overall, solver })
}
