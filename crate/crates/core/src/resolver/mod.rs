//! Conflict detection between feature actions, weakening-based resolution
//! with a fallback when no admissible weakening exists, and the fixed
//! priority baseline.

mod feature;

pub use feature::{Activation, Comparison, FeatureSpec};

use std::fmt;

use thiserror::Error;

use crate::env::{ActionSequence, Actions, EnvError, State, TransitionSystem};
use crate::milp::{
    encode_resolution, solve, EncodingContext, MilpError, SolveLimits, SolveStats, Status,
};
use crate::stl::{Monitor, Signal, StlError};
use crate::syntax::ParseError;
use crate::weakstl::{instantiate, Polarity, Theta, WeakError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("action space `{space}`: payload has {got} entries, expected {expected}")]
    PayloadDimension { space: String, expected: usize, got: usize },
    #[error("no active feature")]
    NoActiveFeature,
    #[error("active feature `{0}` missing from the priority ordering")]
    NotRanked(String),
    #[error("feature file line {line}: {message}")]
    FeatureFile { line: usize, message: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("requirement of `{feature}` mentions `{var}`, which the model does not produce")]
    ForeignVariable { feature: String, var: String },
    #[error("solver: {0}")]
    Solver(#[from] MilpError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Weak(#[from] WeakError),
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Point in a shared continuous space, e.g. a velocity.
    Vector(Vec<f64>),
    /// Command in a space no other feature uses.
    Tag(String),
}

/// What one feature asks for at the current step. `command` is the same
/// request in terms of the environment model's actions, used when the
/// action is executed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureAction {
    pub feature: String,
    pub space: String,
    pub payload: Payload,
    pub active: bool,
    pub command: Option<Actions>,
}

impl FeatureAction {
    pub fn vector(feature: &str, space: &str, payload: Vec<f64>) -> Self {
        Self {
            feature: feature.to_string(),
            space: space.to_string(),
            payload: Payload::Vector(payload),
            active: true,
            command: None,
        }
    }

    pub fn tag(feature: &str, space: &str, tag: &str) -> Self {
        Self {
            feature: feature.to_string(),
            space: space.to_string(),
            payload: Payload::Tag(tag.to_string()),
            active: true,
            command: None,
        }
    }

    pub fn with_command(mut self, a: Actions) -> Self {
        self.command = Some(a);
        self
    }

    pub fn inactive(mut self) -> Self {
        self.active = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Detection {
    Consistent,
    /// Conflicting feature pairs, in input order.
    Conflict(Vec<(String, String)>),
}

/// Pairs of active actions in the same space whose vector payloads are more
/// than `tol` apart (Euclidean). Tags in a shared space conflict when they
/// differ. Actions in different spaces never conflict.
pub fn detect(actions: &[FeatureAction], tol: f64) -> Result<Detection, ResolveError> {
    let active: Vec<&FeatureAction> = actions.iter().filter(|a| a.active).collect();
    let mut dims: Vec<(&str, usize)> = Vec::new();
    for a in &active {
        if let Payload::Vector(v) = &a.payload {
            match dims.iter().find(|(s, _)| *s == a.space) {
                Some(&(_, d)) if d != v.len() => {
                    return Err(ResolveError::PayloadDimension { space: a.space.clone(), expected: d, got: v.len() })
                }
                Some(_) => {}
                None => dims.push((&a.space, v.len())),
            }
        }
    }
    let mut pairs = Vec::new();
    for (i, a) in active.iter().enumerate() {
        for b in &active[i + 1..] {
            if a.space != b.space {
                continue;
            }
            let clash = match (&a.payload, &b.payload) {
                (Payload::Vector(x), Payload::Vector(y)) => {
                    x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt() > tol
                }
                (Payload::Tag(x), Payload::Tag(y)) => x != y,
                _ => true,
            };
            if clash {
                pairs.push((a.feature.clone(), b.feature.clone()));
            }
        }
    }
    Ok(if pairs.is_empty() { Detection::Consistent } else { Detection::Conflict(pairs) })
}

/// The active action of the highest-ranked feature (earliest in `ordering`).
pub fn resolve_priority<'a>(
    actions: &'a [FeatureAction],
    ordering: &[String],
) -> Result<&'a FeatureAction, ResolveError> {
    let mut best: Option<(usize, &FeatureAction)> = None;
    for a in actions.iter().filter(|a| a.active) {
        let rank = ordering.iter().position(|f| *f == a.feature).ok_or_else(|| ResolveError::NotRanked(a.feature.clone()))?;
        if best.is_none_or(|(r, _)| rank < r) {
            best = Some((rank, a));
        }
    }
    best.map(|(_, a)| a).ok_or(ResolveError::NoActiveFeature)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolveOptions {
    pub horizon: usize,
    pub encoding: EncodingContext,
    pub limits: SolveLimits,
    /// Among plans of equal weakening prefer a first step close to these actions.
    pub prefer: Option<Actions>,
    /// Per-unit reward on each original requirement's predicted robustness,
    /// a secondary objective below the degree of weakening.
    pub original_weights: Option<[f64; 2]>,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        Self { horizon: 2, encoding: EncodingContext::default(), limits: SolveLimits::default(), prefer: None, original_weights: None }
    }
}

/// Weight of the action-preference term; well below the tie-break on theta.
pub const PREFERENCE_WEIGHT: f64 = 1e-6;

/// A jointly satisfying plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub actions: ActionSequence,
    pub theta: [Theta; 2],
    pub delta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    NoConflict,
    Weakened(Plan),
    /// No admissible weakening: the designated feature's own action runs.
    Fallback(FeatureAction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionKind {
    NoConflict,
    Weakened,
    Fallback,
}

impl fmt::Display for ResolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResolutionKind::NoConflict => "no_conflict",
            ResolutionKind::Weakened => "weakened",
            ResolutionKind::Fallback => "fallback",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub outcome: Outcome,
    pub stats: Option<SolveStats>,
}

impl Resolution {
    pub fn no_conflict() -> Self {
        Self { outcome: Outcome::NoConflict, stats: None }
    }

    pub fn kind(&self) -> ResolutionKind {
        match self.outcome {
            Outcome::NoConflict => ResolutionKind::NoConflict,
            Outcome::Weakened(_) => ResolutionKind::Weakened,
            Outcome::Fallback(_) => ResolutionKind::Fallback,
        }
    }

    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            Outcome::Weakened(p) => Some(p),
            _ => None,
        }
    }
}

fn check_vocabulary(f: &FeatureSpec, ts: &TransitionSystem) -> Result<(), ResolveError> {
    let known = ts.signal_variables();
    for v in f.requirement.strip().variables() {
        if !known.contains(&v) {
            return Err(ResolveError::ForeignVariable { feature: f.id.clone(), var: v });
        }
    }
    Ok(())
}

/// Finds the least weakening of both requirements that some action sequence
/// of `ts` satisfies jointly, evaluated at the last sample of `past`. When
/// none exists the `fallback` action is returned instead. Solver failures
/// are errors, never a silent fallback.
pub fn resolve(
    f1: &FeatureSpec,
    f2: &FeatureSpec,
    ts: &TransitionSystem,
    past: &Signal,
    fallback: &FeatureAction,
    opts: &ResolveOptions,
) -> Result<Resolution, ResolveError> {
    check_vocabulary(f1, ts)?;
    check_vocabulary(f2, ts)?;
    let mut enc = encode_resolution(&f1.requirement, &f2.requirement, ts, past, opts.horizon, &opts.encoding)?;
    if let Some(pref) = &opts.prefer {
        enc.prefer_first_actions(pref, PREFERENCE_WEIGHT)?;
    }
    if let Some(w) = opts.original_weights {
        enc.reward_original(w);
    }
    let sol = solve(&enc.problem, &opts.limits)?;
    let stats = Some(sol.stats);
    match sol.status {
        Status::Unsat => Ok(Resolution { outcome: Outcome::Fallback(fallback.clone()), stats }),
        Status::Unbounded => Err(MilpError::Encoding("resolution problem is unbounded".into()).into()),
        Status::Sat => {
            let missing = || MilpError::Numeric("solution lacks values".into());
            let actions = enc.actions(&sol).ok_or_else(missing)?;
            let t1 = enc.theta_phi.extract(&sol).ok_or_else(missing)?;
            let t2 = enc.theta_psi.extract(&sol).ok_or_else(missing)?;
            let (d1, d2) = enc.deltas(&sol).ok_or_else(missing)?;
            Ok(Resolution { outcome: Outcome::Weakened(Plan { actions, theta: [t1, t2], delta: [d1, d2] }), stats })
        }
    }
}

/// The past signal followed by the model's prediction under `actions`, in
/// the model's signal variables.
pub fn replay(ts: &TransitionSystem, past: &Signal, actions: &ActionSequence) -> Result<Signal, ResolveError> {
    let cols: Vec<usize> = ts
        .states()
        .iter()
        .map(|s| past.var_index(&s.name).ok_or_else(|| ResolveError::UnknownVariable(s.name.clone())))
        .collect::<Result<_, _>>()?;
    let state_at = |k: usize| State(cols.iter().map(|&c| past.samples()[k][c]).collect());
    let mut rows = Vec::new();
    for k in 0..past.last_step() {
        rows.push(ts.sample(&state_at(k))?);
    }
    let future = ts.predict(&state_at(past.last_step()), actions)?;
    rows.extend(future.samples().iter().cloned());
    Ok(Signal::new(ts.signal_variables(), rows)?)
}

/// Robustness of both weakened requirements when `plan` is replayed through
/// the model; both are at least the satisfaction margin for a sound plan.
pub fn replay_robustness(
    f1: &FeatureSpec,
    f2: &FeatureSpec,
    ts: &TransitionSystem,
    past: &Signal,
    plan: &Plan,
    ctx: &EncodingContext,
) -> Result<[f64; 2], ResolveError> {
    let sig = replay(ts, past, &plan.actions)?;
    let monitor = Monitor::new(ctx.big_m);
    let t = past.last_step();
    let mut out = [0.0; 2];
    for (i, f) in [f1, f2].into_iter().enumerate() {
        let weak = instantiate(&f.requirement, &plan.theta[i], Polarity::Weaken)?;
        out[i] = monitor.robustness(&weak, &sig, t)?;
    }
    Ok(out)
}
