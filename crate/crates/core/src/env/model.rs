use std::collections::HashMap;
use std::fmt;

use crate::stl::{AffineExpr, Signal};

use super::EnvError;

const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVar {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionVar {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub kind: ActionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpdateRule {
    Affine(AffineExpr),
    /// `if guard then when_set else when_clear`, guard a binary action.
    Switched { guard: String, when_set: AffineExpr, when_clear: AffineExpr },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Value(f64),
    Range(f64, f64),
}

/// Derived signal variable, recomputed from the state at every step.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputExpr {
    Affine(AffineExpr),
    Min(Vec<AffineExpr>),
    Max(Vec<AffineExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub expr: OutputExpr,
}

/// Per-step linear restriction on actions: `expr <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionConstraint {
    pub expr: AffineExpr,
    pub bound: f64,
}

/// State vector, ordered as the model's state variables.
#[derive(Debug, Clone, PartialEq)]
pub struct State(pub Vec<f64>);

/// One step of action values, ordered as the model's action variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Actions(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionSequence(pub Vec<Actions>);

impl ActionSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<&Actions> {
        self.0.first()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: State,
    /// State variables whose update left the declared bounds.
    pub clamped: Vec<String>,
}

/// Affine discrete-time transition system with optional derived outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSystem {
    states: Vec<StateVar>,
    actions: Vec<ActionVar>,
    updates: Vec<UpdateRule>,
    init: Vec<Option<Init>>,
    outputs: Vec<Output>,
    constraints: Vec<ActionConstraint>,
    state_index: HashMap<String, usize>,
    action_index: HashMap<String, usize>,
}

#[derive(Debug, Default)]
pub struct ModelBuilder {
    states: Vec<StateVar>,
    actions: Vec<ActionVar>,
    updates: Vec<(String, UpdateRule)>,
    init: Vec<(String, Init)>,
    outputs: Vec<Output>,
    constraints: Vec<ActionConstraint>,
}

impl ModelBuilder {
    pub fn state(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.states.push(StateVar { name: name.into(), lo, hi });
        self
    }

    pub fn action(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.actions.push(ActionVar { name: name.into(), lo, hi, kind: ActionKind::Continuous });
        self
    }

    pub fn binary_action(mut self, name: &str) -> Self {
        self.actions.push(ActionVar { name: name.into(), lo: 0.0, hi: 1.0, kind: ActionKind::Binary });
        self
    }

    pub fn update(mut self, name: &str, rule: UpdateRule) -> Self {
        self.updates.push((name.into(), rule));
        self
    }

    pub fn next(self, name: &str, expr: AffineExpr) -> Self {
        self.update(name, UpdateRule::Affine(expr))
    }

    pub fn switched(self, name: &str, guard: &str, when_set: AffineExpr, when_clear: AffineExpr) -> Self {
        self.update(name, UpdateRule::Switched { guard: guard.into(), when_set, when_clear })
    }

    pub fn init(mut self, name: &str, init: Init) -> Self {
        self.init.push((name.into(), init));
        self
    }

    pub fn output(mut self, name: &str, expr: OutputExpr) -> Self {
        self.outputs.push(Output { name: name.into(), expr });
        self
    }

    pub fn constraint(mut self, expr: AffineExpr, bound: f64) -> Self {
        let c = expr.constant_term();
        self.constraints.push(ActionConstraint { expr: expr.offset(-c), bound: bound - c });
        self
    }

    pub fn build(self) -> Result<TransitionSystem, EnvError> {
        let mut state_index = HashMap::new();
        let mut action_index = HashMap::new();
        let mut seen = std::collections::HashSet::new();
        for (i, s) in self.states.iter().enumerate() {
            if !seen.insert(s.name.clone()) {
                return Err(EnvError::Duplicate(s.name.clone()));
            }
            check_bounds(&s.name, s.lo, s.hi)?;
            state_index.insert(s.name.clone(), i);
        }
        for (i, a) in self.actions.iter().enumerate() {
            if !seen.insert(a.name.clone()) {
                return Err(EnvError::Duplicate(a.name.clone()));
            }
            check_bounds(&a.name, a.lo, a.hi)?;
            action_index.insert(a.name.clone(), i);
        }
        for o in &self.outputs {
            if !seen.insert(o.name.clone()) {
                return Err(EnvError::Duplicate(o.name.clone()));
            }
        }

        let mut updates: Vec<Option<UpdateRule>> = vec![None; self.states.len()];
        let known_step = |n: &str| state_index.contains_key(n) || action_index.contains_key(n);
        for (name, rule) in self.updates {
            let i = *state_index.get(&name).ok_or_else(|| EnvError::Undeclared(name.clone()))?;
            if updates[i].is_some() {
                return Err(EnvError::DuplicateUpdate(name));
            }
            let exprs: Vec<&AffineExpr> = match &rule {
                UpdateRule::Affine(e) => vec![e],
                UpdateRule::Switched { guard, when_set, when_clear } => {
                    match action_index.get(guard) {
                        Some(&g) if self.actions[g].kind == ActionKind::Binary => {}
                        Some(_) => return Err(EnvError::GuardNotBinary(guard.clone())),
                        None => return Err(EnvError::Undeclared(guard.clone())),
                    }
                    vec![when_set, when_clear]
                }
            };
            for e in exprs {
                if let Some(v) = e.variables().find(|v| !known_step(v)) {
                    return Err(EnvError::Undeclared(v.to_string()));
                }
            }
            updates[i] = Some(rule);
        }
        let updates = updates
            .into_iter()
            .enumerate()
            .map(|(i, u)| u.ok_or_else(|| EnvError::MissingUpdate(self.states[i].name.clone())))
            .collect::<Result<Vec<_>, _>>()?;

        let mut init = vec![None; self.states.len()];
        for (name, v) in self.init {
            let i = *state_index.get(&name).ok_or_else(|| EnvError::Undeclared(name.clone()))?;
            let s = &self.states[i];
            let (lo, hi) = match v {
                Init::Value(x) => (x, x),
                Init::Range(a, b) => (a, b),
            };
            if lo > hi || lo < s.lo || hi > s.hi {
                return Err(EnvError::InitOutOfBounds(name));
            }
            init[i] = Some(v);
        }

        let mut visible: Vec<&str> = self.states.iter().map(|s| s.name.as_str()).collect();
        for o in &self.outputs {
            let exprs: Vec<&AffineExpr> = match &o.expr {
                OutputExpr::Affine(e) => vec![e],
                OutputExpr::Min(es) | OutputExpr::Max(es) => {
                    if es.is_empty() {
                        return Err(EnvError::EmptySelection(o.name.clone()));
                    }
                    es.iter().collect()
                }
            };
            for e in exprs {
                if let Some(v) = e.variables().find(|v| !visible.contains(v)) {
                    return Err(EnvError::Undeclared(v.to_string()));
                }
            }
            visible.push(&o.name);
        }
        for c in &self.constraints {
            if let Some(v) = c.expr.variables().find(|v| !known_step(v)) {
                return Err(EnvError::Undeclared(v.to_string()));
            }
            if !c.expr.variables().any(|v| action_index.contains_key(v)) {
                return Err(EnvError::StateOnlyConstraint(c.expr.to_string()));
            }
        }

        Ok(TransitionSystem {
            states: self.states,
            actions: self.actions,
            updates,
            init,
            outputs: self.outputs,
            constraints: self.constraints,
            state_index,
            action_index,
        })
    }
}

fn check_bounds(name: &str, lo: f64, hi: f64) -> Result<(), EnvError> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(EnvError::InvalidBounds(name.into()))
    }
}

impl TransitionSystem {
    pub fn builder() -> ModelBuilder {
        ModelBuilder::default()
    }

    pub fn states(&self) -> &[StateVar] {
        &self.states
    }

    pub fn actions(&self) -> &[ActionVar] {
        &self.actions
    }

    pub fn updates(&self) -> &[UpdateRule] {
        &self.updates
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn constraints(&self) -> &[ActionConstraint] {
        &self.constraints
    }

    pub fn init(&self) -> &[Option<Init>] {
        &self.init
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_index.get(name).copied()
    }

    /// State and output names, in signal column order.
    pub fn signal_variables(&self) -> Vec<String> {
        self.states.iter().map(|s| s.name.clone()).chain(self.outputs.iter().map(|o| o.name.clone())).collect()
    }

    /// Initial state from point inits; ranges take their midpoint.
    pub fn initial_state(&self) -> Result<State, EnvError> {
        self.states
            .iter()
            .zip(&self.init)
            .map(|(s, i)| match i {
                Some(Init::Value(v)) => Ok(*v),
                Some(Init::Range(a, b)) => Ok(0.5 * (a + b)),
                None => Err(EnvError::MissingInit(s.name.clone())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(State)
    }

    /// Builds a state from `(name, value)` pairs covering every state variable.
    pub fn state_from(&self, pairs: &[(&str, f64)]) -> Result<State, EnvError> {
        let mut v = vec![None; self.states.len()];
        for &(n, x) in pairs {
            let i = self.state_index(n).ok_or_else(|| EnvError::Undeclared(n.into()))?;
            v[i] = Some(x);
        }
        v.into_iter()
            .enumerate()
            .map(|(i, x)| x.ok_or_else(|| EnvError::MissingValue(self.states[i].name.clone())))
            .collect::<Result<Vec<_>, _>>()
            .map(State)
    }

    /// Builds an action assignment from pairs; unnamed actions default to 0.
    pub fn actions_from(&self, pairs: &[(&str, f64)]) -> Result<Actions, EnvError> {
        let mut v = vec![0.0; self.actions.len()];
        for &(n, x) in pairs {
            let i = self.action_index(n).ok_or_else(|| EnvError::Undeclared(n.into()))?;
            v[i] = x;
        }
        Ok(Actions(v))
    }

    pub fn check_state(&self, q: &State) -> Result<(), EnvError> {
        if q.0.len() != self.states.len() {
            return Err(EnvError::Dimension { expected: self.states.len(), got: q.0.len() });
        }
        for (s, &x) in self.states.iter().zip(&q.0) {
            if !(x >= s.lo - BOUND_TOL && x <= s.hi + BOUND_TOL) {
                return Err(EnvError::OutOfBounds { name: s.name.clone(), value: x, lo: s.lo, hi: s.hi });
            }
        }
        Ok(())
    }

    pub fn check_actions(&self, q: &State, a: &Actions) -> Result<(), EnvError> {
        if a.0.len() != self.actions.len() {
            return Err(EnvError::Dimension { expected: self.actions.len(), got: a.0.len() });
        }
        for (v, &x) in self.actions.iter().zip(&a.0) {
            if !(x >= v.lo - BOUND_TOL && x <= v.hi + BOUND_TOL) {
                return Err(EnvError::OutOfBounds { name: v.name.clone(), value: x, lo: v.lo, hi: v.hi });
            }
            if v.kind == ActionKind::Binary && x != 0.0 && x != 1.0 {
                return Err(EnvError::NotBinary { name: v.name.clone(), value: x });
            }
        }
        for c in &self.constraints {
            let lhs = self.eval_step(&c.expr, q, a)?;
            if lhs > c.bound + 1e-6 {
                return Err(EnvError::ConstraintViolated(format!("{} <= {}", c.expr, c.bound)));
            }
        }
        Ok(())
    }

    fn eval_step(&self, e: &AffineExpr, q: &State, a: &Actions) -> Result<f64, EnvError> {
        e.eval_with(|n| {
            self.state_index
                .get(n)
                .map(|&i| q.0[i])
                .or_else(|| self.action_index.get(n).map(|&i| a.0[i]))
        })
        .map_err(EnvError::Undeclared)
    }

    /// One transition; results outside the declared bounds are clamped and reported.
    pub fn step(&self, q: &State, a: &Actions) -> Result<StepOutcome, EnvError> {
        self.check_state(q)?;
        self.check_actions(q, a)?;
        let mut next = Vec::with_capacity(self.states.len());
        let mut clamped = Vec::new();
        for (s, rule) in self.states.iter().zip(&self.updates) {
            let v = match rule {
                UpdateRule::Affine(e) => self.eval_step(e, q, a)?,
                UpdateRule::Switched { guard, when_set, when_clear } => {
                    let g = a.0[self.action_index[guard]];
                    self.eval_step(if g == 1.0 { when_set } else { when_clear }, q, a)?
                }
            };
            let c = v.clamp(s.lo, s.hi);
            if c != v {
                clamped.push(s.name.clone());
            }
            next.push(c);
        }
        Ok(StepOutcome { state: State(next), clamped })
    }

    /// Values of the derived outputs at state `q`.
    pub fn outputs_at(&self, q: &State) -> Result<Vec<f64>, EnvError> {
        let mut vals: Vec<f64> = Vec::with_capacity(self.outputs.len());
        for o in &self.outputs {
            let lookup = |n: &str| {
                self.state_index.get(n).map(|&i| q.0[i]).or_else(|| {
                    self.outputs.iter().position(|p| p.name == n).and_then(|k| vals.get(k).copied())
                })
            };
            let v = match &o.expr {
                OutputExpr::Affine(e) => e.eval_with(lookup),
                OutputExpr::Min(es) => es
                    .iter()
                    .map(|e| e.eval_with(lookup))
                    .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v))),
                OutputExpr::Max(es) => es
                    .iter()
                    .map(|e| e.eval_with(lookup))
                    .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v))),
            }
            .map_err(EnvError::Undeclared)?;
            vals.push(v);
        }
        Ok(vals)
    }

    /// Signal sample (states then outputs) for `q`.
    pub fn sample(&self, q: &State) -> Result<Vec<f64>, EnvError> {
        let mut row = q.0.clone();
        row.extend(self.outputs_at(q)?);
        Ok(row)
    }

    /// Predictive signal `q, step(q, a_0), ...` with `actions.len() + 1` samples.
    pub fn predict(&self, q: &State, actions: &ActionSequence) -> Result<Signal, EnvError> {
        if actions.is_empty() {
            return Err(EnvError::EmptyActions);
        }
        let mut rows = vec![self.sample(q)?];
        let mut cur = q.clone();
        for a in &actions.0 {
            cur = self.step(&cur, a)?.state;
            rows.push(self.sample(&cur)?);
        }
        Signal::new(self.signal_variables(), rows).map_err(|e| EnvError::Signal(e.to_string()))
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.states {
            writeln!(f, "state {} in [{}, {}];", s.name, fmt_num(s.lo), fmt_num(s.hi))?;
        }
        for a in &self.actions {
            let kind = if a.kind == ActionKind::Binary { " binary" } else { "" };
            writeln!(f, "action {} in [{}, {}]{kind};", a.name, fmt_num(a.lo), fmt_num(a.hi))?;
        }
        for (s, i) in self.states.iter().zip(&self.init) {
            match i {
                Some(Init::Value(v)) => writeln!(f, "init {} = {};", s.name, fmt_num(*v))?,
                Some(Init::Range(a, b)) => writeln!(f, "init {} in [{}, {}];", s.name, fmt_num(*a), fmt_num(*b))?,
                None => {}
            }
        }
        for (s, r) in self.states.iter().zip(&self.updates) {
            match r {
                UpdateRule::Affine(e) => writeln!(f, "next({}) = {e};", s.name)?,
                UpdateRule::Switched { guard, when_set, when_clear } => {
                    writeln!(f, "next({}) = if {guard} then {when_set} else {when_clear};", s.name)?
                }
            }
        }
        for o in &self.outputs {
            let list = |es: &[AffineExpr]| es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
            match &o.expr {
                OutputExpr::Affine(e) => writeln!(f, "output {} = {e};", o.name)?,
                OutputExpr::Min(es) => writeln!(f, "output {} = min({});", o.name, list(es))?,
                OutputExpr::Max(es) => writeln!(f, "output {} = max({});", o.name, list(es))?,
            }
        }
        for c in &self.constraints {
            writeln!(f, "constraint {} <= {};", c.expr, fmt_num(c.bound))?;
        }
        Ok(())
    }
}
