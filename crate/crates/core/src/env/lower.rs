use crate::milp::{gadget, LinExpr, MilpError, MilpProblem, Relation, SignalVars, VarId};
use crate::stl::AffineExpr;

use super::{ActionKind, OutputExpr, State, TransitionSystem, UpdateRule};

/// Decision variables created for steps `t0..=t0+n` (states, outputs) and
/// `t0..t0+n` (actions); index 0 is step `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lowered {
    pub t0: usize,
    pub states: Vec<Vec<VarId>>,
    pub outputs: Vec<Vec<VarId>>,
    pub actions: Vec<Vec<VarId>>,
}

impl Lowered {
    /// Signal handles (states then outputs) for the lowered steps.
    pub fn signal_vars(&self, ts: &TransitionSystem) -> SignalVars {
        let mut sv = SignalVars::new(ts.signal_variables());
        for (s, o) in self.states.iter().zip(&self.outputs) {
            sv.push_step(s.iter().chain(o).copied().collect());
        }
        sv
    }
}

/// Lowers `n` transitions from step `t0` into a fresh problem.
pub fn lower_to_constraints(ts: &TransitionSystem, t0: usize, n: usize) -> Result<(MilpProblem, Lowered), MilpError> {
    let mut p = MilpProblem::new();
    let l = lower_into(ts, &mut p, t0, n, None)?;
    Ok((p, l))
}

pub(crate) fn linearize(e: &AffineExpr, lookup: impl Fn(&str) -> Option<VarId>) -> Result<LinExpr, MilpError> {
    let mut out = LinExpr::constant(e.constant_term());
    for (name, &c) in e.coeffs() {
        let v = lookup(name).ok_or_else(|| MilpError::UnknownVariable(name.clone()))?;
        out.add_term(v, c);
    }
    Ok(out)
}

fn interval_of(e: &AffineExpr, range: impl Fn(&str) -> (f64, f64)) -> (f64, f64) {
    let (mut lo, mut hi) = (e.constant_term(), e.constant_term());
    for (name, &c) in e.coeffs() {
        let (a, b) = range(name);
        if c >= 0.0 {
            lo += c * a;
            hi += c * b;
        } else {
            lo += c * b;
            hi += c * a;
        }
    }
    (lo, hi)
}

/// Lowers into `p`. With `start`, step `t0` is pinned to it and later state
/// bounds are tightened by forward interval propagation.
pub fn lower_into(
    ts: &TransitionSystem,
    p: &mut MilpProblem,
    t0: usize,
    n: usize,
    start: Option<&State>,
) -> Result<Lowered, MilpError> {
    let ns = ts.states().len();
    let mut bounds: Vec<(f64, f64)> = match start {
        Some(q) => {
            if q.0.len() != ns {
                return Err(MilpError::DimensionMismatch(format!(
                    "start state has {} entries, model has {ns} states",
                    q.0.len()
                )));
            }
            q.0.iter().map(|&v| (v, v)).collect()
        }
        None => ts.states().iter().map(|s| (s.lo, s.hi)).collect(),
    };
    let mut lowered = Lowered { t0, states: Vec::new(), outputs: Vec::new(), actions: Vec::new() };

    for k in 0..=n {
        let t = t0 + k;
        let svars: Vec<VarId> = ts
            .states()
            .iter()
            .zip(&bounds)
            .map(|(s, &(lo, hi))| p.continuous(&format!("{}@{t}", s.name), lo, hi))
            .collect();
        if k > 0 {
            let prev_s = &lowered.states[k - 1];
            let prev_a = &lowered.actions[k - 1];
            let lookup = |name: &str| {
                ts.state_index(name).map(|i| prev_s[i]).or_else(|| ts.action_index(name).map(|i| prev_a[i]))
            };
            for (i, rule) in ts.updates().iter().enumerate() {
                let target = LinExpr::var(svars[i]);
                match rule {
                    UpdateRule::Affine(e) => {
                        let le = linearize(e, lookup)?;
                        p.add_constraint(target.minus(&le), Relation::Eq, 0.0)?;
                    }
                    UpdateRule::Switched { guard, when_set, when_clear } => {
                        let g = prev_a[ts.action_index(guard).expect("validated guard")];
                        let a = linearize(when_set, lookup)?;
                        let b = linearize(when_clear, lookup)?;
                        gadget::add_switch(p, &target, g, &a, &b)?;
                    }
                }
            }
        }
        let mut ovars: Vec<VarId> = Vec::new();
        for o in ts.outputs() {
            let lookup = |name: &str| {
                ts.state_index(name)
                    .map(|i| svars[i])
                    .or_else(|| ts.outputs().iter().position(|q| q.name == name).and_then(|j| ovars.get(j).copied()))
            };
            let vname = format!("{}@{t}", o.name);
            let v = match &o.expr {
                OutputExpr::Affine(e) => {
                    let le = linearize(e, lookup)?;
                    let (lo, hi) = p.bounds_of(&le);
                    let v = p.continuous(&vname, lo, hi);
                    p.add_constraint(LinExpr::var(v).minus(&le), Relation::Eq, 0.0)?;
                    v
                }
                OutputExpr::Min(es) | OutputExpr::Max(es) => {
                    let les = es.iter().map(|e| linearize(e, lookup)).collect::<Result<Vec<_>, _>>()?;
                    if matches!(o.expr, OutputExpr::Min(_)) {
                        gadget::add_min(p, &vname, &les)?
                    } else {
                        gadget::add_max(p, &vname, &les)?
                    }
                }
            };
            ovars.push(v);
        }
        lowered.states.push(svars);
        lowered.outputs.push(ovars);
        if k == n {
            break;
        }
        let avars: Vec<VarId> = ts
            .actions()
            .iter()
            .map(|a| match a.kind {
                ActionKind::Binary => p.binary(&format!("{}@{t}", a.name)),
                ActionKind::Continuous => p.continuous(&format!("{}@{t}", a.name), a.lo, a.hi),
            })
            .collect();
        {
            let cur_s = &lowered.states[k];
            let lookup = |name: &str| {
                ts.state_index(name).map(|i| cur_s[i]).or_else(|| ts.action_index(name).map(|i| avars[i]))
            };
            for c in ts.constraints() {
                let le = linearize(&c.expr, lookup)?;
                p.add_constraint(le, Relation::Le, c.bound)?;
            }
        }
        lowered.actions.push(avars);

        let range = |name: &str| match ts.state_index(name) {
            Some(i) => bounds[i],
            None => {
                let a = &ts.actions()[ts.action_index(name).expect("validated action")];
                (a.lo, a.hi)
            }
        };
        let next_bounds: Vec<(f64, f64)> = ts
            .updates()
            .iter()
            .zip(ts.states())
            .map(|(rule, s)| {
                let (lo, hi) = match rule {
                    UpdateRule::Affine(e) => interval_of(e, range),
                    UpdateRule::Switched { when_set, when_clear, .. } => {
                        let a = interval_of(when_set, range);
                        let b = interval_of(when_clear, range);
                        (a.0.min(b.0), a.1.max(b.1))
                    }
                };
                (lo.max(s.lo), hi.min(s.hi))
            })
            .collect();
        bounds = next_bounds;
    }
    Ok(lowered)
}
