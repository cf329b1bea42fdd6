//! Big-M encoding of STL robustness and of the resolution problem.

use std::collections::HashMap;

use crate::env::{lower_into, linearize, ActionSequence, Actions, Lowered, State, TransitionSystem};
use crate::stl::{Formula, Interval, Signal, StlError};
use crate::weakstl::{adjust_interval, param_specs, Polarity, Theta, WeakFormula};

use super::{gadget, LinExpr, MilpError, MilpProblem, MilpSolution, Relation, Sense, VarId};

/// Per-step decision variables for each signal variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVars {
    names: Vec<String>,
    index: HashMap<String, usize>,
    steps: Vec<Vec<VarId>>,
}

impl SignalVars {
    pub fn new(names: Vec<String>) -> Self {
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Self { names, index, steps: Vec::new() }
    }

    /// Fresh variables with the given bounds for every variable of `s`,
    /// fixed to the sampled values.
    pub fn fixed(p: &mut MilpProblem, s: &Signal) -> Self {
        let mut sv = Self::new(s.variables().to_vec());
        for (t, row) in s.samples().iter().enumerate() {
            let vars = s
                .variables()
                .iter()
                .zip(row)
                .map(|(n, &v)| p.continuous(&format!("{n}@{t}"), v, v))
                .collect();
            sv.push_step(vars);
        }
        sv
    }

    pub fn push_step(&mut self, vars: Vec<VarId>) {
        assert_eq!(vars.len(), self.names.len(), "one variable per signal name");
        self.steps.push(vars);
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn get(&self, name: &str, t: usize) -> Option<VarId> {
        let i = *self.index.get(name)?;
        self.steps.get(t).map(|s| s[i])
    }
}

/// Which quantity the resolution objective minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveForm {
    /// Sum of robustness differences between weakened and original requirements.
    #[default]
    RobustnessDelta,
    /// Sum of weakening values.
    ThetaMagnitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingContext {
    /// Robustness of `true`, and the bound robustness ranges are checked against.
    pub big_m: f64,
    /// Satisfaction margin for the weakened requirements.
    pub epsilon_sat: f64,
    /// Turn a too-small `big_m` into an error instead of a warning.
    pub strict: bool,
    /// Prefer lexicographically smallest theta among equal objectives.
    pub tie_break: bool,
    pub objective: ObjectiveForm,
}

impl Default for EncodingContext {
    fn default() -> Self {
        Self { big_m: 1000.0, epsilon_sat: 0.0, strict: false, tie_break: true, objective: ObjectiveForm::default() }
    }
}

/// Total weight of the lexicographic tie-break term stays below this.
pub const TIE_BREAK_WEIGHT: f64 = 1e-4;

/// Integer weakening variables in parameter order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThetaVars {
    pub vars: Vec<VarId>,
    pub bounds: Vec<u32>,
}

impl ThetaVars {
    pub fn extract(&self, sol: &MilpSolution) -> Option<Theta> {
        let values = self.vars.iter().map(|&v| sol.value(v).map(|x| x.round() as u32)).collect::<Option<Vec<_>>>()?;
        Theta::new(values, self.bounds.clone()).ok()
    }
}

type Memo<T> = HashMap<(*const T, usize, Polarity), LinExpr>;

struct Encoder<'a> {
    p: &'a mut MilpProblem,
    sig: &'a SignalVars,
    ctx: &'a EncodingContext,
    label: String,
    count: usize,
}

impl Encoder<'_> {
    fn name(&mut self, what: &str) -> String {
        self.count += 1;
        format!("{}_{what}{}", self.label, self.count)
    }

    fn pred(&mut self, e: &crate::stl::AffineExpr, t: usize) -> Result<LinExpr, MilpError> {
        let sig = self.sig;
        let le = linearize(e, |n| sig.get(n, t)).map_err(|err| match err {
            MilpError::UnknownVariable(n) => MilpError::Stl(StlError::UnknownVariable(n)),
            other => other,
        })?;
        let (lo, hi) = self.p.bounds_of(&le);
        let range = lo.abs().max(hi.abs());
        if range >= self.ctx.big_m {
            if self.ctx.strict {
                return Err(MilpError::BigMTooSmall { big_m: self.ctx.big_m, range });
            }
            log::warn!("predicate {e} spans {range}, not below big-M {}", self.ctx.big_m);
        }
        Ok(le)
    }

    fn select(&mut self, exprs: Vec<LinExpr>, is_min: bool) -> Result<LinExpr, MilpError> {
        if exprs.len() == 1 {
            return Ok(exprs.into_iter().next().unwrap());
        }
        let name = self.name(if is_min { "min" } else { "max" });
        let v = if is_min { gadget::add_min(self.p, &name, &exprs)? } else { gadget::add_max(self.p, &name, &exprs)? };
        Ok(LinExpr::var(v))
    }

    fn stl(&mut self, phi: &Formula, t: usize, memo: &mut Memo<Formula>) -> Result<LinExpr, MilpError> {
        let key = (phi as *const Formula, t, Polarity::Weaken);
        if let Some(e) = memo.get(&key) {
            return Ok(e.clone());
        }
        let e = match phi {
            Formula::True => LinExpr::constant(self.ctx.big_m),
            Formula::Pred(e) => self.pred(e, t)?,
            Formula::Not(a) => self.stl(a, t, memo)?.scaled(-1.0),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let ea = self.stl(a, t, memo)?;
                let eb = self.stl(b, t, memo)?;
                self.select(vec![ea, eb], matches!(phi, Formula::And(..)))?
            }
            Formula::Always(i, a) | Formula::Eventually(i, a) => {
                let es = i.steps().map(|k| self.stl(a, t + k, memo)).collect::<Result<Vec<_>, _>>()?;
                self.select(es, matches!(phi, Formula::Always(..)))?
            }
            Formula::Until(i, a, b) => {
                let mut branches = Vec::new();
                for t1 in t + i.lo as usize..=t + i.hi as usize {
                    let mut parts = vec![self.stl(b, t1, memo)?];
                    for t2 in t..t1 {
                        parts.push(self.stl(a, t2, memo)?);
                    }
                    branches.push(self.select(parts, true)?);
                }
                self.select(branches, false)?
            }
        };
        memo.insert(key, e.clone());
        Ok(e)
    }

    fn weak(
        &mut self,
        phi: &WeakFormula,
        t: usize,
        pol: Polarity,
        theta: &[VarId],
        cur: &mut usize,
        memo: &mut Memo<WeakFormula>,
    ) -> Result<LinExpr, MilpError> {
        // theta indices are structural, so a memo hit must still advance the cursor
        let start = *cur;
        let key = (phi as *const WeakFormula, t, pol);
        if let Some(e) = memo.get(&key) {
            *cur = start + param_specs(phi).len();
            return Ok(e.clone());
        }
        let e = match phi {
            WeakFormula::True => LinExpr::constant(self.ctx.big_m),
            WeakFormula::Pred { expr, slack } => {
                let le = self.pred(expr, t)?;
                match slack {
                    Some(s) => {
                        let th = theta[*cur];
                        *cur += 1;
                        le.with_term(th, pol.sign() * s.scale)
                    }
                    None => le,
                }
            }
            WeakFormula::Not(a) => self.weak(a, t, pol.flip(), theta, cur, memo)?.scaled(-1.0),
            WeakFormula::And(a, b) | WeakFormula::Or(a, b) => {
                let ea = self.weak(a, t, pol, theta, cur, memo)?;
                let eb = self.weak(b, t, pol, theta, cur, memo)?;
                self.select(vec![ea, eb], matches!(phi, WeakFormula::And(..)))?
            }
            WeakFormula::Until(i, a, b) => {
                let after_a = *cur + param_specs(a).len();
                let mut branches = Vec::new();
                for t1 in t + i.lo as usize..=t + i.hi as usize {
                    let mut cb = after_a;
                    let mut parts = vec![self.weak(b, t1, pol, theta, &mut cb, memo)?];
                    for t2 in t..t1 {
                        let mut ca = *cur;
                        parts.push(self.weak(a, t2, pol, theta, &mut ca, memo)?);
                    }
                    branches.push(self.select(parts, true)?);
                }
                *cur = after_a + param_specs(b).len();
                self.select(branches, false)?
            }
            WeakFormula::Always { interval, slack, child } | WeakFormula::Eventually { interval, slack, child } => {
                let is_min = matches!(phi, WeakFormula::Always { .. });
                let enlarge = (pol == Polarity::Weaken) != is_min;
                match slack {
                    None => self.window(*interval, child, t, pol, theta, cur, memo, is_min)?,
                    Some(s) => {
                        let (tx, ty) = (theta[*cur], theta[*cur + 1]);
                        *cur += 2;
                        let child_start = *cur;
                        let mut choices = Vec::new();
                        for x in 0..=s.p {
                            for y in 0..=s.q {
                                let Ok((w, _)) = adjust_interval(*interval, x, y, enlarge) else {
                                    continue;
                                };
                                let mut c = child_start;
                                let r = self.window(w, child, t, pol, theta, &mut c, memo, is_min)?;
                                choices.push((x, y, r));
                            }
                        }
                        *cur = child_start + param_specs(child).len();
                        self.one_hot(choices, tx, ty)?
                    }
                }
            }
        };
        memo.insert(key, e.clone());
        Ok(e)
    }

    #[allow(clippy::too_many_arguments)]
    fn window(
        &mut self,
        w: Interval,
        child: &WeakFormula,
        t: usize,
        pol: Polarity,
        theta: &[VarId],
        cur: &mut usize,
        memo: &mut Memo<WeakFormula>,
        is_min: bool,
    ) -> Result<LinExpr, MilpError> {
        let start = *cur;
        let mut es = Vec::new();
        for k in w.steps() {
            let mut c = start;
            es.push(self.weak(child, t + k, pol, theta, &mut c, memo)?);
            *cur = c;
        }
        self.select(es, is_min)
    }

    /// `rho = r_c` for the selected window choice `c`, with `theta = (x_c, y_c)`.
    fn one_hot(&mut self, choices: Vec<(u32, u32, LinExpr)>, tx: VarId, ty: VarId) -> Result<LinExpr, MilpError> {
        if choices.is_empty() {
            return Err(MilpError::Encoding("no admissible window adjustment".into()));
        }
        let ranges: Vec<(f64, f64)> = choices.iter().map(|c| self.p.bounds_of(&c.2)).collect();
        let lo = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        let hi = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let name = self.name("win");
        let out = self.p.continuous(&name, lo, hi);
        let mut sum = LinExpr::new();
        let mut link_x = LinExpr::var(tx);
        let mut link_y = LinExpr::var(ty);
        for ((x, y, r), (rlo, rhi)) in choices.into_iter().zip(ranges) {
            let sel = self.p.binary(&format!("{name}_sel"));
            sum.add_term(sel, 1.0);
            link_x.add_term(sel, -(x as f64));
            link_y.add_term(sel, -(y as f64));
            let diff = LinExpr::var(out).minus(&r);
            // sel = 1 -> out = r
            let up = hi - rlo;
            let down = rhi - lo;
            self.p.add_constraint(diff.clone().with_term(sel, up), Relation::Le, up)?;
            self.p.add_constraint(diff.with_term(sel, -down), Relation::Ge, -down)?;
        }
        self.p.add_constraint(sum, Relation::Eq, 1.0)?;
        self.p.add_constraint(link_x, Relation::Eq, 0.0)?;
        self.p.add_constraint(link_y, Relation::Eq, 0.0)?;
        Ok(LinExpr::var(out))
    }
}

fn as_var(p: &mut MilpProblem, e: LinExpr, name: &str) -> Result<VarId, MilpError> {
    if e.constant_term() == 0.0 && e.terms().len() == 1 && e.terms()[0].1 == 1.0 {
        return Ok(e.terms()[0].0);
    }
    let (lo, hi) = p.bounds_of(&e);
    let v = p.continuous(name, lo, hi);
    p.add_constraint(LinExpr::var(v).minus(&e), Relation::Eq, 0.0)?;
    Ok(v)
}

fn check_horizon(h: usize, t: usize, sig: &SignalVars) -> Result<(), MilpError> {
    let last = sig.len().saturating_sub(1);
    if sig.is_empty() || t + h > last {
        return Err(StlError::HorizonExceeded { needed: t + h, last }.into());
    }
    Ok(())
}

/// Variable equal to `rho(phi, s, t)` for any assignment of the signal variables.
pub fn encode_robustness(
    p: &mut MilpProblem,
    phi: &Formula,
    sig: &SignalVars,
    t: usize,
    ctx: &EncodingContext,
) -> Result<VarId, MilpError> {
    encode_robustness_labeled(p, phi, sig, t, ctx, "rho")
}

fn encode_robustness_labeled(
    p: &mut MilpProblem,
    phi: &Formula,
    sig: &SignalVars,
    t: usize,
    ctx: &EncodingContext,
    label: &str,
) -> Result<VarId, MilpError> {
    check_horizon(phi.horizon(), t, sig)?;
    let mut enc = Encoder { p, sig, ctx, label: label.into(), count: 0 };
    let e = enc.stl(phi, t, &mut HashMap::new())?;
    as_var(p, e, label)
}

/// Robustness variable of the weakened formula plus its integer theta variables.
pub fn encode_weak_robustness(
    p: &mut MilpProblem,
    phi: &WeakFormula,
    sig: &SignalVars,
    t: usize,
    ctx: &EncodingContext,
) -> Result<(VarId, ThetaVars), MilpError> {
    encode_weak_labeled(p, phi, sig, t, ctx, "rhow")
}

fn encode_weak_labeled(
    p: &mut MilpProblem,
    phi: &WeakFormula,
    sig: &SignalVars,
    t: usize,
    ctx: &EncodingContext,
    label: &str,
) -> Result<(VarId, ThetaVars), MilpError> {
    check_horizon(phi.max_horizon(), t, sig)?;
    let specs = param_specs(phi);
    let theta = ThetaVars {
        vars: specs
            .iter()
            .enumerate()
            .map(|(i, s)| p.integer(&format!("{label}_theta{i}"), 0.0, s.bound as f64))
            .collect(),
        bounds: specs.iter().map(|s| s.bound).collect(),
    };
    let mut enc = Encoder { p, sig, ctx, label: label.into(), count: 0 };
    let mut cur = 0;
    let e = enc.weak(phi, t, Polarity::Weaken, &theta.vars, &mut cur, &mut HashMap::new())?;
    debug_assert_eq!(cur, specs.len());
    Ok((as_var(p, e, label)?, theta))
}

/// Lexicographic weights: a smaller theta (first entry most significant)
/// always has a smaller weighted sum, and the sum stays below `total`.
pub fn lexicographic_weights(bounds: &[u32], total: f64) -> Vec<f64> {
    let radix: Vec<f64> = bounds.iter().map(|&b| b as f64 + 1.0).collect();
    let all: f64 = radix.iter().product();
    (0..bounds.len()).map(|i| total * radix[i + 1..].iter().product::<f64>() / all).collect()
}

/// The resolution problem and the handles needed to read a solution back.
#[derive(Debug, Clone)]
pub struct ResolutionEncoding {
    pub problem: MilpProblem,
    pub t: usize,
    pub lowered: Lowered,
    pub signal: SignalVars,
    pub theta_phi: ThetaVars,
    pub theta_psi: ThetaVars,
    pub rho_phi: VarId,
    pub rho_phi_weak: VarId,
    pub rho_psi: VarId,
    pub rho_psi_weak: VarId,
}

impl ResolutionEncoding {
    /// Planned actions, with integral variables rounded and the rest clamped
    /// to their bounds.
    pub fn actions(&self, sol: &MilpSolution) -> Option<ActionSequence> {
        let read = |v: VarId| {
            let var = self.problem.variable(v);
            let x = sol.value(v)?;
            Some(if var.kind.is_integral() { x.round() } else { x.clamp(var.lo, var.hi) })
        };
        self.lowered
            .actions
            .iter()
            .map(|step| step.iter().map(|&v| read(v)).collect::<Option<Vec<_>>>().map(Actions))
            .collect::<Option<Vec<_>>>()
            .map(ActionSequence)
    }

    /// Adds a small L1 penalty on the first planned step's distance from
    /// `target`, each action scaled by its range. The penalty totals at most
    /// `weight`, so it only separates plans of (almost) equal cost.
    pub fn prefer_first_actions(&mut self, target: &Actions, weight: f64) -> Result<(), MilpError> {
        let Some(first) = self.lowered.actions.first().cloned() else { return Ok(()) };
        if target.0.len() != first.len() {
            return Err(MilpError::DimensionMismatch(format!(
                "preferred actions have {} entries, model has {}",
                target.0.len(),
                first.len()
            )));
        }
        let per = weight / first.len().max(1) as f64;
        let mut obj = self.problem.objective().clone();
        for (&v, &want) in first.iter().zip(&target.0) {
            let var = self.problem.variable(v).clone();
            let range = (var.hi - var.lo).max(1e-9);
            let dev = self.problem.continuous(&format!("{}_dev", var.name), 0.0, range);
            self.problem.add_constraint(LinExpr::var(dev).with_term(v, -1.0), Relation::Ge, -want)?;
            self.problem.add_constraint(LinExpr::var(dev).with_term(v, 1.0), Relation::Ge, want)?;
            obj.add_term(dev, per / range);
        }
        self.problem.set_objective(Sense::Minimize, obj);
        Ok(())
    }

    /// Rewards the robustness of the original (unweakened) requirements,
    /// `weights[i]` per unit. Kept small it picks, among equally weakened
    /// plans, the one closest to satisfying the originals.
    pub fn reward_original(&mut self, weights: [f64; 2]) {
        let mut obj = self.problem.objective().clone();
        obj.add_term(self.rho_phi, -weights[0]);
        obj.add_term(self.rho_psi, -weights[1]);
        self.problem.set_objective(Sense::Minimize, obj);
    }

    /// Degree of weakening per requirement.
    pub fn deltas(&self, sol: &MilpSolution) -> Option<(f64, f64)> {
        Some((
            sol.value(self.rho_phi_weak)? - sol.value(self.rho_phi)?,
            sol.value(self.rho_psi_weak)? - sol.value(self.rho_psi)?,
        ))
    }
}

/// Builds the minimal-weakening problem: past signal pinned, `n` predicted
/// steps from the last past sample, both weakened requirements satisfied at
/// that step, and the summed degree of weakening minimised.
pub fn encode_resolution(
    phi: &WeakFormula,
    psi: &WeakFormula,
    ts: &TransitionSystem,
    past: &Signal,
    n: usize,
    ctx: &EncodingContext,
) -> Result<ResolutionEncoding, MilpError> {
    let cols: Vec<usize> = ts
        .states()
        .iter()
        .map(|s| {
            past.var_index(&s.name).ok_or_else(|| {
                MilpError::DimensionMismatch(format!("past signal has no column for state `{}`", s.name))
            })
        })
        .collect::<Result<_, _>>()?;
    let t = past.last_step();
    let need = phi.max_horizon().max(psi.max_horizon());
    if n < need {
        return Err(StlError::HorizonExceeded { needed: t + need, last: t + n }.into());
    }

    let mut p = MilpProblem::new();
    let mut sig = SignalVars::new(ts.signal_variables());
    let state_at = |k: usize| State(cols.iter().map(|&c| past.samples()[k][c]).collect());
    for k in 0..t {
        let q = state_at(k);
        let row = ts.sample(&q).map_err(|e| MilpError::Encoding(e.to_string()))?;
        let vars = sig
            .names()
            .iter()
            .zip(&row)
            .map(|(name, &v)| p.continuous(&format!("{name}@{k}"), v, v))
            .collect();
        sig.push_step(vars);
    }
    let start = state_at(t);
    ts.check_state(&start).map_err(|e| MilpError::Encoding(format!("current state: {e}")))?;
    let lowered = lower_into(ts, &mut p, t, n, Some(&start))?;
    let future = lowered.signal_vars(ts);
    for k in 0..future.len() {
        sig.push_step(sig.names().iter().map(|name| future.get(name, k).unwrap()).collect());
    }

    let rho_phi = encode_robustness_labeled(&mut p, &phi.strip(), &sig, t, ctx, "phi0")?;
    let (rho_phi_weak, theta_phi) = encode_weak_labeled(&mut p, phi, &sig, t, ctx, "phiw")?;
    let rho_psi = encode_robustness_labeled(&mut p, &psi.strip(), &sig, t, ctx, "psi0")?;
    let (rho_psi_weak, theta_psi) = encode_weak_labeled(&mut p, psi, &sig, t, ctx, "psiw")?;
    p.add_constraint(LinExpr::var(rho_phi_weak), Relation::Ge, ctx.epsilon_sat)?;
    p.add_constraint(LinExpr::var(rho_psi_weak), Relation::Ge, ctx.epsilon_sat)?;

    let all_theta: Vec<VarId> = theta_phi.vars.iter().chain(&theta_psi.vars).copied().collect();
    let all_bounds: Vec<u32> = theta_phi.bounds.iter().chain(&theta_psi.bounds).copied().collect();
    let mut obj = LinExpr::new();
    match ctx.objective {
        ObjectiveForm::RobustnessDelta => {
            obj.add_term(rho_phi_weak, 1.0);
            obj.add_term(rho_phi, -1.0);
            obj.add_term(rho_psi_weak, 1.0);
            obj.add_term(rho_psi, -1.0);
        }
        ObjectiveForm::ThetaMagnitude => {
            for &v in &all_theta {
                obj.add_term(v, 1.0);
            }
        }
    }
    if ctx.tie_break {
        for (&v, w) in all_theta.iter().zip(lexicographic_weights(&all_bounds, TIE_BREAK_WEIGHT)) {
            obj.add_term(v, w);
        }
    }
    p.set_objective(Sense::Minimize, obj);

    Ok(ResolutionEncoding {
        problem: p,
        t,
        lowered,
        signal: sig,
        theta_phi,
        theta_psi,
        rho_phi,
        rho_phi_weak,
        rho_psi,
        rho_psi_weak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::parse_model;
    use crate::milp::{solve, SolveLimits, Status};
    use crate::stl::{parse_stl, robustness};
    use crate::weakstl::parse_weakstl;

    fn alt() -> Signal {
        Signal::scalar("alt", &[6.0, 3.0, 5.5]).unwrap()
    }

    /// Minimum and maximum of `v` over the feasible set.
    fn range_of(p: &mut MilpProblem, v: VarId) -> (f64, f64) {
        let mut out = [0.0; 2];
        for (i, sense) in [Sense::Minimize, Sense::Maximize].into_iter().enumerate() {
            p.set_objective(sense, LinExpr::var(v));
            let s = solve(p, &SolveLimits::default()).unwrap();
            assert_eq!(s.status, Status::Sat);
            out[i] = s.value(v).unwrap();
        }
        (out[0], out[1])
    }

    #[test]
    fn predicate_is_one_equality() {
        let mut p = MilpProblem::new();
        let s = Signal::scalar("battery", &[50.0, 42.0]).unwrap();
        let sig = SignalVars::fixed(&mut p, &s);
        let phi = parse_stl("battery - 10 > 0").unwrap();
        let rho = encode_robustness(&mut p, &phi, &sig, 1, &EncodingContext::default()).unwrap();
        assert_eq!(p.constraints().len(), 1);
        assert_eq!(p.num_integral(), 0);
        assert_eq!(range_of(&mut p, rho), (32.0, 32.0));
    }

    #[test]
    fn always_two_steps_uses_two_selectors() {
        let mut q = MilpProblem::new();
        let x0 = q.continuous("x0", -10.0, 10.0);
        let x1 = q.continuous("x1", -10.0, 10.0);
        let mut sig = SignalVars::new(vec!["x".into()]);
        sig.push_step(vec![x0]);
        sig.push_step(vec![x1]);
        let phi = parse_stl("G[0,1](x > 0)").unwrap();
        encode_robustness(&mut q, &phi, &sig, 0, &EncodingContext::default()).unwrap();
        assert_eq!(q.num_integral(), 2);
        let sum_row = q.constraints().iter().find(|c| c.relation == Relation::Eq && c.rhs == 1.0).unwrap();
        assert_eq!(sum_row.lhs.terms().len(), 2);
    }

    #[test]
    fn golden_altitude_values() {
        let mut p = MilpProblem::new();
        let sig = SignalVars::fixed(&mut p, &alt());
        let ctx = EncodingContext::default();
        let g = encode_robustness(&mut p, &parse_stl("G[0,2](alt - 5 > 0)").unwrap(), &sig, 0, &ctx).unwrap();
        let f = encode_robustness(&mut p, &parse_stl("F[0,2](alt - 5 > 0)").unwrap(), &sig, 0, &ctx).unwrap();
        assert_eq!(range_of(&mut p, g), (-2.0, -2.0));
        assert_eq!(range_of(&mut p, f), (1.0, 1.0));
    }

    #[test]
    fn weak_predicate_fixed_theta() {
        let mut p = MilpProblem::new();
        let sig = SignalVars::fixed(&mut p, &Signal::scalar("alt", &[4.0]).unwrap());
        let phi = parse_weakstl("(alt - 5 > 0){3}").unwrap();
        let (rho, th) = encode_weak_robustness(&mut p, &phi, &sig, 0, &EncodingContext::default()).unwrap();
        p.fix(th.vars[0], 3.0);
        assert_eq!(range_of(&mut p, rho), (2.0, 2.0));
    }

    #[test]
    fn weak_window_fixed_theta() {
        let mut p = MilpProblem::new();
        let sig = SignalVars::fixed(&mut p, &alt());
        let phi = parse_weakstl("G[0,2]{0,2}(alt - 5 > 0)").unwrap();
        let (rho, th) = encode_weak_robustness(&mut p, &phi, &sig, 0, &EncodingContext::default()).unwrap();
        p.fix(th.vars[0], 0.0);
        p.fix(th.vars[1], 2.0);
        assert_eq!(range_of(&mut p, rho), (1.0, 1.0));
    }

    #[test]
    fn zero_theta_matches_plain_encoding() {
        let s = Signal::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, -2.0], vec![-0.5, 3.0], vec![2.0, 0.25], vec![0.0, -1.0], vec![4.0, 2.0]],
        )
        .unwrap();
        let phi = parse_weakstl("!G[0,2]{1,1}((a > 0.5){2} | F[0,1]{1,1}(b < 1)) & (a > 0) U[0,2] (b > 0){1}").unwrap();
        let mut p = MilpProblem::new();
        let sig = SignalVars::fixed(&mut p, &s);
        let (rho, th) = encode_weak_robustness(&mut p, &phi, &sig, 0, &EncodingContext::default()).unwrap();
        for &v in &th.vars {
            p.fix(v, 0.0);
        }
        let want = robustness(&phi.strip(), &s, 0).unwrap();
        let (lo, hi) = range_of(&mut p, rho);
        assert!((lo - want).abs() < 1e-9 && (hi - want).abs() < 1e-9, "{lo} {hi} {want}");
    }

    #[test]
    fn horizon_overflow() {
        let mut p = MilpProblem::new();
        let sig = SignalVars::fixed(&mut p, &alt());
        let r = encode_robustness(&mut p, &parse_stl("G[0,3](alt > 0)").unwrap(), &sig, 0, &EncodingContext::default());
        assert!(matches!(r, Err(MilpError::Stl(StlError::HorizonExceeded { .. }))));
    }

    #[test]
    fn strict_big_m() {
        let mut p = MilpProblem::new();
        let x = p.continuous("x", -5000.0, 5000.0);
        let mut sig = SignalVars::new(vec!["x".into()]);
        sig.push_step(vec![x]);
        let ctx = EncodingContext { strict: true, ..EncodingContext::default() };
        let r = encode_robustness(&mut p, &parse_stl("x > 0").unwrap(), &sig, 0, &ctx);
        assert!(matches!(r, Err(MilpError::BigMTooSmall { .. })));
    }

    #[test]
    fn lexicographic_weights_order() {
        let w = lexicographic_weights(&[2, 2], TIE_BREAK_WEIGHT);
        let score = |a: f64, b: f64| w[0] * a + w[1] * b;
        assert!(score(0.0, 2.0) < score(1.0, 1.0));
        assert!(score(1.0, 1.0) < score(2.0, 0.0));
        assert!(score(2.0, 2.0) < TIE_BREAK_WEIGHT);
    }

    fn toy() -> TransitionSystem {
        parse_model("state x in [-10, 10]; action v in [-1, 1]; next(x) = x + v;").unwrap()
    }

    #[test]
    fn toy_resolution_is_minimal_and_lexicographic() {
        let phi = parse_weakstl("G[2,2]((x > 1){2})").unwrap();
        let psi = parse_weakstl("G[2,2]((x < -1){2})").unwrap();
        let past = Signal::scalar("x", &[0.0]).unwrap();
        let enc = encode_resolution(&phi, &psi, &toy(), &past, 2, &EncodingContext::default()).unwrap();
        let sol = solve(&enc.problem, &SolveLimits::default()).unwrap();
        assert_eq!(sol.status, Status::Sat);
        let (dp, dq) = enc.deltas(&sol).unwrap();
        assert!((dp + dq - 2.0).abs() < 1e-6);
        assert_eq!(enc.theta_phi.extract(&sol).unwrap().values(), &[0]);
        assert_eq!(enc.theta_psi.extract(&sol).unwrap().values(), &[2]);
        let acts = enc.actions(&sol).unwrap();
        let s = toy().predict(&State(vec![0.0]), &acts).unwrap();
        assert!((s.value("x", 2).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn consistent_requirements_need_no_weakening() {
        let phi = parse_weakstl("G[1,2]((x > 0.5){2})").unwrap();
        let psi = parse_weakstl("G[1,2]((x < 3){2})").unwrap();
        let past = Signal::scalar("x", &[0.0]).unwrap();
        let enc = encode_resolution(&phi, &psi, &toy(), &past, 2, &EncodingContext::default()).unwrap();
        let sol = solve(&enc.problem, &SolveLimits::default()).unwrap();
        assert_eq!(sol.status, Status::Sat);
        assert!(enc.theta_phi.extract(&sol).unwrap().is_zero());
        assert!(enc.theta_psi.extract(&sol).unwrap().is_zero());
        let (dp, dq) = enc.deltas(&sol).unwrap();
        assert!(dp.abs() < 1e-6 && dq.abs() < 1e-6);
    }

    #[test]
    fn hopeless_conflict_is_unsat() {
        let phi = parse_weakstl("G[2,2]((x > 4){1})").unwrap();
        let psi = parse_weakstl("G[2,2]((x < -4){1})").unwrap();
        let past = Signal::scalar("x", &[0.0]).unwrap();
        let enc = encode_resolution(&phi, &psi, &toy(), &past, 2, &EncodingContext::default()).unwrap();
        assert_eq!(solve(&enc.problem, &SolveLimits::default()).unwrap().status, Status::Unsat);
    }

    #[test]
    fn past_must_cover_model_states() {
        let phi = parse_weakstl("x > 0").unwrap();
        let past = Signal::scalar("y", &[0.0]).unwrap();
        let r = encode_resolution(&phi, &phi, &toy(), &past, 1, &EncodingContext::default());
        assert!(matches!(r, Err(MilpError::DimensionMismatch(_))));
    }
}
