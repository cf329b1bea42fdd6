use std::collections::HashMap;
use std::fmt;

use super::MilpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

/// Sum of `coeff * var` plus a constant. Terms are kept merged and sorted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(VarId, f64)>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: VarId, c: f64) -> Self {
        let mut e = Self::new();
        e.add_term(v, c);
        e
    }

    pub fn add_term(&mut self, v: VarId, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.binary_search_by_key(&v, |t| t.0) {
            Ok(i) => {
                self.terms[i].1 += c;
                if self.terms[i].1 == 0.0 {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (v, c)),
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn with_term(mut self, v: VarId, c: f64) -> Self {
        self.add_term(v, c);
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn add_expr(&mut self, other: &LinExpr, k: f64) {
        for &(v, c) in &other.terms {
            self.add_term(v, k * c);
        }
        self.constant += k * other.constant;
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.add_expr(other, 1.0);
        self
    }

    pub fn minus(mut self, other: &LinExpr) -> Self {
        self.add_expr(other, -1.0);
        self
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut e = LinExpr::new();
        e.add_expr(self, k);
        e
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// `lhs (rel) rhs`; the left side has no constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub lhs: LinExpr,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn violation(&self, values: &[f64]) -> f64 {
        let v = self.lhs.eval(values);
        match self.relation {
            Relation::Le => (v - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - v).max(0.0),
            Relation::Eq => (v - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MilpProblem {
    vars: Vec<Variable>,
    names: HashMap<String, VarId>,
    constraints: Vec<Constraint>,
    sense: Option<Sense>,
    objective: LinExpr,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable. A name already in use gets a numeric suffix.
    pub fn add_var(&mut self, name: &str, kind: VarKind, lo: f64, hi: f64) -> VarId {
        let (lo, hi) = match kind {
            VarKind::Binary => (lo.max(0.0), hi.min(1.0)),
            _ => (lo, hi),
        };
        let mut unique = sanitize(name);
        if self.names.contains_key(&unique) {
            let mut k = 1;
            while self.names.contains_key(&format!("{unique}_{k}")) {
                k += 1;
            }
            unique = format!("{unique}_{k}");
        }
        let id = VarId(self.vars.len());
        self.names.insert(unique.clone(), id);
        self.vars.push(Variable { name: unique, kind, lo, hi });
        id
    }

    pub fn continuous(&mut self, name: &str, lo: f64, hi: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lo, hi)
    }

    pub fn binary(&mut self, name: &str) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn integer(&mut self, name: &str, lo: f64, hi: f64) -> VarId {
        self.add_var(name, VarKind::Integer, lo, hi)
    }

    /// Adds `expr (rel) rhs`, moving the expression's constant to the right.
    pub fn add_constraint(&mut self, expr: LinExpr, relation: Relation, rhs: f64) -> Result<(), MilpError> {
        let name = format!("c{}", self.constraints.len());
        self.add_named_constraint(name, expr, relation, rhs)
    }

    pub fn add_named_constraint(
        &mut self,
        name: String,
        mut expr: LinExpr,
        relation: Relation,
        rhs: f64,
    ) -> Result<(), MilpError> {
        let rhs = rhs - expr.constant;
        expr.constant = 0.0;
        for &(v, c) in expr.terms() {
            if v.0 >= self.vars.len() {
                return Err(MilpError::UnknownVariable(format!("#{}", v.0)));
            }
            if !c.is_finite() {
                return Err(MilpError::NonFinite(format!("coefficient of {} in {name}", self.vars[v.0].name)));
            }
        }
        if !rhs.is_finite() {
            return Err(MilpError::NonFinite(format!("right-hand side of {name}")));
        }
        self.constraints.push(Constraint { name, lhs: expr, relation, rhs });
        Ok(())
    }

    pub fn set_objective(&mut self, sense: Sense, expr: LinExpr) {
        self.sense = Some(sense);
        self.objective = expr;
    }

    pub fn sense(&self) -> Sense {
        self.sense.unwrap_or(Sense::Minimize)
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_integral(&self) -> usize {
        self.vars.iter().filter(|v| v.kind.is_integral()).count()
    }

    /// Tightens the bounds of an existing variable.
    pub fn restrict(&mut self, v: VarId, lo: f64, hi: f64) {
        let var = &mut self.vars[v.0];
        var.lo = var.lo.max(lo);
        var.hi = var.hi.min(hi);
    }

    pub fn fix(&mut self, v: VarId, value: f64) {
        let var = &mut self.vars[v.0];
        var.lo = value;
        var.hi = value;
    }

    /// Range of `e` over the variable bounds.
    pub fn bounds_of(&self, e: &LinExpr) -> (f64, f64) {
        let (mut lo, mut hi) = (e.constant, e.constant);
        for &(v, c) in e.terms() {
            let var = &self.vars[v.0];
            if c > 0.0 {
                lo += c * var.lo;
                hi += c * var.hi;
            } else {
                lo += c * var.hi;
                hi += c * var.lo;
            }
        }
        (lo, hi)
    }

    /// Largest bound, constraint or integrality violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lo - x).max(x - v.hi);
            if v.kind.is_integral() {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for c in &self.constraints {
            worst = worst.max(c.violation(values));
        }
        worst
    }
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    match s.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => s,
        _ => format!("v_{s}"),
    }
}
