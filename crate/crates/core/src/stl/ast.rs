use std::collections::BTreeMap;
use std::fmt;

/// Affine function of named variables: `sum(coeff * var) + constant`.
///
/// Zero coefficients are never stored, so two expressions that denote the same
/// function compare equal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineExpr {
    coeffs: BTreeMap<String, f64>,
    constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::term(name, 1.0)
    }

    pub fn term(name: impl Into<String>, coeff: f64) -> Self {
        let mut e = Self::default();
        e.add_term(name, coeff);
        e
    }

    pub fn from_parts<I, S>(terms: I, constant: f64) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut e = Self::constant(constant);
        for (name, c) in terms {
            e.add_term(name, c);
        }
        e
    }

    pub fn add_term(&mut self, name: impl Into<String>, coeff: f64) {
        let name = name.into();
        let v = self.coeffs.get(&name).copied().unwrap_or(0.0) + coeff;
        if v == 0.0 {
            self.coeffs.remove(&name);
        } else {
            self.coeffs.insert(name, v);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<String, f64> {
        &self.coeffs
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn add(&self, other: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        for (n, c) in &other.coeffs {
            out.add_term(n.clone(), *c);
        }
        out.constant += other.constant;
        out
    }

    pub fn scale(&self, k: f64) -> AffineExpr {
        let mut out = AffineExpr::constant(self.constant * k);
        for (n, c) in &self.coeffs {
            out.add_term(n.clone(), c * k);
        }
        out
    }

    pub fn sub(&self, other: &AffineExpr) -> AffineExpr {
        self.add(&other.scale(-1.0))
    }

    pub fn offset(&self, delta: f64) -> AffineExpr {
        let mut out = self.clone();
        out.constant += delta;
        out
    }

    /// Evaluates with a lookup that returns `None` for unknown variables.
    pub fn eval_with<F>(&self, mut lookup: F) -> Result<f64, String>
    where
        F: FnMut(&str) -> Option<f64>,
    {
        let mut acc = self.constant;
        for (n, c) in &self.coeffs {
            match lookup(n) {
                Some(v) => acc += c * v,
                None => return Err(n.clone()),
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, &c) in &self.coeffs {
            let (neg, mag) = (c < 0.0, c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if mag == 1.0 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag} * {name}")?;
            }
            first = false;
        }
        let k = self.constant;
        if first {
            write!(f, "{k}")
        } else if k != 0.0 {
            write!(f, " {} {}", if k < 0.0 { '-' } else { '+' }, k.abs())
        } else {
            Ok(())
        }
    }
}

/// Closed step interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: u32,
    pub hi: u32,
}

impl Interval {
    pub fn new(lo: u32, hi: u32) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn steps(&self) -> std::ops::RangeInclusive<usize> {
        self.lo as usize..=self.hi as usize
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// STL formula. `Pred(f)` means `f(s(t)) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Pred(AffineExpr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Always(Interval, Box<Formula>),
}

impl Formula {
    pub fn pred(e: AffineExpr) -> Self {
        Formula::Pred(e)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn always(i: Interval, f: Formula) -> Self {
        Formula::Always(i, Box::new(f))
    }

    pub fn eventually(i: Interval, f: Formula) -> Self {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn until(i: Interval, a: Formula, b: Formula) -> Self {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    /// Number of future steps the robustness at `t` depends on.
    pub fn horizon(&self) -> usize {
        match self {
            Formula::True | Formula::Pred(_) => 0,
            Formula::Not(f) => f.horizon(),
            Formula::And(a, b) | Formula::Or(a, b) => a.horizon().max(b.horizon()),
            Formula::Always(i, f) | Formula::Eventually(i, f) => i.hi as usize + f.horizon(),
            Formula::Until(i, a, b) => i.hi as usize + a.horizon().max(b.horizon()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::Pred(_) => 0,
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Variables referenced by any predicate, deduplicated and sorted.
    pub fn variables(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_vars(&mut out);
        out.into_iter().collect()
    }

    fn collect_vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Pred(e) => out.extend(e.variables().map(str::to_owned)),
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => {
                f.collect_vars(out)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::Pred(e) => write!(f, "({e} > 0)"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Until(i, a, b) => write!(f, "({a} U{i} {b})"),
            Formula::Eventually(i, a) => write!(f, "F{i} {a}"),
            Formula::Always(i, a) => write!(f, "G{i} {a}"),
        }
    }
}
