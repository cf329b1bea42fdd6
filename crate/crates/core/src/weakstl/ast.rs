use std::fmt;

use crate::stl::{AffineExpr, Formula, Interval};

/// Maximum slack on a predicate, in integer units of `scale` signal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredSlack {
    pub bound: u32,
    pub scale: f64,
}

impl PredSlack {
    pub fn new(bound: u32) -> Self {
        Self { bound, scale: 1.0 }
    }
}

/// Maximum adjustment of the left (`p`) and right (`q`) interval endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalSlack {
    pub p: u32,
    pub q: u32,
}

/// STL with weakening annotations on predicates and on `G`/`F` intervals.
#[derive(Debug, Clone, PartialEq)]
pub enum WeakFormula {
    True,
    Pred { expr: AffineExpr, slack: Option<PredSlack> },
    Not(Box<WeakFormula>),
    And(Box<WeakFormula>, Box<WeakFormula>),
    Or(Box<WeakFormula>, Box<WeakFormula>),
    Until(Interval, Box<WeakFormula>, Box<WeakFormula>),
    Eventually { interval: Interval, slack: Option<IntervalSlack>, child: Box<WeakFormula> },
    Always { interval: Interval, slack: Option<IntervalSlack>, child: Box<WeakFormula> },
}

impl WeakFormula {
    pub fn pred(expr: AffineExpr) -> Self {
        WeakFormula::Pred { expr, slack: None }
    }

    pub fn weak_pred(expr: AffineExpr, bound: u32) -> Self {
        WeakFormula::Pred { expr, slack: Some(PredSlack::new(bound)) }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: WeakFormula) -> Self {
        WeakFormula::Not(Box::new(f))
    }

    pub fn and(a: WeakFormula, b: WeakFormula) -> Self {
        WeakFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: WeakFormula, b: WeakFormula) -> Self {
        WeakFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn always(interval: Interval, slack: Option<IntervalSlack>, child: WeakFormula) -> Self {
        WeakFormula::Always { interval, slack, child: Box::new(child) }
    }

    pub fn eventually(interval: Interval, slack: Option<IntervalSlack>, child: WeakFormula) -> Self {
        WeakFormula::Eventually { interval, slack, child: Box::new(child) }
    }

    /// Lifts a plain STL formula (no annotations).
    pub fn from_stl(f: &Formula) -> Self {
        match f {
            Formula::True => WeakFormula::True,
            Formula::Pred(e) => WeakFormula::pred(e.clone()),
            Formula::Not(a) => WeakFormula::not(Self::from_stl(a)),
            Formula::And(a, b) => WeakFormula::and(Self::from_stl(a), Self::from_stl(b)),
            Formula::Or(a, b) => WeakFormula::or(Self::from_stl(a), Self::from_stl(b)),
            Formula::Until(i, a, b) => {
                WeakFormula::Until(*i, Box::new(Self::from_stl(a)), Box::new(Self::from_stl(b)))
            }
            Formula::Eventually(i, a) => WeakFormula::eventually(*i, None, Self::from_stl(a)),
            Formula::Always(i, a) => WeakFormula::always(*i, None, Self::from_stl(a)),
        }
    }

    /// Drops every annotation.
    pub fn strip(&self) -> Formula {
        match self {
            WeakFormula::True => Formula::True,
            WeakFormula::Pred { expr, .. } => Formula::Pred(expr.clone()),
            WeakFormula::Not(a) => Formula::not(a.strip()),
            WeakFormula::And(a, b) => Formula::and(a.strip(), b.strip()),
            WeakFormula::Or(a, b) => Formula::or(a.strip(), b.strip()),
            WeakFormula::Until(i, a, b) => Formula::until(*i, a.strip(), b.strip()),
            WeakFormula::Eventually { interval, child, .. } => {
                Formula::eventually(*interval, child.strip())
            }
            WeakFormula::Always { interval, child, .. } => Formula::always(*interval, child.strip()),
        }
    }

    pub fn is_annotated(&self) -> bool {
        match self {
            WeakFormula::True => false,
            WeakFormula::Pred { slack, .. } => slack.is_some(),
            WeakFormula::Not(a) => a.is_annotated(),
            WeakFormula::And(a, b) | WeakFormula::Or(a, b) | WeakFormula::Until(_, a, b) => {
                a.is_annotated() || b.is_annotated()
            }
            WeakFormula::Eventually { slack, child, .. } | WeakFormula::Always { slack, child, .. } => {
                slack.is_some() || child.is_annotated()
            }
        }
    }

    /// Largest horizon any weakening can reach: windows under a minimum
    /// only shrink, those under a maximum may grow by their right slack.
    pub fn max_horizon(&self) -> usize {
        self.horizon_under(super::Polarity::Weaken)
    }

    pub(crate) fn horizon_under(&self, pol: super::Polarity) -> usize {
        match self {
            WeakFormula::True | WeakFormula::Pred { .. } => 0,
            WeakFormula::Not(a) => a.horizon_under(pol.flip()),
            WeakFormula::And(a, b) | WeakFormula::Or(a, b) => a.horizon_under(pol).max(b.horizon_under(pol)),
            WeakFormula::Until(i, a, b) => i.hi as usize + a.horizon_under(pol).max(b.horizon_under(pol)),
            WeakFormula::Eventually { interval, slack, child } | WeakFormula::Always { interval, slack, child } => {
                let is_min = matches!(self, WeakFormula::Always { .. });
                let grows = (pol == super::Polarity::Weaken) != is_min;
                let q = if grows { slack.map_or(0, |s| s.q) as usize } else { 0 };
                interval.hi as usize + q + child.horizon_under(pol)
            }
        }
    }
}

impl fmt::Display for PredSlack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 1.0 {
            write!(f, "{{{}}}", self.bound)
        } else {
            write!(f, "{{{} * {}}}", self.bound, self.scale)
        }
    }
}

impl fmt::Display for WeakFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ann = |s: &Option<IntervalSlack>| match s {
            Some(s) => format!("{{{},{}}}", s.p, s.q),
            None => String::new(),
        };
        match self {
            WeakFormula::True => write!(f, "true"),
            WeakFormula::Pred { expr, slack: None } => write!(f, "({expr} > 0)"),
            WeakFormula::Pred { expr, slack: Some(s) } => write!(f, "({expr} > 0){s}"),
            WeakFormula::Not(a) => write!(f, "!{a}"),
            WeakFormula::And(a, b) => write!(f, "({a} & {b})"),
            WeakFormula::Or(a, b) => write!(f, "({a} | {b})"),
            WeakFormula::Until(i, a, b) => write!(f, "({a} U{i} {b})"),
            WeakFormula::Eventually { interval, slack, child } => {
                write!(f, "F{interval}{} {child}", ann(slack))
            }
            WeakFormula::Always { interval, slack, child } => {
                write!(f, "G{interval}{} {child}", ann(slack))
            }
        }
    }
}
