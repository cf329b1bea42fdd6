//! weakSTL: STL whose predicates and `G`/`F` windows carry bounds on how far
//! they may be weakened, plus instantiation to plain STL.
//!
//! Annotations are written `(expr > 0){p}` (predicate slack, optionally
//! `{p * scale}`) and `G[a,b]{p,q}` / `F[a,b]{p,q}` (left/right endpoint
//! adjustment). Until cannot be annotated.
//!
//! Instantiation is polarity aware. Under a negation the child is strengthened
//! instead of weakened, so that the whole formula only ever becomes easier to
//! satisfy:
//!
//! | node              | weaken                 | strengthen             |
//! |-------------------|------------------------|------------------------|
//! | `f > 0`, slack x  | `f + x*scale > 0`      | `f - x*scale > 0`      |
//! | `G[a,b]`, (x, y)  | `G[a+x, b-y]`          | `G[max(a-x,0), b+y]`   |
//! | `F[a,b]`, (x, y)  | `F[max(a-x,0), b+y]`   | `F[a+x, b-y]`          |

mod ast;

pub use ast::{IntervalSlack, PredSlack, WeakFormula};

use thiserror::Error;

use crate::stl::{Formula, Interval, Monitor, Signal, StlError};
use crate::syntax::{self, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeakError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("theta has {got} entries, formula has {expected} weakening parameters")]
    ThetaLength { expected: usize, got: usize },
    #[error("theta[{index}] = {value} exceeds its bound {bound}")]
    ThetaOutOfBounds { index: usize, value: u32, bound: u32 },
    #[error("weakened interval [{lo},{hi}] is empty")]
    EmptyInterval { lo: i64, hi: i64 },
    #[error(transparent)]
    Stl(#[from] StlError),
}

pub fn parse_weakstl(text: &str) -> Result<WeakFormula, WeakError> {
    let f = syntax::parse_formula(text)?;
    validate(&f)?;
    Ok(f)
}

fn validate(f: &WeakFormula) -> Result<(), WeakError> {
    match f {
        WeakFormula::True | WeakFormula::Pred { .. } => Ok(()),
        WeakFormula::Not(a) => validate(a),
        WeakFormula::And(a, b) | WeakFormula::Or(a, b) | WeakFormula::Until(_, a, b) => {
            validate(a)?;
            validate(b)
        }
        WeakFormula::Always { interval, slack, child } => {
            if let Some(s) = slack {
                let lo = interval.lo as i64 + s.p as i64;
                let hi = interval.hi as i64 - s.q as i64;
                if lo > hi {
                    return Err(WeakError::EmptyInterval { lo, hi });
                }
            }
            validate(child)
        }
        WeakFormula::Eventually { child, .. } => validate(child),
    }
}

/// Direction of instantiation for a sub-formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Weaken,
    Strengthen,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Weaken => Polarity::Strengthen,
            Polarity::Strengthen => Polarity::Weaken,
        }
    }

    /// +1 for weaken, -1 for strengthen.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Weaken => 1.0,
            Polarity::Strengthen => -1.0,
        }
    }
}

/// What one entry of theta adjusts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    PredSlack { scale: f64 },
    LeftEndpoint,
    RightEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub kind: ParamKind,
    pub bound: u32,
}

/// Weakening parameters in pre-order, `(x, y)` for windows before the child's.
pub fn param_specs(phi: &WeakFormula) -> Vec<ParamSpec> {
    let mut out = Vec::new();
    collect_params(phi, &mut out);
    out
}

fn collect_params(phi: &WeakFormula, out: &mut Vec<ParamSpec>) {
    match phi {
        WeakFormula::True => {}
        WeakFormula::Pred { slack, .. } => {
            if let Some(s) = slack {
                out.push(ParamSpec { kind: ParamKind::PredSlack { scale: s.scale }, bound: s.bound });
            }
        }
        WeakFormula::Not(a) => collect_params(a, out),
        WeakFormula::And(a, b) | WeakFormula::Or(a, b) | WeakFormula::Until(_, a, b) => {
            collect_params(a, out);
            collect_params(b, out);
        }
        WeakFormula::Always { slack, child, .. } | WeakFormula::Eventually { slack, child, .. } => {
            if let Some(s) = slack {
                out.push(ParamSpec { kind: ParamKind::LeftEndpoint, bound: s.p });
                out.push(ParamSpec { kind: ParamKind::RightEndpoint, bound: s.q });
            }
            collect_params(child, out);
        }
    }
}

pub fn weaken_param_count(phi: &WeakFormula) -> usize {
    param_specs(phi).len()
}

/// Integer weakening values with their per-entry maxima.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Theta {
    values: Vec<u32>,
    bounds: Vec<u32>,
}

impl Theta {
    pub fn new(values: Vec<u32>, bounds: Vec<u32>) -> Result<Self, WeakError> {
        if values.len() != bounds.len() {
            return Err(WeakError::ThetaLength { expected: bounds.len(), got: values.len() });
        }
        for (index, (&value, &bound)) in values.iter().zip(&bounds).enumerate() {
            if value > bound {
                return Err(WeakError::ThetaOutOfBounds { index, value, bound });
            }
        }
        Ok(Self { values, bounds })
    }

    /// Theta for `phi` with the given values.
    pub fn for_formula(phi: &WeakFormula, values: Vec<u32>) -> Result<Self, WeakError> {
        Self::new(values, param_specs(phi).iter().map(|p| p.bound).collect())
    }

    pub fn zeros(phi: &WeakFormula) -> Self {
        let bounds: Vec<u32> = param_specs(phi).iter().map(|p| p.bound).collect();
        Self { values: vec![0; bounds.len()], bounds }
    }

    pub fn maximal(phi: &WeakFormula) -> Self {
        let bounds: Vec<u32> = param_specs(phi).iter().map(|p| p.bound).collect();
        Self { values: bounds.clone(), bounds }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Every theta within `bounds`, in lexicographic order.
    pub fn enumerate(bounds: &[u32]) -> impl Iterator<Item = Theta> + '_ {
        let total: u64 = bounds.iter().map(|&b| b as u64 + 1).product();
        (0..total).map(move |mut code| {
            let mut values = vec![0u32; bounds.len()];
            for i in (0..bounds.len()).rev() {
                let base = bounds[i] as u64 + 1;
                values[i] = (code % base) as u32;
                code /= base;
            }
            Theta { values, bounds: bounds.to_vec() }
        })
    }
}

/// Result of instantiation: the STL formula and the theta indices whose
/// left endpoint was clamped at step 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Instantiation {
    pub formula: Formula,
    pub clamped: Vec<usize>,
}

pub fn instantiate(phi: &WeakFormula, theta: &Theta, polarity: Polarity) -> Result<Formula, WeakError> {
    instantiate_detailed(phi, theta, polarity).map(|i| i.formula)
}

pub fn instantiate_detailed(
    phi: &WeakFormula,
    theta: &Theta,
    polarity: Polarity,
) -> Result<Instantiation, WeakError> {
    let specs = param_specs(phi);
    if specs.len() != theta.len() {
        return Err(WeakError::ThetaLength { expected: specs.len(), got: theta.len() });
    }
    for (index, (spec, &value)) in specs.iter().zip(theta.values()).enumerate() {
        if value > spec.bound || theta.bounds()[index] != spec.bound {
            return Err(WeakError::ThetaOutOfBounds { index, value, bound: spec.bound });
        }
    }
    let mut cursor = 0usize;
    let mut clamped = Vec::new();
    let formula = inst(phi, theta.values(), &mut cursor, polarity, &mut clamped)?;
    Ok(Instantiation { formula, clamped })
}

/// Window after adjusting by `(x, y)`. `enlarge` moves endpoints outward.
pub fn adjust_interval(
    i: Interval,
    x: u32,
    y: u32,
    enlarge: bool,
) -> Result<(Interval, bool), WeakError> {
    let (lo, hi) = if enlarge {
        (i.lo as i64 - x as i64, i.hi as i64 + y as i64)
    } else {
        (i.lo as i64 + x as i64, i.hi as i64 - y as i64)
    };
    let clamped = lo < 0;
    let lo = lo.max(0);
    if lo > hi {
        return Err(WeakError::EmptyInterval { lo, hi });
    }
    Ok((Interval { lo: lo as u32, hi: hi as u32 }, clamped))
}

fn inst(
    phi: &WeakFormula,
    theta: &[u32],
    cur: &mut usize,
    pol: Polarity,
    clamped: &mut Vec<usize>,
) -> Result<Formula, WeakError> {
    Ok(match phi {
        WeakFormula::True => Formula::True,
        WeakFormula::Pred { expr, slack } => match slack {
            Some(s) => {
                let x = theta[*cur];
                *cur += 1;
                Formula::Pred(expr.offset(pol.sign() * x as f64 * s.scale))
            }
            None => Formula::Pred(expr.clone()),
        },
        WeakFormula::Not(a) => Formula::not(inst(a, theta, cur, pol.flip(), clamped)?),
        WeakFormula::And(a, b) => {
            let a = inst(a, theta, cur, pol, clamped)?;
            Formula::and(a, inst(b, theta, cur, pol, clamped)?)
        }
        WeakFormula::Or(a, b) => {
            let a = inst(a, theta, cur, pol, clamped)?;
            Formula::or(a, inst(b, theta, cur, pol, clamped)?)
        }
        WeakFormula::Until(i, a, b) => {
            let a = inst(a, theta, cur, pol, clamped)?;
            Formula::until(*i, a, inst(b, theta, cur, pol, clamped)?)
        }
        WeakFormula::Always { interval, slack, child } => {
            let i = window(*interval, slack, theta, cur, pol == Polarity::Strengthen, clamped)?;
            Formula::always(i, inst(child, theta, cur, pol, clamped)?)
        }
        WeakFormula::Eventually { interval, slack, child } => {
            let i = window(*interval, slack, theta, cur, pol == Polarity::Weaken, clamped)?;
            Formula::eventually(i, inst(child, theta, cur, pol, clamped)?)
        }
    })
}

fn window(
    interval: Interval,
    slack: &Option<IntervalSlack>,
    theta: &[u32],
    cur: &mut usize,
    enlarge: bool,
    clamped: &mut Vec<usize>,
) -> Result<Interval, WeakError> {
    if slack.is_none() {
        return Ok(interval);
    }
    let (x, y) = (theta[*cur], theta[*cur + 1]);
    let (i, c) = adjust_interval(interval, x, y, enlarge)?;
    if c {
        clamped.push(*cur);
    }
    *cur += 2;
    Ok(i)
}

/// Weakest admissible requirement: every parameter at its bound.
pub fn minimal_requirement(phi: &WeakFormula) -> Result<Formula, WeakError> {
    instantiate(phi, &Theta::maximal(phi), Polarity::Weaken)
}

/// `rho(phi_theta, s, t) - rho(phi_0, s, t)`.
pub fn degree_of_weakening(
    phi: &WeakFormula,
    theta: &Theta,
    s: &Signal,
    t: usize,
) -> Result<f64, WeakError> {
    degree_of_weakening_with(&Monitor::default(), phi, theta, s, t)
}

pub fn degree_of_weakening_with(
    monitor: &Monitor,
    phi: &WeakFormula,
    theta: &Theta,
    s: &Signal,
    t: usize,
) -> Result<f64, WeakError> {
    let weak = instantiate(phi, theta, Polarity::Weaken)?;
    let orig = instantiate(phi, &Theta::zeros(phi), Polarity::Weaken)?;
    Ok(monitor.robustness(&weak, s, t)? - monitor.robustness(&orig, s, t)?)
}

/// weakSTL satisfaction: some admissible instantiation is satisfied.
pub fn weak_satisfied(phi: &WeakFormula, s: &Signal, t: usize) -> Result<bool, WeakError> {
    let bounds: Vec<u32> = param_specs(phi).iter().map(|p| p.bound).collect();
    for theta in Theta::enumerate(&bounds) {
        let f = instantiate(phi, &theta, Polarity::Weaken)?;
        if crate::stl::satisfied(&f, s, t)? {
            return Ok(true);
        }
    }
    Ok(false)
}
