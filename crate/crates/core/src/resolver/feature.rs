//! Feature specification files: one `key = value` pair per line, `#` starts
//! a comment.
//!
//! ```text
//! feature     = <identifier>
//! space       = <action space name>
//! requirement = <weakSTL formula>
//! activation  = <comparison> { "&" <comparison> }
//! ```
//!
//! `activation` compares affine expressions over state variables, for
//! example `battery < 40 & is_landing < 1`.

use std::fmt;

use crate::stl::AffineExpr;
use crate::syntax::{Parser, Tok};
use crate::weakstl::WeakFormula;

use super::ResolveError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        })
    }
}

/// Conjunction of `lhs (cmp) rhs` tests; empty means always active.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Activation(pub Vec<(AffineExpr, Comparison, AffineExpr)>);

impl Activation {
    pub fn always() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ResolveError> {
        let mut p = Parser::new(text)?;
        let mut terms = Vec::new();
        loop {
            let lhs = p.affine()?;
            let cmp = match p.bump() {
                Tok::Lt => Comparison::Lt,
                Tok::Le => Comparison::Le,
                Tok::Gt => Comparison::Gt,
                Tok::Ge => Comparison::Ge,
                t => return Err(p.error(format!("expected a comparison, found `{t}`")).into()),
            };
            let rhs = p.affine()?;
            terms.push((lhs, cmp, rhs));
            if !p.eat(&Tok::Amp) {
                break;
            }
        }
        p.finish()?;
        Ok(Self(terms))
    }

    pub fn holds(&self, lookup: impl Fn(&str) -> Option<f64>) -> Result<bool, ResolveError> {
        for (lhs, cmp, rhs) in &self.0 {
            let a = lhs.eval_with(&lookup).map_err(ResolveError::UnknownVariable)?;
            let b = rhs.eval_with(&lookup).map_err(ResolveError::UnknownVariable)?;
            let ok = match cmp {
                Comparison::Lt => a < b,
                Comparison::Le => a <= b,
                Comparison::Gt => a > b,
                Comparison::Ge => a >= b,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn variables(&self) -> Vec<String> {
        let mut v: Vec<String> =
            self.0.iter().flat_map(|(a, _, b)| a.variables().chain(b.variables()).map(str::to_string)).collect();
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, c, b)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{a} {c} {b}")?;
        }
        Ok(())
    }
}

/// A feature's requirement (bounds give its minimal form), when it is active,
/// and the action space it commands.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub id: String,
    pub requirement: WeakFormula,
    pub activation: Activation,
    pub space: String,
}

impl FeatureSpec {
    pub fn new(id: &str, requirement: WeakFormula, activation: Activation, space: &str) -> Self {
        Self { id: id.to_string(), requirement, activation, space: space.to_string() }
    }

    pub fn parse(text: &str) -> Result<Self, ResolveError> {
        let mut id = None;
        let mut space = None;
        let mut requirement = None;
        let mut activation = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| ResolveError::FeatureFile { line: i + 1, message: m };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = match key {
                "feature" => &mut id,
                "space" => &mut space,
                "requirement" => &mut requirement,
                "activation" => &mut activation,
                _ => return Err(err(format!("unknown key `{key}`"))),
            };
            if slot.replace(value.to_string()).is_some() {
                return Err(err(format!("`{key}` given twice")));
            }
        }
        let need = |v: Option<String>, k: &str| {
            v.ok_or_else(|| ResolveError::FeatureFile { line: 0, message: format!("missing `{k}`") })
        };
        let id = need(id, "feature")?;
        let space = need(space, "space")?;
        let requirement = crate::weakstl::parse_weakstl(&need(requirement, "requirement")?)?;
        let activation = match activation {
            Some(a) => Activation::parse(&a)?,
            None => Activation::always(),
        };
        Ok(Self { id, requirement, activation, space })
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "feature = {}", self.id)?;
        writeln!(f, "space = {}", self.space)?;
        writeln!(f, "requirement = {}", self.requirement)?;
        if !self.activation.0.is_empty() {
            writeln!(f, "activation = {}", self.activation)?;
        }
        Ok(())
    }
}
