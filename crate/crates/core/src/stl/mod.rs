//! Signal temporal logic: syntax, discrete-time signals and robustness.
//!
//! Intervals are step counts; one step is one control cycle. A formula is
//! satisfied at `t` when its robustness is `>= 0`.

mod ast;
mod robustness;
mod signal;

pub use ast::{AffineExpr, Formula, Interval};
pub use robustness::{horizon, robustness, satisfied, Monitor, DEFAULT_TOP};
pub use signal::Signal;

use thiserror::Error;

use crate::syntax::{self, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StlError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("formula needs step {needed} but the signal ends at step {last}")]
    HorizonExceeded { needed: usize, last: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
}

/// Parses a plain STL formula; weakening annotations are rejected.
pub fn parse_stl(text: &str) -> Result<Formula, StlError> {
    let weak = syntax::parse_formula(text)?;
    if weak.is_annotated() {
        return Err(StlError::Parse(ParseError {
            line: 1,
            col: 1,
            message: "weakening annotations are not allowed in plain STL".into(),
        }));
    }
    Ok(weak.strip())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_always_example() {
        let f = parse_stl("G[0,2](alt - 5 > 0)").unwrap();
        assert_eq!(
            f,
            Formula::always(Interval::new(0, 2).unwrap(), Formula::Pred(AffineExpr::var("alt").offset(-5.0)))
        );
    }

    #[test]
    fn parses_true() {
        assert_eq!(parse_stl("true").unwrap(), Formula::True);
    }

    #[test]
    fn parses_until() {
        let f = parse_stl("(a > 0) U[1,3] (b > 0)").unwrap();
        assert_eq!(
            f,
            Formula::until(
                Interval::new(1, 3).unwrap(),
                Formula::Pred(AffineExpr::var("a")),
                Formula::Pred(AffineExpr::var("b"))
            )
        );
    }

    #[test]
    fn comparison_sugar_normalises() {
        assert_eq!(
            parse_stl("battery < 40").unwrap(),
            Formula::Pred(AffineExpr::from_parts([("battery", -1.0)], 40.0))
        );
        assert_eq!(parse_stl("x >= 2").unwrap(), parse_stl("x > 2").unwrap());
        assert_eq!(
            parse_stl("a > 0 -> b > 1").unwrap(),
            Formula::implies(parse_stl("a > 0").unwrap(), parse_stl("b > 1").unwrap())
        );
    }

    #[test]
    fn malformed_interval_is_rejected() {
        let e = parse_stl("G[3,1](x > 0)").unwrap_err();
        assert!(e.to_string().contains("lo > hi"), "{e}");
    }

    #[test]
    fn unknown_operator_is_rejected() {
        assert!(parse_stl("X[0,1](x > 0)").is_err());
        assert!(parse_stl("x ~ 0").is_err());
    }

    #[test]
    fn annotations_rejected_in_plain_stl() {
        assert!(parse_stl("G[0,2]{0,1}(x > 0)").is_err());
    }

    #[test]
    fn print_parse_fixpoint_on_examples() {
        for text in [
            "G[0,2](alt - 5 > 0)",
            "(a > 0) U[1,3] (b > 0)",
            "!(x < -2.5) | F[0,4] G[1,2](2 * y + x > 0.125)",
            "true & !true",
            "G[0,1](battery < 40 -> F[0,1](is_landing >= 1))",
        ] {
            let f = parse_stl(text).unwrap();
            assert_eq!(parse_stl(&f.to_string()).unwrap(), f, "{text} -> {f}");
        }
    }
}
