//! Model file grammar:
//!
//! ```text
//! model      = { statement } ;
//! statement  = "state" ident "in" range ";"
//!            | "action" ident "in" range [ "binary" ] ";"
//!            | "init" ident ( "=" real | "in" range ) ";"
//!            | ( "next" "(" ident ")" | ident "'" ) "=" rule ";"
//!            | "output" ident "=" ( affine | ( "min" | "max" ) "(" affine { "," affine } ")" ) ";"
//!            | "constraint" affine ( "<=" | ">=" ) affine ";" ;
//! rule       = "if" ident "then" affine "else" affine | affine ;
//! range      = "[" real "," real "]" ;
//! ```
//!
//! `output` declares a derived signal variable over states and earlier
//! outputs. `constraint` restricts the actions available at every step and
//! must mention at least one action.

use crate::syntax::{Parser, Tok};

use super::{EnvError, Init, ModelBuilder, OutputExpr, TransitionSystem, UpdateRule};

pub fn parse_model(text: &str) -> Result<TransitionSystem, EnvError> {
    let mut p = Parser::new(text)?;
    let mut b = ModelBuilder::default();
    while !p.at_eof() {
        b = statement(&mut p, b)?;
    }
    b.build()
}

fn range(p: &mut Parser) -> Result<(f64, f64), EnvError> {
    p.expect(Tok::LBrack)?;
    let lo = p.number()?;
    p.expect(Tok::Comma)?;
    let hi = p.number()?;
    p.expect(Tok::RBrack)?;
    Ok((lo, hi))
}

fn statement(p: &mut Parser, b: ModelBuilder) -> Result<ModelBuilder, EnvError> {
    let b = if p.is_keyword("state") {
        p.bump();
        let name = p.ident()?;
        p.expect_keyword("in")?;
        let (lo, hi) = range(p)?;
        b.state(&name, lo, hi)
    } else if p.is_keyword("action") {
        p.bump();
        let name = p.ident()?;
        p.expect_keyword("in")?;
        let (lo, hi) = range(p)?;
        if p.is_keyword("binary") {
            p.bump();
            if (lo, hi) != (0.0, 1.0) {
                return Err(p.error("binary action must range over [0, 1]").into());
            }
            b.binary_action(&name)
        } else {
            b.action(&name, lo, hi)
        }
    } else if p.is_keyword("init") {
        p.bump();
        let name = p.ident()?;
        if p.eat(&Tok::Assign) {
            let v = p.number()?;
            b.init(&name, Init::Value(v))
        } else {
            p.expect_keyword("in")?;
            let (lo, hi) = range(p)?;
            b.init(&name, Init::Range(lo, hi))
        }
    } else if p.is_keyword("output") {
        p.bump();
        let name = p.ident()?;
        p.expect(Tok::Assign)?;
        let sel = ["min", "max"].into_iter().find(|k| p.is_keyword(k) && *p.peek_at(1) == Tok::LParen);
        let expr = match sel {
            Some(kind) => {
                p.bump();
                p.expect(Tok::LParen)?;
                let mut es = vec![p.affine()?];
                while p.eat(&Tok::Comma) {
                    es.push(p.affine()?);
                }
                p.expect(Tok::RParen)?;
                if kind == "min" {
                    OutputExpr::Min(es)
                } else {
                    OutputExpr::Max(es)
                }
            }
            None => OutputExpr::Affine(p.affine()?),
        };
        b.output(&name, expr)
    } else if p.is_keyword("constraint") {
        p.bump();
        let lhs = p.affine()?;
        let expr = if p.eat(&Tok::Le) {
            lhs.sub(&p.affine()?)
        } else if p.eat(&Tok::Ge) {
            p.affine()?.sub(&lhs)
        } else {
            return Err(p.error(format!("expected `<=` or `>=`, found `{}`", p.peek())).into());
        };
        b.constraint(expr, 0.0)
    } else {
        let name = if p.is_keyword("next") && *p.peek_at(1) == Tok::LParen {
            p.bump();
            p.expect(Tok::LParen)?;
            let n = p.ident()?;
            p.expect(Tok::RParen)?;
            n
        } else if matches!(p.peek(), Tok::Ident(_)) && *p.peek_at(1) == Tok::Prime {
            let n = p.ident()?;
            p.bump();
            n
        } else {
            return Err(p.error(format!("expected a statement, found `{}`", p.peek())).into());
        };
        p.expect(Tok::Assign)?;
        let rule = if p.is_keyword("if") {
            p.bump();
            let guard = p.ident()?;
            p.expect_keyword("then")?;
            let when_set = p.affine()?;
            p.expect_keyword("else")?;
            let when_clear = p.affine()?;
            UpdateRule::Switched { guard, when_set, when_clear }
        } else {
            UpdateRule::Affine(p.affine()?)
        };
        b.update(&name, rule)
    };
    p.expect(Tok::Semi)?;
    Ok(b)
}
