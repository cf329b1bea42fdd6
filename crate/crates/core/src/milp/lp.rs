//! CPLEX LP text format: writer and a reader for the subset the writer emits
//! (plus the usual relation spellings and default bounds).

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{LinExpr, MilpError, MilpProblem, Relation, Sense, VarId, VarKind};

const TERMS_PER_LINE: usize = 8;

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, p: &MilpProblem, e: &LinExpr, with_constant: bool) {
    let mut items: Vec<String> = e
        .terms()
        .iter()
        .map(|&(v, c)| {
            let name = &p.variable(v).name;
            let sign = if c < 0.0 { "-" } else { "+" };
            if c.abs() == 1.0 {
                format!("{sign} {name}")
            } else {
                format!("{sign} {} {name}", num(c.abs()))
            }
        })
        .collect();
    if with_constant && e.constant_term() != 0.0 {
        let c = e.constant_term();
        items.push(format!("{} {}", if c < 0.0 { "-" } else { "+" }, num(c.abs())));
    }
    if items.is_empty() {
        items.push("0".into());
    }
    for (i, chunk) in items.chunks(TERMS_PER_LINE).enumerate() {
        if i > 0 {
            out.push_str("\n   ");
        }
        out.push(' ');
        out.push_str(&chunk.join(" "));
    }
}

/// Renders the problem in LP format.
pub fn export_lp(p: &MilpProblem) -> String {
    let mut out = String::new();
    out.push_str(match p.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_expr(&mut out, p, p.objective(), true);
    out.push_str("\nSubject To\n");
    for c in p.constraints() {
        let _ = write!(out, " {}:", c.name);
        write_expr(&mut out, p, &c.lhs, false);
        let _ = writeln!(out, " {} {}", c.relation, num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in p.variables() {
        if v.lo == f64::NEG_INFINITY && v.hi == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", num(v.lo), v.name, num(v.hi));
        }
    }
    for (kind, header) in [(VarKind::Integer, "Generals"), (VarKind::Binary, "Binaries")] {
        let names: Vec<&str> = p.variables().iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if !names.is_empty() {
            let _ = writeln!(out, "{header}");
            for chunk in names.chunks(TERMS_PER_LINE) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_.@#".contains(c)
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, MilpError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('\\').next().unwrap_or("");
        let err = |m: String| MilpError::LpFormat { line: ln + 1, message: m };
        let cs: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < cs.len() {
            let c = cs[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '+' {
                out.push((ln + 1, Tok::Plus));
                i += 1;
            } else if c == '-' {
                out.push((ln + 1, Tok::Minus));
                i += 1;
            } else if c == ':' {
                out.push((ln + 1, Tok::Colon));
                i += 1;
            } else if c == '<' || c == '>' || c == '=' {
                let mut j = i + 1;
                while j < cs.len() && "<>=".contains(cs[j]) {
                    j += 1;
                }
                let op: String = cs[i..j].iter().collect();
                let rel = match op.as_str() {
                    "<=" | "=<" | "<" => Relation::Le,
                    ">=" | "=>" | ">" => Relation::Ge,
                    "=" => Relation::Eq,
                    _ => return Err(err(format!("bad relation `{op}`"))),
                };
                out.push((ln + 1, Tok::Rel(rel)));
                i = j;
            } else if c.is_ascii_digit() || c == '.' {
                let mut j = i;
                while j < cs.len() {
                    let d = cs[j];
                    let exp_sign = (d == '+' || d == '-') && j > i && matches!(cs[j - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = cs[i..j].iter().collect();
                let v = s.parse().map_err(|_| err(format!("bad number `{s}`")))?;
                out.push((ln + 1, Tok::Num(v)));
                i = j;
            } else if is_name_char(c) {
                let mut j = i;
                while j < cs.len() && is_name_char(cs[j]) {
                    j += 1;
                }
                let s: String = cs[i..j].iter().collect();
                let lower = s.to_ascii_lowercase();
                if lower == "inf" || lower == "infinity" {
                    out.push((ln + 1, Tok::Num(f64::INFINITY)));
                } else {
                    out.push((ln + 1, Tok::Name(s)));
                }
                i = j;
            } else {
                return Err(err(format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

struct Reader {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Reader {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.0)
    }

    fn err(&self, m: impl Into<String>) -> MilpError {
        MilpError::LpFormat { line: self.line(), message: m.into() }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    /// Section header at the cursor, consuming it.
    fn section(&mut self) -> Option<Section> {
        let Some(Tok::Name(w)) = self.peek() else { return None };
        let w = w.to_ascii_lowercase();
        let next_is = |r: &Reader, k: &str| matches!(r.toks.get(r.pos + 1), Some((_, Tok::Name(n))) if n.eq_ignore_ascii_case(k));
        let (s, n) = match w.as_str() {
            "minimize" | "minimise" | "min" | "maximize" | "maximise" | "max" => (Section::Objective, 1),
            "subject" if next_is(self, "to") => (Section::Constraints, 2),
            "such" if next_is(self, "that") => (Section::Constraints, 2),
            "st" | "s.t." => (Section::Constraints, 1),
            "bounds" | "bound" => (Section::Bounds, 1),
            "generals" | "general" | "integers" | "gen" => (Section::Generals, 1),
            "binaries" | "binary" | "bin" => (Section::Binaries, 1),
            "end" => (Section::End, 1),
            _ => return None,
        };
        // a constraint label such as `min:` is not a header
        if n == 1 && matches!(self.toks.get(self.pos + 1), Some((_, Tok::Colon))) {
            return None;
        }
        self.pos += n;
        Some(s)
    }

    fn at_section(&mut self) -> bool {
        let save = self.pos;
        let r = self.section().is_some();
        self.pos = save;
        r
    }

    fn label(&mut self) -> Option<String> {
        if let (Some((_, Tok::Name(n))), Some((_, Tok::Colon))) = (self.toks.get(self.pos), self.toks.get(self.pos + 1)) {
            let n = n.clone();
            self.pos += 2;
            Some(n)
        } else {
            None
        }
    }

    fn signed_number(&mut self) -> Result<f64, MilpError> {
        let mut sign = 1.0;
        loop {
            match self.bump() {
                Some(Tok::Plus) => {}
                Some(Tok::Minus) => sign = -sign,
                Some(Tok::Num(v)) => return Ok(sign * v),
                other => return Err(self.err(format!("expected a number, found {other:?}"))),
            }
        }
    }

    /// Terms up to a relation, a label or a section header.
    fn expr(&mut self, names: &mut Vec<String>) -> Result<Vec<(String, f64)>, MilpError> {
        let mut terms = Vec::new();
        loop {
            if self.at_section() || self.peek().is_none() {
                break;
            }
            if matches!(self.toks.get(self.pos + 1), Some((_, Tok::Colon))) {
                break;
            }
            let mut sign = 1.0;
            let mut saw_sign = false;
            while let Some(t @ (Tok::Plus | Tok::Minus)) = self.peek() {
                if *t == Tok::Minus {
                    sign = -sign;
                }
                saw_sign = true;
                self.pos += 1;
            }
            match self.peek().cloned() {
                Some(Tok::Num(c)) => {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Name(n)) if !self.at_section() => {
                            self.pos += 1;
                            names.push(n.clone());
                            terms.push((n, sign * c));
                        }
                        _ => terms.push((String::new(), sign * c)),
                    }
                }
                Some(Tok::Name(n)) => {
                    self.pos += 1;
                    names.push(n.clone());
                    terms.push((n, sign));
                }
                Some(Tok::Rel(_)) if !saw_sign => break,
                other => return Err(self.err(format!("unexpected {other:?} in expression"))),
            }
        }
        Ok(terms)
    }
}

struct RawConstraint {
    name: Option<String>,
    terms: Vec<(String, f64)>,
    relation: Relation,
    rhs: f64,
}

/// Parses LP text. Variables listed in `Bounds` keep that order; any others
/// follow in order of first use. Unlisted variables default to `[0, +inf)`.
pub fn parse_lp(text: &str) -> Result<MilpProblem, MilpError> {
    let mut r = Reader { toks: tokenize(text)?, pos: 0 };
    let mut sense = Sense::Minimize;
    let mut rows: Vec<RawConstraint> = Vec::new();
    let mut bounds: HashMap<String, (f64, f64)> = HashMap::new();
    let mut kinds: HashMap<String, VarKind> = HashMap::new();
    let mut bound_order: Vec<String> = Vec::new();
    let mut used: Vec<String> = Vec::new();

    match r.peek() {
        Some(Tok::Name(w)) if w.to_ascii_lowercase().starts_with("max") => sense = Sense::Maximize,
        _ => {}
    }
    if r.section() != Some(Section::Objective) {
        return Err(r.err("expected Minimize or Maximize"));
    }
    r.label();
    let objective = r.expr(&mut used)?;
    let mut section = r.section().ok_or_else(|| r.err("expected a section header"))?;
    loop {
        match section {
            Section::Objective => return Err(r.err("second objective")),
            Section::End => break,
            Section::Constraints => {
                while !r.at_section() && r.peek().is_some() {
                    let name = r.label();
                    let terms = r.expr(&mut used)?;
                    let Some(Tok::Rel(relation)) = r.bump() else {
                        return Err(r.err("expected a relation"));
                    };
                    let rhs = r.signed_number()?;
                    rows.push(RawConstraint { name, terms, relation, rhs });
                }
            }
            Section::Bounds => {
                while !r.at_section() && r.peek().is_some() {
                    bound_line(&mut r, &mut bounds, &mut bound_order)?;
                }
            }
            Section::Generals | Section::Binaries => {
                let kind = if section == Section::Generals { VarKind::Integer } else { VarKind::Binary };
                while !r.at_section() && r.peek().is_some() {
                    match r.bump() {
                        Some(Tok::Name(n)) => {
                            used.push(n.clone());
                            kinds.insert(n, kind);
                        }
                        other => return Err(r.err(format!("expected a variable name, found {other:?}"))),
                    }
                }
            }
        }
        match r.section() {
            Some(s) => section = s,
            None if r.peek().is_none() => break,
            None => return Err(r.err("expected a section header")),
        }
    }

    let mut p = MilpProblem::new();
    let mut ids: HashMap<String, VarId> = HashMap::new();
    for n in bound_order.iter().chain(&used) {
        if ids.contains_key(n) {
            continue;
        }
        let kind = kinds.get(n).copied().unwrap_or(VarKind::Continuous);
        let (lo, hi) = match (bounds.get(n), kind) {
            (Some(&b), _) => b,
            (None, VarKind::Binary) => (0.0, 1.0),
            (None, _) => (0.0, f64::INFINITY),
        };
        let id = p.add_var(n, kind, lo, hi);
        if p.variable(id).name != *n {
            return Err(MilpError::LpFormat { line: 0, message: format!("unsupported variable name `{n}`") });
        }
        ids.insert(n.clone(), id);
    }
    let to_expr = |terms: &[(String, f64)]| {
        let mut e = LinExpr::new();
        for (n, c) in terms {
            if n.is_empty() {
                e.add_constant(*c);
            } else {
                e.add_term(ids[n], *c);
            }
        }
        e
    };
    p.set_objective(sense, to_expr(&objective));
    for row in rows {
        let e = to_expr(&row.terms);
        match row.name {
            Some(n) => p.add_named_constraint(n, e, row.relation, row.rhs)?,
            None => p.add_constraint(e, row.relation, row.rhs)?,
        }
    }
    Ok(p)
}

fn bound_line(
    r: &mut Reader,
    bounds: &mut HashMap<String, (f64, f64)>,
    order: &mut Vec<String>,
) -> Result<(), MilpError> {
    let mut entry = |n: &str, bounds: &mut HashMap<String, (f64, f64)>| -> (f64, f64) {
        if !bounds.contains_key(n) {
            order.push(n.to_string());
        }
        *bounds.entry(n.to_string()).or_insert((0.0, f64::INFINITY))
    };
    if let Some(Tok::Name(n)) = r.peek().cloned() {
        r.pos += 1;
        let cur = entry(&n, bounds);
        let b = match r.bump() {
            Some(Tok::Name(w)) if w.eq_ignore_ascii_case("free") => (f64::NEG_INFINITY, f64::INFINITY),
            Some(Tok::Rel(rel)) => {
                let v = r.signed_number()?;
                match rel {
                    Relation::Le => (cur.0, v),
                    Relation::Ge => (v, cur.1),
                    Relation::Eq => (v, v),
                }
            }
            other => return Err(r.err(format!("bad bound, found {other:?}"))),
        };
        bounds.insert(n, b);
        return Ok(());
    }
    let first = r.signed_number()?;
    let Some(Tok::Rel(rel)) = r.bump() else {
        return Err(r.err("expected a relation in bound"));
    };
    let Some(Tok::Name(n)) = r.bump() else {
        return Err(r.err("expected a variable in bound"));
    };
    let mut b = entry(&n, bounds);
    match rel {
        Relation::Le => b.0 = first,
        Relation::Ge => b.1 = first,
        Relation::Eq => b = (first, first),
    }
    if let Some(Tok::Rel(rel2)) = r.peek().cloned() {
        r.pos += 1;
        let v = r.signed_number()?;
        match rel2 {
            Relation::Le => b.1 = v,
            Relation::Ge => b.0 = v,
            Relation::Eq => return Err(r.err("`=` in a double bound")),
        }
    }
    bounds.insert(n, b);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve, SolveLimits};

    fn sample() -> MilpProblem {
        let mut p = MilpProblem::new();
        let x = p.continuous("x@0", -2.5, 7.0);
        let f = p.continuous("free_var", f64::NEG_INFINITY, f64::INFINITY);
        let n = p.integer("n", 0.0, 10.0);
        let b = p.binary("sel");
        p.add_constraint(LinExpr::var(x).with_term(n, 2.0).with_term(b, -1e-5), Relation::Le, 9.0).unwrap();
        p.add_constraint(LinExpr::var(f).with_term(x, -1.0), Relation::Eq, -0.25).unwrap();
        p.add_constraint(LinExpr::term(n, 1.5).with_term(b, 3.0), Relation::Ge, 1.0).unwrap();
        p.set_objective(Sense::Maximize, LinExpr::var(x).with_term(n, 0.5).with_term(f, -0.125).with_constant(2.0));
        p
    }

    #[test]
    fn export_has_sections() {
        let text = export_lp(&sample());
        for h in ["Maximize", "Subject To", "Bounds", "Generals", "Binaries", "End"] {
            assert!(text.lines().any(|l| l == h), "{h} missing in\n{text}");
        }
        assert!(text.contains("x_0"));
        assert!(text.contains("free_var free"));
        assert!(text.contains("- 1e-5 sel") || text.contains("- 0.00001 sel"), "{text}");
    }

    #[test]
    fn roundtrip_preserves_problem() {
        let p = sample();
        let q = parse_lp(&export_lp(&p)).unwrap();
        assert_eq!(q.variables(), p.variables());
        assert_eq!(q.constraints(), p.constraints());
        assert_eq!(q.objective(), p.objective());
        assert_eq!(q.sense(), p.sense());
        let a = solve(&p, &SolveLimits::default()).unwrap();
        let b = solve(&q, &SolveLimits::default()).unwrap();
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn long_rows_wrap_and_reparse() {
        let mut p = MilpProblem::new();
        let vs: Vec<VarId> = (0..30).map(|i| p.continuous(&format!("v{i}"), 0.0, 1.0)).collect();
        let mut e = LinExpr::new();
        for (i, &v) in vs.iter().enumerate() {
            e.add_term(v, (i + 1) as f64);
        }
        p.add_constraint(e.clone(), Relation::Le, 100.0).unwrap();
        p.set_objective(Sense::Minimize, e);
        let text = export_lp(&p);
        assert!(text.lines().all(|l| l.len() < 255));
        assert_eq!(parse_lp(&text).unwrap().constraints(), p.constraints());
    }

    #[test]
    fn reads_hand_written_lp() {
        let text = "\\ comment\nMaximize\n 3 x + 2 y\nst\n c1: x + y <= 4\n x - y >= -2\nBounds\n x <= 3\n y >= -1\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.num_vars(), 2);
        let x = p.var_by_name("x").unwrap();
        assert_eq!((p.variable(x).lo, p.variable(x).hi), (0.0, 3.0));
        let s = solve(&p, &SolveLimits::default()).unwrap();
        assert_eq!(s.objective, Some(11.0));
    }

    #[test]
    fn reports_line_of_error() {
        let err = parse_lp("Minimize\n x\nSubject To\n x <= $\nEnd\n").unwrap_err();
        assert_eq!(err, MilpError::LpFormat { line: 4, message: "unexpected character `$`".into() });
    }
}
