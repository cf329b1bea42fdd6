//! Big-M building blocks: min/max selection and binary-guarded equality.

use super::{LinExpr, MilpError, MilpProblem, Relation, VarId};

/// New variable equal to `min(exprs)`, with M per branch taken from bounds.
pub fn add_min(p: &mut MilpProblem, name: &str, exprs: &[LinExpr]) -> Result<VarId, MilpError> {
    select(p, name, exprs, true)
}

/// New variable equal to `max(exprs)`.
pub fn add_max(p: &mut MilpProblem, name: &str, exprs: &[LinExpr]) -> Result<VarId, MilpError> {
    select(p, name, exprs, false)
}

fn select(p: &mut MilpProblem, name: &str, exprs: &[LinExpr], is_min: bool) -> Result<VarId, MilpError> {
    if exprs.is_empty() {
        return Err(MilpError::Encoding(format!("{name}: empty selection")));
    }
    let ranges: Vec<(f64, f64)> = exprs.iter().map(|e| p.bounds_of(e)).collect();
    let (lo, hi) = if is_min {
        (
            ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
            ranges.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        )
    } else {
        (
            ranges.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
            ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
        )
    };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(MilpError::Encoding(format!("{name}: unbounded operand")));
    }
    let out = p.continuous(name, lo, hi);
    if exprs.len() == 1 {
        p.add_constraint(LinExpr::var(out).minus(&exprs[0]), Relation::Eq, 0.0)?;
        return Ok(out);
    }
    // A branch whose range cannot reach the selected value never gets picked.
    let live: Vec<usize> = (0..exprs.len())
        .filter(|&i| if is_min { ranges[i].0 <= hi } else { ranges[i].1 >= lo })
        .collect();
    let mut pick = LinExpr::new();
    for (i, e) in exprs.iter().enumerate() {
        let diff = LinExpr::var(out).minus(e);
        // min: out <= e_i ; max: out >= e_i
        p.add_constraint(diff.clone(), if is_min { Relation::Le } else { Relation::Ge }, 0.0)?;
        if !live.contains(&i) {
            continue;
        }
        if live.len() == 1 {
            p.add_constraint(diff, Relation::Eq, 0.0)?;
            continue;
        }
        let b = p.binary(&format!("{name}_sel"));
        pick.add_term(b, 1.0);
        // min: out >= e_i - M (1 - b) ; max: out <= e_i + M (1 - b)
        if is_min {
            let m = ranges[i].1 - lo;
            p.add_constraint(diff.with_term(b, -m), Relation::Ge, -m)?;
        } else {
            let m = hi - ranges[i].0;
            p.add_constraint(diff.with_term(b, m), Relation::Le, m)?;
        }
    }
    if live.len() > 1 {
        p.add_constraint(pick, Relation::Eq, 1.0)?;
    }
    Ok(out)
}

/// Enforces `target = if guard then when_set else when_clear` with four
/// big-M inequalities.
pub fn add_switch(
    p: &mut MilpProblem,
    target: &LinExpr,
    guard: VarId,
    when_set: &LinExpr,
    when_clear: &LinExpr,
) -> Result<(), MilpError> {
    let d1 = target.clone().minus(when_set);
    let d0 = target.clone().minus(when_clear);
    let m1 = abs_max(p.bounds_of(&d1));
    let m0 = abs_max(p.bounds_of(&d0));
    // guard = 1: d1 = 0
    p.add_constraint(d1.clone().with_term(guard, m1), Relation::Le, m1)?;
    p.add_constraint(d1.with_term(guard, -m1), Relation::Ge, -m1)?;
    // guard = 0: d0 = 0
    p.add_constraint(d0.clone().with_term(guard, -m0), Relation::Le, 0.0)?;
    p.add_constraint(d0.with_term(guard, m0), Relation::Ge, 0.0)?;
    Ok(())
}

fn abs_max((lo, hi): (f64, f64)) -> f64 {
    lo.abs().max(hi.abs())
}
