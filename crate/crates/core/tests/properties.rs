use proptest::prelude::*;

use reqweaken::milp::{encode_weak_robustness, solve, EncodingContext, LinExpr, MilpProblem, Sense, SignalVars, SolveLimits, Status};
use reqweaken::stl::Monitor;
use reqweaken::weakstl::{instantiate, param_specs, Theta};
use reqweaken::{parse_weakstl, robustness, Polarity, Signal, WeakFormula};

const LEN: usize = 24;

fn leaf() -> impl Strategy<Value = String> {
    (prop::sample::select(vec!["a", "b", "a - b", "2 * b + a"]), -3i32..4, prop::option::of(0u32..4))
        .prop_map(|(e, c, slack)| {
            let base = format!("({e} - {c} > 0)");
            match slack {
                Some(k) => format!("{base}{{{k}}}"),
                None => base,
            }
        })
}

fn window() -> impl Strategy<Value = String> {
    (0u32..3, 0u32..3, prop::option::of((0u32..3, 0u32..3))).prop_map(|(lo, len, slack)| {
        let hi = lo + len;
        match slack {
            Some((p, q)) => format!("[{lo},{hi}]{{{p},{q}}}"),
            None => format!("[{lo},{hi}]"),
        }
    })
}

fn formula_text() -> impl Strategy<Value = String> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("!{a}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} & {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} | {b})")),
            (window(), inner.clone()).prop_map(|(w, a)| format!("G{w}{a}")),
            (window(), inner.clone()).prop_map(|(w, a)| format!("F{w}{a}")),
        ]
    })
}

fn formula() -> impl Strategy<Value = WeakFormula> {
    formula_text().prop_filter_map("interval slack leaves an empty window", |s| parse_weakstl(&s).ok())
}

fn signal() -> impl Strategy<Value = Signal> {
    prop::collection::vec((-50i32..50, -50i32..50), LEN).prop_map(|rows| {
        let samples = rows.into_iter().map(|(a, b)| vec![a as f64 / 10.0, b as f64 / 10.0]).collect();
        Signal::new(vec!["a".into(), "b".into()], samples).unwrap()
    })
}

/// A formula with one valuation and a componentwise larger one.
fn formula_and_thetas() -> impl Strategy<Value = (WeakFormula, Vec<u32>, Vec<u32>)> {
    formula().prop_flat_map(|phi| {
        let bounds: Vec<u32> = param_specs(&phi).iter().map(|s| s.bound).collect();
        let lows = bounds.iter().map(|&b| 0..=b).collect::<Vec<_>>();
        (Just(phi), lows, Just(bounds))
            .prop_flat_map(|(phi, lo, bounds)| {
                let highs = lo.iter().zip(&bounds).map(|(&l, &b)| l..=b).collect::<Vec<_>>();
                (Just(phi), Just(lo), highs)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_theta_is_the_plain_formula(phi in formula(), s in signal()) {
        let plain = phi.strip();
        for pol in [Polarity::Weaken, Polarity::Strengthen] {
            let f = instantiate(&phi, &Theta::zeros(&phi), pol).unwrap();
            prop_assert_eq!(&f, &plain);
        }
        prop_assert!(robustness(&plain, &s, 0).is_ok());
    }

    #[test]
    fn weakening_is_monotone((phi, lo, hi) in formula_and_thetas(), s in signal()) {
        let a = Theta::for_formula(&phi, lo).unwrap();
        let b = Theta::for_formula(&phi, hi).unwrap();
        let w = |t: &Theta| instantiate(&phi, t, Polarity::Weaken).and_then(|f| Ok(robustness(&f, &s, 0)?));
        let st = |t: &Theta| instantiate(&phi, t, Polarity::Strengthen).and_then(|f| Ok(robustness(&f, &s, 0)?));
        if let (Ok(ra), Ok(rb)) = (w(&a), w(&b)) {
            prop_assert!(ra <= rb + 1e-9, "weaken {} > {}", ra, rb);
        }
        if let (Ok(ra), Ok(rb)) = (st(&a), st(&b)) {
            prop_assert!(rb <= ra + 1e-9, "strengthen {} > {}", rb, ra);
        }
    }

    #[test]
    fn negation_swaps_polarity((phi, th, _) in formula_and_thetas(), s in signal()) {
        let theta = Theta::for_formula(&phi, th).unwrap();
        let neg = WeakFormula::not(phi.clone());
        if let (Ok(n), Ok(f)) = (instantiate(&neg, &theta, Polarity::Weaken), instantiate(&phi, &theta, Polarity::Strengthen)) {
            let rn = robustness(&n, &s, 0).unwrap();
            let rf = robustness(&f, &s, 0).unwrap();
            prop_assert!((rn + rf).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixed_theta_encoding_matches_monitor((phi, th, _) in formula_and_thetas(), s in signal()) {
        let theta = Theta::for_formula(&phi, th.clone()).unwrap();
        let Ok(inst) = instantiate(&phi, &theta, Polarity::Weaken) else { return Ok(()) };
        let ctx = EncodingContext::default();
        let want = Monitor::new(ctx.big_m).robustness(&inst, &s, 0).unwrap();
        let mut p = MilpProblem::new();
        let sig = SignalVars::fixed(&mut p, &s);
        let (rho, vars) = encode_weak_robustness(&mut p, &phi, &sig, 0, &ctx).unwrap();
        for (&v, &x) in vars.vars.iter().zip(&th) {
            p.fix(v, x as f64);
        }
        for sense in [Sense::Minimize, Sense::Maximize] {
            p.set_objective(sense, LinExpr::var(rho));
            let sol = solve(&p, &SolveLimits::default()).unwrap();
            prop_assert_eq!(sol.status, Status::Sat);
            let got = sol.value(rho).unwrap();
            prop_assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{} vs {} for {}", got, want, inst);
        }
    }
}
