//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are still evaluated and reported; they do
//! not fail the process. The README explains each of them.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reqweaken::env::parse_model;
use reqweaken::milp::{
    encode_robustness, solve, EncodingContext, LinExpr, MilpProblem, Relation, Sense, SignalVars, SolveLimits, Status,
    VarId,
};
use reqweaken::resolver::{resolve, FeatureAction, FeatureSpec, Outcome, ResolveOptions};
use reqweaken::sim::{generate_scenarios, run_experiment, CaseStudy, ExperimentOptions, ExperimentReport, Setup};
use reqweaken::stl::Monitor;
use reqweaken::weakstl::{instantiate, param_specs, Theta};
use reqweaken::{parse_stl, parse_weakstl, robustness, Polarity, Signal};

const KNOWN_RED: &[u32] = &[5];

struct Verdict {
    pass: bool,
    /// False when the failure lies outside what `KNOWN_RED` excuses.
    excusable: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, excusable: true, detail: detail.into() }
}

fn within(t: Duration, budget: Duration) -> bool {
    t < budget
}

// 1 ------------------------------------------------------------------------

fn golden() -> Verdict {
    let start = Instant::now();
    let alt = Signal::scalar("alt", &[6.0, 3.0, 5.5]).unwrap();
    let rho = robustness(&parse_stl("G[0,2](alt - 5 > 0)").unwrap(), &alt, 0).unwrap();
    let weak = parse_weakstl("G[0,2]{0,2}(alt - 5 > 0)").unwrap();
    let theta = Theta::for_formula(&weak, vec![0, 2]).unwrap();
    let rho_theta = robustness(&instantiate(&weak, &theta, Polarity::Weaken).unwrap(), &alt, 0).unwrap();
    let delta = reqweaken::weakstl::degree_of_weakening(&weak, &theta, &alt, 0).unwrap();
    let t = start.elapsed();
    verdict(
        rho == -2.0 && rho_theta == 1.0 && delta == 3.0 && within(t, Duration::from_secs(1)),
        format!("rho={rho:?} rho_theta={rho_theta:?} delta={delta:?} in {t:.2?}"),
    )
}

// 2 ------------------------------------------------------------------------

fn atom(rng: &mut ChaCha8Rng) -> String {
    let c = rng.gen_range(-4..=4);
    match rng.gen_range(0..4) {
        0 => format!("(a - {c} > 0)"),
        1 => format!("(b < {c})"),
        2 => format!("(a + b >= {c})"),
        _ => format!("(2 * a - b <= {c})"),
    }
}

/// Random STL text of operator depth at most `depth` and horizon at most `budget`.
fn random_formula(rng: &mut ChaCha8Rng, depth: u32, budget: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return atom(rng);
    }
    let window = |rng: &mut ChaCha8Rng| {
        let hi = rng.gen_range(0..=budget);
        (rng.gen_range(0..=hi), hi)
    };
    match rng.gen_range(0..6) {
        0 => format!("!{}", random_formula(rng, depth - 1, budget)),
        1 => format!("({} & {})", random_formula(rng, depth - 1, budget), random_formula(rng, depth - 1, budget)),
        2 => format!("({} | {})", random_formula(rng, depth - 1, budget), random_formula(rng, depth - 1, budget)),
        k => {
            let (lo, hi) = window(rng);
            let rest = budget - hi;
            match k {
                3 => format!("G[{lo},{hi}]{}", random_formula(rng, depth - 1, rest)),
                4 => format!("F[{lo},{hi}]{}", random_formula(rng, depth - 1, rest)),
                _ => format!("({} U[{lo},{hi}] {})", random_formula(rng, depth - 1, rest), random_formula(rng, depth - 1, rest)),
            }
        }
    }
}

fn encoding_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ctx = EncodingContext::default();
    let monitor = Monitor::new(ctx.big_m);
    let (mut checked, mut worst) = (0, 0.0f64);
    let mut failure = None;
    while checked < 500 {
        let phi = parse_stl(&random_formula(&mut rng, 3, 4)).unwrap();
        let h = phi.horizon();
        let len = rng.gen_range(h + 1..=6);
        let samples = (0..len).map(|_| vec![rng.gen_range(-40..=40) as f64 / 8.0, rng.gen_range(-40..=40) as f64 / 8.0]).collect();
        let s = Signal::new(vec!["a".into(), "b".into()], samples).unwrap();
        let t = rng.gen_range(0..=len - 1 - h);
        let want = monitor.robustness(&phi, &s, t).unwrap();
        let mut p = MilpProblem::new();
        let sig = SignalVars::fixed(&mut p, &s);
        let rho = encode_robustness(&mut p, &phi, &sig, t, &ctx).unwrap();
        for sense in [Sense::Minimize, Sense::Maximize] {
            p.set_objective(sense, LinExpr::var(rho));
            let sol = solve(&p, &SolveLimits::default()).unwrap();
            let got = sol.value(rho).unwrap_or(f64::NAN);
            let err = (got - want).abs();
            worst = worst.max(err);
            if !(err <= 1e-6) && failure.is_none() {
                failure = Some(format!("{phi} at t={t}: milp {got} monitor {want}"));
            }
        }
        checked += 1;
    }
    let t = start.elapsed();
    let pass = failure.is_none() && within(t, Duration::from_secs(60));
    verdict(pass, failure.unwrap_or_else(|| format!("{checked} formulas, max |error| {worst:.1e}, {t:.2?}")))
}

// 3 ------------------------------------------------------------------------

struct RandomMilp {
    problem: MilpProblem,
    bins: Vec<VarId>,
    conts: Vec<VarId>,
}

fn random_milp(rng: &mut ChaCha8Rng) -> RandomMilp {
    let mut p = MilpProblem::new();
    let bins: Vec<VarId> = (0..rng.gen_range(1..=10)).map(|i| p.binary(&format!("b{i}"))).collect();
    let conts: Vec<VarId> = (0..rng.gen_range(0..=2))
        .map(|i| {
            let lo = rng.gen_range(-5..=0) as f64;
            p.continuous(&format!("x{i}"), lo, lo + rng.gen_range(1..=8) as f64)
        })
        .collect();
    let all: Vec<VarId> = bins.iter().chain(&conts).copied().collect();
    for _ in 0..rng.gen_range(1..=6) {
        let mut e = LinExpr::new();
        for &v in &all {
            if rng.gen_bool(0.6) {
                e.add_term(v, rng.gen_range(-5..=5) as f64);
            }
        }
        let rel = match rng.gen_range(0..10) {
            0 => Relation::Eq,
            1..=5 => Relation::Le,
            _ => Relation::Ge,
        };
        p.add_constraint(e, rel, rng.gen_range(-6..=6) as f64).unwrap();
    }
    let mut obj = LinExpr::new();
    for &v in &all {
        obj.add_term(v, rng.gen_range(-6..=6) as f64);
    }
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    p.set_objective(sense, obj);
    RandomMilp { problem: p, bins, conts }
}

/// Optimum by enumerating every binary assignment; the continuous part (at
/// most two variables in a box) is solved by checking every vertex.
fn enumerate(m: &RandomMilp) -> Option<f64> {
    let p = &m.problem;
    let n = p.num_vars();
    let better = |a: f64, b: f64| if p.sense() == Sense::Minimize { a < b } else { a > b };
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << m.bins.len()) {
        let mut x = vec![0.0; n];
        for (k, &b) in m.bins.iter().enumerate() {
            x[b.0] = ((mask >> k) & 1) as f64;
        }
        // lines a . y = r over the continuous variables
        let mut lines: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in p.constraints() {
            let coef: Vec<f64> = m.conts.iter().map(|v| c.lhs.terms().iter().filter(|t| t.0 == *v).map(|t| t.1).sum()).collect();
            // continuous entries of x are still zero here
            lines.push((coef, c.rhs - c.lhs.eval(&x)));
        }
        for (i, v) in m.conts.iter().enumerate() {
            let var = p.variable(*v);
            for bound in [var.lo, var.hi] {
                let mut coef = vec![0.0; m.conts.len()];
                coef[i] = 1.0;
                lines.push((coef, bound));
            }
        }
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        match m.conts.len() {
            0 => candidates.push(vec![]),
            1 => candidates.extend(lines.iter().filter(|l| l.0[0].abs() > 1e-12).map(|l| vec![l.1 / l.0[0]])),
            _ => {
                for i in 0..lines.len() {
                    for j in i + 1..lines.len() {
                        let ((a, r), (b, s)) = (&lines[i], &lines[j]);
                        let det = a[0] * b[1] - a[1] * b[0];
                        if det.abs() > 1e-12 {
                            candidates.push(vec![(r * b[1] - a[1] * s) / det, (a[0] * s - r * b[0]) / det]);
                        }
                    }
                }
            }
        }
        for y in candidates {
            for (v, val) in m.conts.iter().zip(&y) {
                x[v.0] = *val;
            }
            let in_box = m.conts.iter().all(|v| {
                let var = p.variable(*v);
                x[v.0] >= var.lo - 1e-9 && x[v.0] <= var.hi + 1e-9
            });
            if in_box && p.max_violation(&x) <= 1e-9 {
                let f = p.objective().eval(&x);
                if best.is_none_or(|b| better(f, b)) {
                    best = Some(f);
                }
            }
        }
    }
    best
}

fn solver_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut sat, mut unsat) = (0, 0);
    let mut failure = None;
    for k in 0..150 {
        let m = random_milp(&mut rng);
        let want = enumerate(&m);
        let sol = solve(&m.problem, &SolveLimits::default()).unwrap();
        let ok = match (want, sol.status) {
            (None, Status::Unsat) => {
                unsat += 1;
                true
            }
            (Some(w), Status::Sat) => {
                sat += 1;
                (sol.objective.unwrap() - w).abs() <= 1e-6
            }
            _ => false,
        };
        if !ok && failure.is_none() {
            failure = Some(format!("instance {k}: enumeration {want:?}, solver {:?} {:?}", sol.status, sol.objective));
        }
    }
    let t = start.elapsed();
    let pass = failure.is_none() && within(t, Duration::from_secs(60));
    verdict(pass, failure.unwrap_or_else(|| format!("150 MILPs ({sat} sat, {unsat} unsat) match enumeration, {t:.2?}")))
}

// 4 ------------------------------------------------------------------------

struct ToyCase {
    phi: String,
    psi: String,
    x0: f64,
}

fn toy_family(rng: &mut ChaCha8Rng) -> ToyCase {
    let op = |rng: &mut ChaCha8Rng| ["G[2,2]", "G[1,2]", "F[1,2]", "G[1,2]{0,1}", "F[1,1]{1,1}"][rng.gen_range(0..5)];
    let thr = |rng: &mut ChaCha8Rng| rng.gen_range(0..=6) as f64 / 2.0;
    ToyCase {
        phi: format!("{}((x > {}){{{}}})", op(rng), thr(rng), rng.gen_range(0..=3)),
        psi: format!("{}((x < -{}){{{}}})", op(rng), thr(rng), rng.gen_range(0..=3)),
        x0: rng.gen_range(-2..=2) as f64 / 2.0,
    }
}

struct Brute {
    delta: f64,
    theta: (Vec<u32>, Vec<u32>),
}

fn thetas(bounds: &[u32]) -> Vec<Vec<u32>> {
    bounds.iter().fold(vec![vec![]], |acc, &b| {
        acc.into_iter().flat_map(|v| (0..=b).map(move |x| [v.clone(), vec![x]].concat())).collect()
    })
}

fn brute_force(case: &ToyCase) -> Option<Brute> {
    let phi = parse_weakstl(&case.phi).unwrap();
    let psi = parse_weakstl(&case.psi).unwrap();
    let grid: Vec<f64> = (-10..=10).map(|k| k as f64 / 10.0).collect();
    let bounds = |f| param_specs(f).iter().map(|p| p.bound).collect::<Vec<_>>();
    let mut best: Option<Brute> = None;
    for ta in thetas(&bounds(&phi)) {
        for tb in thetas(&bounds(&psi)) {
            let fa = instantiate(&phi, &Theta::for_formula(&phi, ta.clone()).unwrap(), Polarity::Weaken).unwrap();
            let fb = instantiate(&psi, &Theta::for_formula(&psi, tb.clone()).unwrap(), Polarity::Weaken).unwrap();
            for &v0 in &grid {
                for &v1 in &grid {
                    let x1 = (case.x0 + v0).clamp(-10.0, 10.0);
                    let x2 = (x1 + v1).clamp(-10.0, 10.0);
                    let s = Signal::scalar("x", &[case.x0, x1, x2]).unwrap();
                    let (ra, rb) = (robustness(&fa, &s, 0).unwrap(), robustness(&fb, &s, 0).unwrap());
                    if ra < -1e-9 || rb < -1e-9 {
                        continue;
                    }
                    let d = ra - robustness(&phi.strip(), &s, 0).unwrap() + rb - robustness(&psi.strip(), &s, 0).unwrap();
                    let key = (ta.clone(), tb.clone());
                    let improves = match &best {
                        None => true,
                        Some(b) => d < b.delta - 1e-9 || ((d - b.delta).abs() <= 1e-9 && key < b.theta),
                    };
                    if improves {
                        best = Some(Brute { delta: d, theta: key });
                    }
                }
            }
        }
    }
    best
}

fn resolution_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ts = parse_model("state x in [-10, 10]; action v in [-1, 1]; next(x) = x + v;").unwrap();
    let (mut weakened, mut fallbacks) = (0, 0);
    let mut failure = None;
    for k in 0..60 {
        let case = toy_family(&mut rng);
        let f1 = FeatureSpec::parse(&format!("feature = a\nspace = motion\nrequirement = {}\n", case.phi)).unwrap();
        let f2 = FeatureSpec::parse(&format!("feature = b\nspace = motion\nrequirement = {}\n", case.psi)).unwrap();
        let past = Signal::scalar("x", &[case.x0]).unwrap();
        let fb = FeatureAction::vector("a", "motion", vec![1.0]);
        let r = resolve(&f1, &f2, &ts, &past, &fb, &ResolveOptions::default()).unwrap();
        let want = brute_force(&case);
        let ok = match (&r.outcome, &want) {
            (Outcome::Fallback(_), None) => {
                fallbacks += 1;
                true
            }
            (Outcome::Weakened(plan), Some(b)) => {
                weakened += 1;
                let d = plan.delta[0] + plan.delta[1];
                (d - b.delta).abs() <= 1e-6 && (plan.theta[0].values(), plan.theta[1].values()) == (&b.theta.0[..], &b.theta.1[..])
            }
            _ => false,
        };
        if !ok && failure.is_none() {
            let got = r.plan().map(|p| (p.theta[0].values().to_vec(), p.theta[1].values().to_vec(), p.delta));
            let want = want.map(|b| (b.theta, b.delta));
            failure = Some(format!("case {k} {} / {} x0={}: resolve {got:?}, brute force {want:?}", case.phi, case.psi, case.x0));
        }
    }
    let t = start.elapsed();
    let pass = failure.is_none() && within(t, Duration::from_secs(30));
    verdict(pass, failure.unwrap_or_else(|| format!("60 toy conflicts ({weakened} weakened, {fallbacks} fallback) match brute force, {t:.2?}")))
}

// 5-8 ----------------------------------------------------------------------

const SEED: u64 = 2024;
const COUNT: usize = 25;

fn mean_overall(r: &ExperimentReport, case: CaseStudy, mode: &reqweaken::sim::Mode) -> f64 {
    r.summary(case, mode).and_then(|s| s.mean_overall).unwrap_or(f64::NAN)
}

/// Only the surveillance comparison may be excused; everything else here is
/// a hard requirement.
fn h1(r: &ExperimentReport, rerun_identical: bool) -> Verdict {
    let mut hard = rerun_identical && within(r.wall_time, Duration::from_secs(600));
    let mut soft = true;
    let mut parts = Vec::new();
    for case in [CaseStudy::OrganDelivery, CaseStudy::Surveillance] {
        let rows = r.rows.iter().filter(|x| x.case == case.to_string()).count();
        hard &= rows == COUNT * 4 && r.rows.iter().all(|x| x.error.is_none());
        let weak = mean_overall(r, case, &case.primary_mode());
        let mut s = format!("{case}: {} {weak:.4}", case.primary_mode());
        for m in case.modes().into_iter().filter(|m| !m.is_weakening()) {
            let p = mean_overall(r, case, &m);
            let holds = weak >= p - 1e-6;
            match case {
                CaseStudy::Surveillance => soft &= holds,
                _ => hard &= holds,
            }
            s += &format!(" vs {m} {p:.4}");
        }
        parts.push(s);
    }
    parts.push(format!("rerun identical: {rerun_identical}, {:.1?}", r.wall_time));
    Verdict { pass: hard && soft, excusable: hard, detail: parts.join("; ") }
}

fn minimal_guarantee(r: &ExperimentReport) -> Verdict {
    let organ = CaseStudy::OrganDelivery.to_string();
    let sat_runs: Vec<_> =
        r.rows.iter().filter(|x| x.case == organ && x.mode.starts_with("weakening") && x.resolutions > 0 && x.unsat == 0).collect();
    let worst_land = sat_runs.iter().filter_map(|x| x.minimal_min_a).fold(f64::INFINITY, f64::min);
    let organ_ok = !sat_runs.is_empty() && worst_land >= -1e-6;

    let cornered: Vec<usize> = generate_scenarios(CaseStudy::Surveillance, COUNT, SEED)
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(&c.setup, Setup::Surveillance(s) if s.cornered))
        .map(|(i, _)| i)
        .collect();
    let surv = CaseStudy::Surveillance.to_string();
    let unsat_cornered = r
        .rows
        .iter()
        .filter(|x| x.case == surv && x.mode.starts_with("weakening") && x.unsat > 0 && cornered.contains(&x.scenario))
        .count();
    verdict(
        organ_ok && unsat_cornered > 0,
        format!(
            "{} all-SAT organ runs, worst minimal landing robustness {worst_land:.4}; {unsat_cornered} cornered surveillance runs hit UNSAT fallback",
            sat_runs.len()
        ),
    )
}

fn overhead(r: &ExperimentReport) -> Verdict {
    let (mut n, mut total) = (0usize, Duration::ZERO);
    let mut parts = Vec::new();
    for s in r.summaries.iter().filter(|s| s.resolutions > 0) {
        let mean = s.mean_solve.unwrap();
        n += s.resolutions;
        total += mean * s.resolutions as u32;
        parts.push(format!("{} {} {:.1} ms", s.case, s.mode, mean.as_secs_f64() * 1e3));
    }
    let mean = total.as_secs_f64() / n.max(1) as f64;
    verdict(n > 0 && mean < 0.5, format!("mean {:.1} ms over {n} resolutions ({})", mean * 1e3, parts.join(", ")))
}

fn closure(r: &ExperimentReport) -> Verdict {
    let sat: usize = r.rows.iter().map(|x| x.weakened).sum();
    let failures: usize = r.rows.iter().map(|x| x.closure_failures).sum();
    verdict(sat > 0 && failures == 0, format!("{sat} SAT resolutions replayed, {failures} missed a weakened requirement"))
}

fn main() {
    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "golden robustness", golden()),
        (2, "encoding oracle", encoding_oracle()),
        (3, "solver oracle", solver_oracle()),
        (4, "resolution oracle", resolution_oracle()),
    ];
    let opts = ExperimentOptions { count: COUNT, seed: SEED, ..ExperimentOptions::default() };
    let report = run_experiment(&opts).expect("experiment runs");
    let again = run_experiment(&ExperimentOptions { workers: Some(2), ..opts }).expect("experiment runs");
    let csv = |r: &ExperimentReport| {
        let mut buf = Vec::new();
        r.write_results(&mut buf).unwrap();
        buf
    };
    let identical = csv(&report) == csv(&again);
    print!("{}", report.render_summary());
    results.push((5, "H1 weakening vs priority", h1(&report, identical)));
    results.push((6, "minimal-requirement guarantee", minimal_guarantee(&report)));
    results.push((7, "overhead budget", overhead(&report)));
    results.push((8, "end-to-end closure", closure(&report)));

    let mut unexpected = Vec::new();
    for (n, name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {tag} {name}: {}", v.detail);
        if !v.pass && !(KNOWN_RED.contains(n) && v.excusable) {
            unexpected.push(*n);
        }
        if v.pass && KNOWN_RED.contains(n) {
            println!("note: criterion {n} is listed as known red but passed");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
