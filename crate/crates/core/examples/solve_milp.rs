//! A small knapsack with one continuous slack, solved by branch and bound.

use reqweaken::milp::{solve, LinExpr, MilpProblem, Relation, Sense, SolveLimits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut p = MilpProblem::new();
    let weights = [4.0, 3.0, 5.0, 2.0];
    let values = [7.0, 5.0, 9.0, 3.0];
    let items: Vec<_> = (0..4).map(|i| p.binary(&format!("take{i}"))).collect();
    let spare = p.continuous("spare", 0.0, 10.0);

    let mut load = LinExpr::var(spare);
    let mut gain = LinExpr::term(spare, 0.5);
    for (i, &x) in items.iter().enumerate() {
        load.add_term(x, weights[i]);
        gain.add_term(x, values[i]);
    }
    p.add_constraint(load, Relation::Le, 10.0)?;
    p.set_objective(Sense::Maximize, gain);

    let sol = solve(&p, &SolveLimits::default())?;
    println!("status {:?}, objective {:?}", sol.status, sol.objective);
    for v in items.iter().chain([&spare]) {
        println!("{} = {}", p.variable(*v).name, sol.value(*v).map_or(f64::NAN, |x| (x * 1e6).round() / 1e6 + 0.0));
    }
    Ok(())
}
