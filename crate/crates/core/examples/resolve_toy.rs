//! Two features pull a point in opposite directions; the resolver finds the
//! cheapest weakening that lets both requirements hold.

use reqweaken::env::parse_model;
use reqweaken::resolver::{resolve, FeatureAction, FeatureSpec, Outcome, ResolveOptions};
use reqweaken::Signal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts = parse_model("state x in [-10, 10]; action v in [-1, 1]; next(x) = x + v;")?;
    let up = FeatureSpec::parse("feature = up\nspace = motion\nrequirement = G[2,2]((x > 1){2})\n")?;
    let down = FeatureSpec::parse("feature = down\nspace = motion\nrequirement = G[2,2]((x < -1){2})\n")?;
    let past = Signal::scalar("x", &[0.0])?;
    let fallback = FeatureAction::vector("up", "motion", vec![1.0]);

    let r = resolve(&up, &down, &ts, &past, &fallback, &ResolveOptions::default())?;
    match &r.outcome {
        Outcome::Weakened(plan) => {
            println!("theta up {:?}, down {:?}", plan.theta[0].values(), plan.theta[1].values());
            println!("delta {:?}", plan.delta);
            for (k, a) in plan.actions.0.iter().enumerate() {
                println!("step {k}: v = {}", a.0[0]);
            }
        }
        other => println!("{other:?}"),
    }
    if let Some(s) = r.stats {
        println!("{} nodes in {:?}", s.nodes, s.wall_time);
    }
    Ok(())
}
