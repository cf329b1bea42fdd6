//! One generated delivery scenario under each resolution mode.

use reqweaken::sim::{generate_scenarios, run_scenario, CaseStudy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = CaseStudy::OrganDelivery;
    let base = generate_scenarios(case, 2, 2024).pop().unwrap();
    for mode in case.modes() {
        let (_, m) = run_scenario(&base.with_mode(mode.clone()))?;
        print!("{:<24} {} after {} steps", mode.to_string(), m.ending, m.steps);
        for f in &m.features {
            print!("  {} avg {:.2} min {:.2}", f.feature, f.average, f.minimum);
        }
        println!("  overall {:?}", m.overall.map(|x| (x * 1e4).round() / 1e4));
    }
    Ok(())
}
