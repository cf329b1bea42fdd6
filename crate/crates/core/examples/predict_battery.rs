//! Predicted signal of the delivery drone under a fixed command sequence.

use reqweaken::env::drone::{delivery_actions, organ_delivery_model, DeliveryParams};
use reqweaken::env::ActionSequence;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts = organ_delivery_model(&DeliveryParams::default())?;
    let q = ts.state_from(&[
        ("distance_to_dest", 120.0),
        ("battery", 12.0),
        ("is_landing", 0.0),
        ("curr_speed", 8.0),
        ("remaining_delivery_time", 20.0),
        ("required_speed", 6.0),
    ])?;
    let plan = ActionSequence(vec![
        delivery_actions(10.0, false),
        delivery_actions(10.0, false),
        delivery_actions(0.0, true),
        delivery_actions(0.0, true),
    ]);
    let s = ts.predict(&q, &plan)?;
    println!("{}", s.variables().join("\t"));
    for sample in s.samples() {
        let row: Vec<String> = sample.iter().map(|v| format!("{v:.2}")).collect();
        println!("{}", row.join("\t"));
    }
    Ok(())
}
