//! Quantitative satisfaction of an altitude requirement on a short trace.

use reqweaken::stl::Monitor;
use reqweaken::{parse_stl, robustness, satisfied, Signal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phi = parse_stl("G[0,2](alt - 5 > 0)")?;
    let alt = Signal::scalar("alt", &[6.0, 3.0, 5.5])?;
    println!("{phi}");
    println!("robustness at 0 = {}", robustness(&phi, &alt, 0)?);
    println!("satisfied = {}", satisfied(&phi, &alt, 0)?);

    // robustness of every sub-formula, per step
    let eventually = parse_stl("F[0,1](alt - 5 > 0)")?;
    let m = Monitor::default();
    for t in 0..2 {
        println!("F[0,1] at {t} = {}", m.robustness(&eventually, &alt, t)?);
    }
    Ok(())
}
