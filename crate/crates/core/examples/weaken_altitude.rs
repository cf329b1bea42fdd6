//! Every admissible weakening of an altitude requirement and what it buys.

use reqweaken::weakstl::{degree_of_weakening, instantiate, param_specs};
use reqweaken::{parse_weakstl, robustness, Polarity, Signal, Theta};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phi = parse_weakstl("G[0,2]{0,2}((alt - 5 > 0){1})")?;
    let alt = Signal::scalar("alt", &[6.0, 3.0, 5.5])?;
    let bounds: Vec<u32> = param_specs(&phi).iter().map(|p| p.bound).collect();
    println!("{phi}  bounds {bounds:?}");
    for theta in Theta::enumerate(&bounds) {
        let weak = instantiate(&phi, &theta, Polarity::Weaken)?;
        let rho = robustness(&weak, &alt, 0)?;
        let delta = degree_of_weakening(&phi, &theta, &alt, 0)?;
        println!("theta {:?}: {weak}  rho {rho:>5}  delta {delta}", theta.values());
    }
    Ok(())
}
