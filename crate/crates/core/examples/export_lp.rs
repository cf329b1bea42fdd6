//! Writes the weakening problem of the toy conflict in LP format and reads
//! it back.

use reqweaken::env::parse_model;
use reqweaken::milp::{encode_resolution, export_lp, parse_lp, solve, EncodingContext, SolveLimits};
use reqweaken::{parse_weakstl, Signal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts = parse_model("state x in [-10, 10]; action v in [-1, 1]; next(x) = x + v;")?;
    let phi = parse_weakstl("G[2,2]((x > 1){2})")?;
    let psi = parse_weakstl("G[2,2]((x < -1){2})")?;
    let past = Signal::scalar("x", &[0.0])?;
    let enc = encode_resolution(&phi, &psi, &ts, &past, 2, &EncodingContext::default())?;

    let text = export_lp(&enc.problem);
    print!("{text}");
    let back = parse_lp(&text)?;
    let sol = solve(&back, &SolveLimits::default())?;
    eprintln!("re-read problem: {:?}, objective {:?}", sol.status, sol.objective);
    Ok(())
}
