//! A reduced version of the full weakening-versus-priority comparison.
//! Pass a directory to keep the CSV output.

use reqweaken::sim::{run_experiment, ExperimentOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = ExperimentOptions { count: 3, ..ExperimentOptions::default() };
    let report = run_experiment(&opts)?;
    print!("{}", report.render_summary());
    if let Some(dir) = std::env::args().nth(1) {
        report.write_dir(dir.as_ref())?;
    }
    Ok(())
}
