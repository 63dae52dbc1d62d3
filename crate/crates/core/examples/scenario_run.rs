//! Build a scenario from TOML text and run every suite on it.

use metastab::runner::{run, RunOptions};
use metastab::scenario::parse_scenario;

const SCENARIO: &str = r#"
operator = "strict-k13"
x0 = [0.8]
steps = 5000
seed = 3

[[queries]]
k = 1
g = "affine(2,1)"
"#;

fn main() {
    let scenario = match parse_scenario(SCENARIO, "inline") {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(64);
        }
    };
    let report = run(&scenario, &RunOptions::default()).expect("scenario runs");
    for r in &report.reports {
        println!("{:<13} {}", r.outcome.label(), r.name);
    }
    println!("K = {}", report.saturation.render(&report.bounds["K"]));
    println!("exit code {}", report.exit_code(false));
}
