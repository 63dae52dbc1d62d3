use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use metastab::iterate::ishikawa;
use metastab::operators::gallery;
use metastab::rates::{Counterfunction, Saturation};
use metastab::runner::{run, scenario_bounds, RunOptions};
use metastab::scenario::{load_scenario, Scenario, ScenarioError, Suite};
use metastab::verify::{check_combined_omega, check_metastability_bound, CertReport, MetastabilityQuery};

const EXIT_FAIL: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_CONFIG: u8 = 64;

#[derive(Parser)]
#[command(name = "metastab", version, about = "Ishikawa iteration, effective moduli and metastability checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print every modulus and rate the scenario determines
    Bounds {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Dump the trajectory as CSV
    Iterate {
        scenario: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suites and write a JSON report
    Verify {
        scenario: PathBuf,
        /// Comma-separated suite names
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat Inconclusive outcomes as failures
        #[arg(long)]
        strict: bool,
        /// Record wall-clock time in the report
        #[arg(long)]
        timing: bool,
    },
    /// Search for a metastability witness and compare it with Σ and Ω
    Metastable {
        scenario: PathBuf,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = metastab::verify::DEFAULT_SEARCH_CAP)]
        cap: u64,
        #[arg(long)]
        strict: bool,
    },
    /// List the gallery operators
    Gallery,
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<metastab::Error> for CliError {
    fn from(e: metastab::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_report_line(r: &CertReport, sat: &Saturation) {
    let bound = r.bound.as_ref().map(|b| sat.render(b)).unwrap_or_else(|| "-".into());
    let witness = r.witness.map(|w| w.to_string()).unwrap_or_else(|| "-".into());
    println!("{:<13} {:<40} witness {:<10} bound {}", r.outcome.label(), r.name, witness, bound);
    if let metastab::verify::Outcome::Fail(d) | metastab::verify::Outcome::Inconclusive(d) = &r.outcome {
        println!("              {d}");
    }
}

fn bounds(s: &Scenario, format: Format) -> Result<u8, CliError> {
    let sat = Saturation::new(s.saturation_tau_exponent);
    let table = scenario_bounds(s, &sat);
    match format {
        Format::Json => {
            let rendered: serde_json::Map<_, _> =
                table.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(sat.render(v)))).collect();
            println!("{}", serde_json::to_string_pretty(&rendered).expect("map serializes"));
        }
        Format::Table => {
            let width = table.keys().map(String::len).max().unwrap_or(0);
            for (name, value) in &table {
                println!("{name:<width$}  {}", sat.render(value));
            }
        }
    }
    Ok(0)
}

fn iterate(s: &Scenario, steps: Option<usize>, out: &Option<PathBuf>) -> Result<u8, CliError> {
    let traj = ishikawa(&s.operator, &s.x0, &s.schedule, steps.unwrap_or(s.steps))?;
    let mut w = output(out)?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    Ok(0)
}

fn verify(s: &Scenario, suites: &[String], out: &Option<PathBuf>, strict: bool, timing: bool) -> Result<u8, CliError> {
    let suites = if suites.is_empty() {
        None
    } else {
        Some(suites.iter().map(|n| n.parse::<Suite>()).collect::<Result<BTreeSet<_>, _>>().map_err(CliError::Config)?)
    };
    let report = run(s, &RunOptions { timing, suites })?;
    let mut w = output(out)?;
    w.write_all(report.to_json_string().as_bytes())?;
    w.flush()?;
    if out.is_some() {
        for r in &report.reports {
            print_report_line(r, &report.saturation);
        }
    }
    Ok(report.exit_code(strict) as u8)
}

fn metastable(s: &Scenario, k: u64, g: &str, cap: u64, strict: bool) -> Result<u8, CliError> {
    let g: Counterfunction = g.parse().map_err(|e: metastab::Error| CliError::Config(e.to_string()))?;
    let q = MetastabilityQuery::new(k, g, cap).map_err(|e| CliError::Config(e.to_string()))?;
    let sat = Saturation::new(s.saturation_tau_exponent);
    let mut scenario = s.clone();
    scenario.queries = vec![q.clone()];
    let table = scenario_bounds(&scenario, &sat);
    let tag = format!("(k={},g={})", q.k, q.g);
    let sigma = scenario.overrides.sigma.clone().unwrap_or_else(|| table[&format!("sigma{tag}")].clone());
    let omega = scenario.overrides.omega.clone().unwrap_or_else(|| table[&format!("omega{tag}")].clone());

    let traj = ishikawa(&s.operator, &s.x0, &s.schedule, s.steps)?;
    let reports = [check_metastability_bound(&traj, &q, &sigma), check_combined_omega(&traj, &q, &omega)];
    for r in &reports {
        print_report_line(r, &sat);
    }
    Ok(if reports.iter().any(|r| r.outcome.is_fail()) {
        EXIT_FAIL
    } else if strict && reports.iter().any(|r| r.outcome.is_inconclusive()) {
        EXIT_INCONCLUSIVE
    } else {
        0
    })
}

fn list_gallery() -> Result<u8, CliError> {
    for op in gallery() {
        let classes: Vec<String> = op.classes().iter().map(ToString::to_string).collect();
        let fixed: Vec<String> = op.known_fixed_points().iter().map(ToString::to_string).collect();
        println!(
            "{:<14} L={:<4} dim={} classes=[{}] fixed=[{}]",
            op.id(),
            op.lipschitz(),
            op.domain().dim(),
            classes.join(", "),
            fixed.join(", ")
        );
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Bounds { scenario, format } => bounds(&load_scenario(scenario)?, format),
        Command::Iterate { scenario, steps, out } => iterate(&load_scenario(scenario)?, steps, &out),
        Command::Verify { scenario, suite, out, strict, timing } => {
            verify(&load_scenario(scenario)?, &suite, &out, strict, timing)
        }
        Command::Metastable { scenario, k, g, cap, strict } => metastable(&load_scenario(scenario)?, k, &g, cap, strict),
        Command::Gallery => list_gallery(),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
