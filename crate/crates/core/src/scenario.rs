//! Scenario files: a gallery operator, a starting point, a weight schedule and
//! the checks to run, written as TOML.
//!
//! ```toml
//! operator = "cubic"
//! x0 = [0.9]
//! steps = 20000
//! seed = 7
//! suites = ["lemmas", "liminf", "metastability"]
//!
//! [schedule]
//! label = "canonical"
//!
//! [[queries]]
//! k = 0
//! g = "const(0)"
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::numkernel::{AmbientSet, Point, SetKind};
use crate::operators::{gallery_operator, OperatorSpec, DEFAULT_CERT_SAMPLES, DEFAULT_CERT_SLACK, TOL_DOM};
use crate::rates::{BoundNat, Counterfunction, DEFAULT_TAU_EXPONENT};
use crate::schedule::{canonical_schedule, verify_schedule, WeightSchedule, WeightSequence};
use crate::verify::{MetastabilityQuery, DEFAULT_SEARCH_CAP};

pub const TAU_ENV: &str = "METASTAB_TAU_EXP";
pub const DEFAULT_STEPS: usize = 20_000;
/// Prefix on which the schedule is validated at load time.
pub const SCHEDULE_CHECK_N: u64 = 7;
pub const SCHEDULE_CHECK_K: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Certify,
    Lemmas,
    Fejer,
    Closedness,
    Liminf,
    Metastability,
    Combined,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Certify,
        Suite::Lemmas,
        Suite::Fejer,
        Suite::Closedness,
        Suite::Liminf,
        Suite::Metastability,
        Suite::Combined,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Certify => "certify",
            Suite::Lemmas => "lemmas",
            Suite::Fejer => "fejer",
            Suite::Closedness => "closedness",
            Suite::Liminf => "liminf",
            Suite::Metastability => "metastability",
            Suite::Combined => "combined",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s.trim())
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// Load failures, each with a stable code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ScenarioError {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Io,
    Parse,
    UnknownOperator,
    X0NotInDomain,
    ScheduleInvalid,
    DimensionMismatch,
    BadCounterfunction,
    SetMismatch,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Io => "io-error",
            ErrorCode::Parse => "parse-error",
            ErrorCode::UnknownOperator => "unknown-operator",
            ErrorCode::X0NotInDomain => "x0-not-in-domain",
            ErrorCode::ScheduleInvalid => "schedule-invalid",
            ErrorCode::DimensionMismatch => "dimension-mismatch",
            ErrorCode::BadCounterfunction => "bad-counterfunction",
            ErrorCode::SetMismatch => "set-mismatch",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn err(code: ErrorCode, message: impl Into<String>) -> ScenarioError {
    ScenarioError { code, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative slack for trajectory inequalities, scaled by `1 + ‖xₙ‖²`.
    pub slack: f64,
    pub cert_slack: f64,
    pub cert_samples: usize,
    pub fejer_probes: usize,
    pub closedness_samples: usize,
    pub closedness_k_max: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slack: 1e-9,
            cert_slack: DEFAULT_CERT_SLACK,
            cert_samples: DEFAULT_CERT_SAMPLES,
            fejer_probes: 20,
            closedness_samples: 1000,
            closedness_k_max: 5,
        }
    }
}

/// `(n, m, r)` values for the window Fejér check.
#[derive(Debug, Clone, PartialEq)]
pub struct FejerGrid {
    pub n: Vec<u64>,
    pub m: Vec<u64>,
    pub r: Vec<u64>,
}

impl Default for FejerGrid {
    fn default() -> Self {
        Self { n: vec![0, 10], m: vec![0, 1, 3], r: vec![0, 2] }
    }
}

/// Replacement bounds, used to exercise the failure path of the comparisons.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub sigma: Option<BoundNat>,
    pub omega: Option<BoundNat>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub operator: OperatorSpec,
    pub x0: Point,
    pub steps: usize,
    pub seed: u64,
    pub schedule: WeightSchedule,
    pub queries: Vec<MetastabilityQuery>,
    pub liminf_l: Vec<u64>,
    pub liminf_k: Vec<u64>,
    pub fejer: FejerGrid,
    pub suites: BTreeSet<Suite>,
    pub tolerances: Tolerances,
    pub saturation_tau_exponent: u32,
    pub overrides: Overrides,
}

impl Scenario {
    /// A scenario with every default and all suites for a gallery operator.
    pub fn for_operator(id: &str, x0: Point) -> Result<Self, ScenarioError> {
        let operator = gallery_operator(id).ok_or_else(|| err(ErrorCode::UnknownOperator, id))?;
        check_start(&operator, &x0)?;
        Ok(Self {
            name: id.to_string(),
            operator,
            x0,
            steps: DEFAULT_STEPS,
            seed: 0,
            schedule: canonical_schedule(),
            queries: default_queries(),
            liminf_l: vec![0, 5, 10],
            liminf_k: vec![0, 1, 2, 3],
            fejer: FejerGrid::default(),
            suites: Suite::ALL.into_iter().collect(),
            tolerances: Tolerances::default(),
            saturation_tau_exponent: DEFAULT_TAU_EXPONENT,
            overrides: Overrides::default(),
        })
    }
}

fn default_queries() -> Vec<MetastabilityQuery> {
    let mut out = Vec::new();
    for k in 0..3 {
        for g in [Counterfunction::Const(0), Counterfunction::Const(5), Counterfunction::Affine(1, 1)] {
            out.push(MetastabilityQuery { k, g, search_cap: DEFAULT_SEARCH_CAP });
        }
    }
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    operator: String,
    x0: Vec<f64>,
    steps: Option<usize>,
    seed: Option<u64>,
    set: Option<SetKind>,
    schedule: Option<RawSchedule>,
    queries: Option<Vec<RawQuery>>,
    liminf: Option<RawLiminf>,
    fejer: Option<RawFejer>,
    suites: Option<Vec<String>>,
    tolerances: Option<RawTolerances>,
    saturation_tau_exponent: Option<u32>,
    overrides: Option<RawOverrides>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    label: Option<String>,
    alpha: Option<String>,
    beta: Option<String>,
    rate_beta: Option<String>,
    rate_theta: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery {
    k: u64,
    g: String,
    cap: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLiminf {
    l: Vec<u64>,
    k: Vec<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFejer {
    n: Vec<u64>,
    m: Vec<u64>,
    r: Vec<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    slack: Option<f64>,
    cert_slack: Option<f64>,
    cert_samples: Option<usize>,
    fejer_probes: Option<usize>,
    closedness_samples: Option<usize>,
    closedness_k_max: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverrides {
    sigma: Option<String>,
    omega: Option<String>,
}

fn parse_g(text: &str) -> Result<Counterfunction, ScenarioError> {
    text.parse().map_err(|e: crate::Error| err(ErrorCode::BadCounterfunction, e.to_string()))
}

fn parse_bound(text: &str) -> Result<BoundNat, ScenarioError> {
    if text.trim() == "huge" {
        return Ok(BoundNat::Huge);
    }
    text.trim()
        .parse::<num_bigint::BigUint>()
        .map(BoundNat::Exact)
        .map_err(|e| err(ErrorCode::Parse, format!("bound override `{text}`: {e}")))
}

fn check_start(op: &OperatorSpec, x0: &Point) -> Result<(), ScenarioError> {
    if x0.dim() != op.domain().dim() {
        return Err(err(
            ErrorCode::DimensionMismatch,
            format!("x0 has dimension {}, operator `{}` acts on dimension {}", x0.dim(), op.id(), op.domain().dim()),
        ));
    }
    if !op.domain().contains(x0, TOL_DOM) {
        return Err(err(ErrorCode::X0NotInDomain, format!("x0 = {x0} lies outside the domain of `{}`", op.id())));
    }
    Ok(())
}

fn build_schedule(raw: Option<RawSchedule>) -> Result<WeightSchedule, ScenarioError> {
    let Some(raw) = raw else { return Ok(canonical_schedule()) };
    let inline = raw.alpha.is_some() || raw.beta.is_some() || raw.rate_beta.is_some() || raw.rate_theta.is_some();
    if !inline {
        return match raw.label.as_deref() {
            None | Some("canonical") => Ok(canonical_schedule()),
            Some(other) => Err(err(ErrorCode::ScheduleInvalid, format!("unknown schedule label `{other}`"))),
        };
    }
    let seq = |field: &str, v: Option<String>| -> Result<WeightSequence, ScenarioError> {
        let v = v.ok_or_else(|| err(ErrorCode::Parse, format!("inline schedule needs `{field}`")))?;
        v.parse().map_err(|e: crate::Error| err(ErrorCode::Parse, e.to_string()))
    };
    Ok(WeightSchedule {
        alpha: seq("alpha", raw.alpha)?,
        beta: seq("beta", raw.beta)?,
        rate_beta: raw.rate_beta.as_deref().map(parse_g).transpose()?.unwrap_or(Counterfunction::Const(0)),
        rate_theta: raw.rate_theta.as_deref().map(parse_g).transpose()?.unwrap_or(Counterfunction::Identity),
        label: raw.label.unwrap_or_else(|| "inline".into()),
    })
}

/// Parses and validates scenario text. `name` labels the run in reports.
pub fn parse_scenario(text: &str, name: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| err(ErrorCode::Parse, e.to_string()))?;

    let operator = gallery_operator(&raw.operator).ok_or_else(|| {
        err(ErrorCode::UnknownOperator, format!("`{}` is not a gallery operator", raw.operator))
    })?;
    let x0 = Point::new(raw.x0).map_err(|e| err(ErrorCode::Parse, format!("x0: {e}")))?;
    if let Some(kind) = raw.set {
        let set = AmbientSet::from_kind(kind).map_err(|e| err(ErrorCode::Parse, format!("set: {e}")))?;
        if &set != operator.domain() {
            return Err(err(
                ErrorCode::SetMismatch,
                format!("declared set differs from the domain of `{}`", operator.id()),
            ));
        }
    }
    check_start(&operator, &x0)?;

    let schedule = build_schedule(raw.schedule)?;
    let report = verify_schedule(&schedule, SCHEDULE_CHECK_N, SCHEDULE_CHECK_K);
    if let crate::verify::Outcome::Fail(detail) = &report.outcome {
        return Err(err(ErrorCode::ScheduleInvalid, detail.clone()));
    }

    let queries = match raw.queries {
        None => default_queries(),
        Some(qs) => qs
            .into_iter()
            .map(|q| {
                let g = parse_g(&q.g)?;
                MetastabilityQuery::new(q.k, g, q.cap.unwrap_or(DEFAULT_SEARCH_CAP))
                    .map_err(|e| err(ErrorCode::Parse, e.to_string()))
            })
            .collect::<Result<_, _>>()?,
    };

    let suites = match raw.suites {
        None => Suite::ALL.into_iter().collect(),
        Some(names) => names
            .iter()
            .map(|s| s.parse().map_err(|e: String| err(ErrorCode::Parse, e)))
            .collect::<Result<_, _>>()?,
    };

    let mut tolerances = Tolerances::default();
    if let Some(t) = raw.tolerances {
        tolerances.slack = t.slack.unwrap_or(tolerances.slack);
        tolerances.cert_slack = t.cert_slack.unwrap_or(tolerances.cert_slack);
        tolerances.cert_samples = t.cert_samples.unwrap_or(tolerances.cert_samples);
        tolerances.fejer_probes = t.fejer_probes.unwrap_or(tolerances.fejer_probes);
        tolerances.closedness_samples = t.closedness_samples.unwrap_or(tolerances.closedness_samples);
        tolerances.closedness_k_max = t.closedness_k_max.unwrap_or(tolerances.closedness_k_max);
    }

    let env_tau = std::env::var(TAU_ENV)
        .ok()
        .map(|v| v.trim().parse::<u32>().map_err(|e| err(ErrorCode::Parse, format!("{TAU_ENV}: {e}"))))
        .transpose()?;
    let saturation_tau_exponent = env_tau.or(raw.saturation_tau_exponent).unwrap_or(DEFAULT_TAU_EXPONENT);
    if saturation_tau_exponent == 0 {
        return Err(err(ErrorCode::Parse, "saturation_tau_exponent must be positive"));
    }

    let overrides = match raw.overrides {
        None => Overrides::default(),
        Some(o) => Overrides {
            sigma: o.sigma.as_deref().map(parse_bound).transpose()?,
            omega: o.omega.as_deref().map(parse_bound).transpose()?,
        },
    };

    let (liminf_l, liminf_k) = match raw.liminf {
        Some(g) => (g.l, g.k),
        None => (vec![0, 5, 10], vec![0, 1, 2, 3]),
    };

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| name.to_string()),
        operator,
        x0,
        steps: raw.steps.unwrap_or(DEFAULT_STEPS),
        seed: raw.seed.unwrap_or(0),
        schedule,
        queries,
        liminf_l,
        liminf_k,
        fejer: raw.fejer.map_or_else(FejerGrid::default, |f| FejerGrid { n: f.n, m: f.m, r: f.r }),
        suites,
        tolerances,
        saturation_tau_exponent,
        overrides,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| err(ErrorCode::Io, format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
    parse_scenario(&text, &name)
}
