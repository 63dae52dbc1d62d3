use serde_json::{json, Value};

use crate::rates::{BoundNat, Saturation};

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Inconclusive(String),
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Outcome::Inconclusive(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail(_) => "fail",
            Outcome::Inconclusive(_) => "inconclusive",
        }
    }

    /// Fail beats Inconclusive beats Pass.
    pub fn worse(self, other: Outcome) -> Outcome {
        let rank = |o: &Outcome| match o {
            Outcome::Pass => 0,
            Outcome::Inconclusive(_) => 1,
            Outcome::Fail(_) => 2,
        };
        if rank(&other) > rank(&self) {
            other
        } else {
            self
        }
    }
}

/// Result of one certification or verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub name: String,
    pub outcome: Outcome,
    /// Smallest observed `rhs − lhs` over all checked instances.
    pub worst_margin: f64,
    pub samples_or_steps: u64,
    pub witness: Option<u64>,
    pub bound: Option<BoundNat>,
    /// An empirical estimate some checks produce (e.g. the largest Lipschitz ratio).
    pub estimate: Option<f64>,
}

impl CertReport {
    pub fn new(name: impl Into<String>, outcome: Outcome) -> Self {
        Self {
            name: name.into(),
            outcome,
            worst_margin: 0.0,
            samples_or_steps: 0,
            witness: None,
            bound: None,
            estimate: None,
        }
    }

    pub fn to_json(&self, sat: &Saturation) -> Value {
        let detail = match &self.outcome {
            Outcome::Pass => Value::Null,
            Outcome::Fail(d) | Outcome::Inconclusive(d) => Value::String(d.clone()),
        };
        json!({
            "name": self.name,
            "outcome": self.outcome.label(),
            "detail": detail,
            "worst_margin": self.worst_margin,
            "samples_or_steps": self.samples_or_steps,
            "witness": self.witness,
            "bound": self.bound.as_ref().map(|b| sat.render(b)),
            "estimate": self.estimate,
        })
    }
}

/// Accumulates `lhs ≤ rhs + tol` checks into a single report.
#[derive(Debug, Clone)]
pub struct InequalityTally {
    name: String,
    worst: f64,
    count: u64,
    first_violation: Option<String>,
}

impl InequalityTally {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), worst: f64::INFINITY, count: 0, first_violation: None }
    }

    pub fn record(&mut self, lhs: f64, rhs: f64, tol: f64, context: impl FnOnce() -> String) {
        self.count += 1;
        let margin = rhs - lhs;
        if margin < self.worst || margin.is_nan() {
            self.worst = margin;
        }
        if !(lhs <= rhs + tol) && self.first_violation.is_none() {
            self.first_violation = Some(format!("{}: lhs {lhs:e} > rhs {rhs:e} + {tol:e}", context()));
        }
    }

    /// Records a two-sided identity `|lhs − rhs| ≤ tol`.
    pub fn record_equal(&mut self, lhs: f64, rhs: f64, tol: f64, context: impl FnOnce() -> String) {
        self.count += 1;
        let margin = -(lhs - rhs).abs();
        if margin < self.worst || margin.is_nan() {
            self.worst = margin;
        }
        if !((lhs - rhs).abs() <= tol) && self.first_violation.is_none() {
            self.first_violation = Some(format!("{}: |{lhs:e} - {rhs:e}| > {tol:e}", context()));
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(self) -> CertReport {
        let outcome = match self.first_violation {
            Some(d) => Outcome::Fail(d),
            None => Outcome::Pass,
        };
        let mut report = CertReport::new(self.name, outcome);
        report.worst_margin = if self.count == 0 { 0.0 } else { self.worst };
        report.samples_or_steps = self.count;
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_tracks_worst_margin_and_first_violation() {
        let mut t = InequalityTally::new("demo");
        t.record(1.0, 2.0, 0.0, || "a".into());
        t.record(2.0, 2.0 - 1e-12, 1e-9, || "b".into());
        let r = t.clone().finish();
        assert!(r.outcome.is_pass());
        assert!(r.worst_margin < 0.0 && r.worst_margin >= -1e-9);
        t.record(3.0, 1.0, 1e-9, || "c".into());
        let r = t.finish();
        assert!(matches!(&r.outcome, Outcome::Fail(d) if d.starts_with("c:")));
        assert_eq!(r.samples_or_steps, 3);
    }

    #[test]
    fn outcome_ordering() {
        let inc = Outcome::Inconclusive("x".into());
        assert!(Outcome::Pass.worse(inc.clone()).is_inconclusive());
        assert!(inc.worse(Outcome::Fail("y".into())).is_fail());
        assert!(Outcome::Fail("y".into()).worse(Outcome::Pass).is_fail());
    }
}
