//! Weight sequences `(αₙ)`, `(βₙ)` and the witnesses that come with them: a
//! rate of convergence for `βₙ → 0` and a rate of divergence for `Σ αₙβₙ`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::rates::{Counterfunction, NatFn, Saturation};
use crate::verify::{CertReport, Outcome};

/// Refuse divergence-sum checks longer than this many terms.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;
/// How far past `β(k)` the convergence witness is probed.
pub const CONVERGENCE_PROBE_WINDOW: u64 = 1_000;

/// Closed-form weight sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSequence {
    Constant(f64),
    /// `1/√(n+1)`
    ReciprocalSqrt,
    /// `1/(n+1)^p`
    ReciprocalPower(f64),
}

impl WeightSequence {
    pub fn at(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Constant(c) => *c,
            WeightSequence::ReciprocalSqrt => 1.0 / ((n + 1) as f64).sqrt(),
            WeightSequence::ReciprocalPower(p) => 1.0 / ((n + 1) as f64).powf(*p),
        }
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSequence::Constant(c) => write!(f, "constant({c})"),
            WeightSequence::ReciprocalSqrt => write!(f, "reciprocal-sqrt"),
            WeightSequence::ReciprocalPower(p) => write!(f, "reciprocal-power({p})"),
        }
    }
}

impl FromStr for WeightSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |reason: &str| Error::ContractViolation(format!("weight sequence `{s}`: {reason}"));
        let t = s.trim();
        if t == "reciprocal-sqrt" {
            return Ok(WeightSequence::ReciprocalSqrt);
        }
        let (name, arg) = t
            .strip_suffix(')')
            .and_then(|body| body.split_once('('))
            .ok_or_else(|| bad("expected constant(c), reciprocal-sqrt or reciprocal-power(p)"))?;
        let value: f64 = arg.trim().parse().map_err(|_| bad("argument is not a number"))?;
        match name.trim() {
            "constant" if (0.0..=1.0).contains(&value) => Ok(WeightSequence::Constant(value)),
            "constant" => Err(bad("constant must lie in [0, 1]")),
            "reciprocal-power" if value.is_finite() && value >= 0.0 => Ok(WeightSequence::ReciprocalPower(value)),
            "reciprocal-power" => Err(bad("power must be nonnegative")),
            _ => Err(bad("unknown sequence")),
        }
    }
}

/// `(αₙ)`, `(βₙ)` with their rate witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSchedule {
    pub alpha: WeightSequence,
    pub beta: WeightSequence,
    /// `β`: for `n ≥ β(k)`, `βₙ ≤ 1/(k+1)`.
    pub rate_beta: Counterfunction,
    /// `θ`: `Σ_{i ≤ θ(n)} αᵢβᵢ ≥ n`.
    pub rate_theta: Counterfunction,
    pub label: String,
}

impl WeightSchedule {
    pub fn alpha_at(&self, n: u64) -> f64 {
        self.alpha.at(n)
    }

    pub fn beta_at(&self, n: u64) -> f64 {
        self.beta.at(n)
    }

    /// Whether this is `αₙ = βₙ = 1/√(n+1)`, for which closed-form moduli exist.
    pub fn is_canonical(&self) -> bool {
        self.alpha == WeightSequence::ReciprocalSqrt && self.beta == WeightSequence::ReciprocalSqrt
    }
}

/// `αₙ = βₙ = 1/√(n+1)` with `β(k) = (k+1)²` and `θ(n) = 4ⁿ`.
pub fn canonical_schedule() -> WeightSchedule {
    WeightSchedule {
        alpha: WeightSequence::ReciprocalSqrt,
        beta: WeightSequence::ReciprocalSqrt,
        rate_beta: Counterfunction::shifted_square(),
        rate_theta: Counterfunction::Power(4),
        label: "canonical".into(),
    }
}

pub fn verify_schedule(schedule: &WeightSchedule, n_max: u64, k_max: u64) -> CertReport {
    verify_schedule_with_cap(schedule, n_max, k_max, DEFAULT_STEP_CAP)
}

/// Validates the schedule invariants on a finite prefix: weights in `[0,1]`
/// with `αₙ ≤ βₙ`, the convergence witness for `k ≤ k_max`, the divergence
/// witness for `n ≤ n_max`, and `θ(n) ≥ n − 1`.
pub fn verify_schedule_with_cap(schedule: &WeightSchedule, n_max: u64, k_max: u64, step_cap: u64) -> CertReport {
    let name = format!("schedule[{}]", schedule.label);
    let sat = Saturation::default();
    let inconclusive = |reason: String| CertReport::new(name.clone(), Outcome::Inconclusive(reason));

    let mut beta_rates = Vec::new();
    for k in 0..=k_max {
        match schedule.rate_beta.at(k, &sat).to_u64().filter(|v| *v <= step_cap) {
            Some(v) => beta_rates.push(v),
            None => return inconclusive(format!("rate of convergence at k={k} exceeds the step cap {step_cap}")),
        }
    }
    let mut theta_values = Vec::new();
    for n in 0..=n_max {
        match schedule.rate_theta.at(n, &sat).to_u64().filter(|v| *v <= step_cap) {
            Some(v) => theta_values.push(v),
            None => return inconclusive(format!("rate of divergence at n={n} exceeds the step cap {step_cap}")),
        }
    }
    let horizon = theta_values
        .iter()
        .copied()
        .chain(beta_rates.iter().map(|b| b + CONVERGENCE_PROBE_WINDOW))
        .max()
        .unwrap_or(0);

    let mut worst = f64::INFINITY;
    let fail = |detail: String, worst: f64, steps: u64| {
        let mut r = CertReport::new(name.clone(), Outcome::Fail(detail));
        r.worst_margin = worst;
        r.samples_or_steps = steps;
        r
    };

    for n in 0..=horizon {
        let (a, b) = (schedule.alpha_at(n), schedule.beta_at(n));
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return fail(format!("weights outside [0,1] at n={n}: alpha={a}, beta={b}"), worst, n);
        }
        worst = worst.min(b - a);
        if a > b {
            return fail(format!("(A3) violated at n={n}: alpha={a} > beta={b}"), worst, n);
        }
    }

    for (k, &start) in beta_rates.iter().enumerate() {
        let limit = 1.0 / (k as f64 + 1.0);
        for n in start..start + CONVERGENCE_PROBE_WINDOW {
            let b = schedule.beta_at(n);
            worst = worst.min(limit - b);
            if b > limit * (1.0 + 1e-12) {
                return fail(format!("(A1) violated at k={k}: beta({n})={b} > 1/{}", k + 1), worst, horizon);
            }
        }
    }

    let mut partial = Vec::with_capacity(horizon as usize + 1);
    let mut acc = 0.0;
    for i in 0..=horizon {
        acc += schedule.alpha_at(i) * schedule.beta_at(i);
        partial.push(acc);
    }
    for (n, &t) in theta_values.iter().enumerate() {
        let sum = partial[t as usize];
        worst = worst.min(sum - n as f64);
        if sum < n as f64 - 1e-9 {
            return fail(format!("(A2) witness violated at n={n}: partial sum to {t} is {sum}"), worst, horizon);
        }
        if t + 1 < n as u64 {
            return fail(format!("rate of divergence below n-1 at n={n}: {t}"), worst, horizon);
        }
    }

    let mut report = CertReport::new(name, Outcome::Pass);
    report.worst_margin = worst;
    report.samples_or_steps = horizon + 1;
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_values() {
        let w = canonical_schedule();
        let sat = Saturation::default();
        assert_eq!(w.beta_at(0), 1.0);
        assert_eq!(w.rate_beta.at(4, &sat).to_u64(), Some(25));
        assert_eq!(w.rate_theta.at(2, &sat).to_u64(), Some(16));
        assert!(w.is_canonical());
    }

    #[test]
    fn canonical_schedule_verifies() {
        let report = verify_schedule(&canonical_schedule(), 7, 10);
        assert!(report.outcome.is_pass(), "{report:?}");
        assert_eq!(report.samples_or_steps, 16_385);
    }

    #[test]
    fn constant_half_violates_convergence_at_k2() {
        let w = WeightSchedule {
            alpha: WeightSequence::Constant(0.5),
            beta: WeightSequence::Constant(0.5),
            rate_beta: Counterfunction::Const(0),
            rate_theta: Counterfunction::Identity,
            label: "const".into(),
        };
        match verify_schedule(&w, 3, 5).outcome {
            Outcome::Fail(d) => assert!(d.contains("(A1) violated at k=2"), "{d}"),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn alpha_above_beta_is_rejected() {
        let w = WeightSchedule {
            alpha: WeightSequence::Constant(1.0),
            beta: WeightSequence::Constant(0.5),
            rate_beta: Counterfunction::Const(0),
            rate_theta: Counterfunction::Identity,
            label: "inverted".into(),
        };
        assert!(matches!(verify_schedule(&w, 3, 5).outcome, Outcome::Fail(d) if d.contains("(A3)")));
    }

    #[test]
    fn equal_weights_satisfy_ordering() {
        let w = WeightSchedule {
            alpha: WeightSequence::ReciprocalPower(0.5),
            beta: WeightSequence::ReciprocalPower(0.5),
            ..canonical_schedule()
        };
        assert!(verify_schedule(&w, 5, 5).outcome.is_pass());
    }

    #[test]
    fn step_cap_gives_inconclusive() {
        let report = verify_schedule_with_cap(&canonical_schedule(), 12, 3, 1_000_000);
        assert!(report.outcome.is_inconclusive());
    }

    #[test]
    fn wrong_divergence_witness_fails() {
        let w = WeightSchedule { rate_theta: Counterfunction::Identity, ..canonical_schedule() };
        assert!(matches!(verify_schedule(&w, 6, 3).outcome, Outcome::Fail(d) if d.contains("(A2)")));
    }

    #[test]
    fn sequence_syntax() {
        assert_eq!("reciprocal-sqrt".parse::<WeightSequence>().unwrap(), WeightSequence::ReciprocalSqrt);
        assert_eq!("constant(0.5)".parse::<WeightSequence>().unwrap(), WeightSequence::Constant(0.5));
        assert_eq!("reciprocal-power(0.25)".parse::<WeightSequence>().unwrap(), WeightSequence::ReciprocalPower(0.25));
        assert!("constant(2)".parse::<WeightSequence>().is_err());
        assert!("harmonic".parse::<WeightSequence>().is_err());
        for seq in [WeightSequence::Constant(0.25), WeightSequence::ReciprocalSqrt, WeightSequence::ReciprocalPower(0.4)] {
            assert_eq!(seq.to_string().parse::<WeightSequence>().unwrap(), seq);
        }
    }
}
