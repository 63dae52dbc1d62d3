//! Runs a [`Scenario`]: iterate, shift, evaluate the selected suites and the
//! bound formulas, and collect everything into a deterministic report.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Result;
use crate::iterate::{ishikawa, shifted_view, Trajectory};
use crate::numkernel::Point;
use crate::operators::{
    check_lipschitz, check_monotone_complement, check_pseudocontraction, check_self_map,
    check_strict_pseudocontraction,
};
use crate::rates::{
    afp_bounds, canonical_shift, closedness_moduli, compute_k, delta, delta_hat, delta_tilde, fejer_modulus_chi,
    gamma_exp, omega_prime, omega_prime_with_shift, BoundInputs, BoundNat, Saturation,
};
use crate::scenario::{Scenario, Suite, SCHEDULE_CHECK_K, SCHEDULE_CHECK_N};
use crate::schedule::verify_schedule;
use crate::verify::{
    check_combined_omega, check_fejer_descent, check_lemma_suite, check_liminf_sequence,
    check_metastability_bound, check_uniform_closedness, check_uniform_fejer, CertReport, LemmaSuiteInput, Outcome,
};

/// Number of random reference points added to the known fixed points.
pub const SAMPLED_REFERENCE_POINTS: usize = 4;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Record wall-clock time; off by default so reports are byte-stable.
    pub timing: bool,
    /// Restrict to these suites instead of the scenario's own selection.
    pub suites: Option<BTreeSet<Suite>>,
}

#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub steps: usize,
    pub shift: Option<u64>,
    pub last: Point,
    pub last_residual: f64,
    pub reprojections: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub bounds: BTreeMap<String, BoundNat>,
    pub reports: Vec<CertReport>,
    pub trajectory: TrajectorySummary,
    pub runtime_ms: u64,
    pub saturation: Saturation,
}

impl RunReport {
    pub fn has_fail(&self) -> bool {
        self.reports.iter().any(|r| r.outcome.is_fail())
    }

    pub fn has_inconclusive(&self) -> bool {
        self.reports.iter().any(|r| r.outcome.is_inconclusive())
    }

    /// 0 when nothing failed, 1 on any Fail, 2 on Inconclusive under `strict`.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.has_fail() {
            1
        } else if strict && self.has_inconclusive() {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Value {
        let sat = &self.saturation;
        let bounds: BTreeMap<&str, String> = self.bounds.iter().map(|(k, v)| (k.as_str(), sat.render(v))).collect();
        json!({
            "scenario": self.scenario,
            "bounds": bounds,
            "reports": self.reports.iter().map(|r| r.to_json(sat)).collect::<Vec<_>>(),
            "trajectory": {
                "steps": self.trajectory.steps,
                "shift_K": self.trajectory.shift,
                "last": self.trajectory.last.coords(),
                "last_residual": self.trajectory.last_residual,
                "reprojections": self.trajectory.reprojections,
            },
            "runtime_ms": self.runtime_ms,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes") + "\n"
    }
}

fn lk(l: u64, k: u64) -> String {
    format!("(l={l},k={k})")
}

/// Every bound the scenario's parameters determine, keyed by a readable name.
/// Uses the diameter bound `b` of the operator's domain.
pub fn scenario_bounds(s: &Scenario, sat: &Saturation) -> BTreeMap<String, BoundNat> {
    let mut out = BTreeMap::new();
    let op = &s.operator;
    let lip = op.lipschitz();
    let b = op.domain().diameter_bound();
    let gamma = op.domain().total_boundedness_modulus();
    let w = &s.schedule;
    let shift = compute_k(lip, &w.rate_beta, sat);
    let canonical = w.is_canonical();

    out.insert("b".into(), sat.nat(b));
    out.insert("K".into(), shift.clone());
    if canonical {
        out.insert("K0".into(), canonical_shift(lip, sat));
    }
    for &l in &s.liminf_l {
        for &k in &s.liminf_k {
            out.insert(format!("delta{}", lk(l, k)), delta(b, &w.rate_theta, l, k, sat));
            out.insert(format!("delta_tilde{}", lk(l, k)), delta_tilde(b, &w.rate_theta, &shift, l, k, sat));
            out.insert(format!("delta_hat{}", lk(l, k)), delta_hat(b, lip, &w.rate_beta, &w.rate_theta, l, k, sat));
            if canonical {
                out.insert(format!("gamma_exp{}", lk(l, k)), gamma_exp(b, lip, l, k, sat));
            }
        }
    }
    let afp = afp_bounds(b, &w.rate_theta, shift.clone());
    for &k in &s.liminf_k {
        out.insert(format!("delta_prime(k={k})"), afp.delta_prime(k, sat));
        out.insert(format!("delta_tilde_prime(k={k})"), afp.delta_tilde_prime(k, sat));
        out.insert(format!("phi(k={k})"), afp.phi(k, sat));
    }
    let closed = closedness_moduli(lip);
    for k in 0..=s.tolerances.closedness_k_max {
        out.insert(format!("omega_f(k={k})"), sat.clamp(closed.omega_f(k)));
        out.insert(format!("delta_f(k={k})"), sat.clamp(closed.delta_f(k)));
    }
    for &n in &s.fejer.n {
        for &m in &s.fejer.m {
            for &r in &s.fejer.r {
                out.insert(format!("chi(n={n},m={m},r={r})"), sat.clamp(fejer_modulus_chi(b, n, m, r)));
            }
        }
    }
    let inputs = BoundInputs { b, lipschitz: lip, rate_beta: &w.rate_beta, rate_theta: &w.rate_theta, gamma: &gamma };
    for q in &s.queries {
        let c = inputs.constants(q.k, sat);
        out.insert(format!("P(k={})", q.k), c.p);
        out.insert(format!("P0(k={})", q.k), c.p0);
        out.insert(format!("k0(k={})", q.k), sat.clamp(c.k0));
        let tag = format!("(k={},g={})", q.k, q.g);
        out.insert(format!("sigma{tag}"), inputs.sigma(q.k, &q.g, sat));
        out.insert(format!("omega{tag}"), inputs.omega(q.k, &q.g, sat));
        if canonical {
            out.insert(format!("omega_prime{tag}"), omega_prime_upper(b, &gamma, lip, q.k, &q.g, &shift, sat));
        }
    }
    out
}

/// `Ω′` evaluated with both candidate shifts for the counterfunction, keeping the larger.
fn omega_prime_upper(
    b: u64,
    gamma: &dyn crate::rates::NatFn,
    lip: crate::rates::Lipschitz,
    k: u64,
    g: &crate::rates::Counterfunction,
    shift: &BoundNat,
    sat: &Saturation,
) -> BoundNat {
    let with_k0 = omega_prime(b, gamma, lip, k, g, sat);
    let with_k = omega_prime_with_shift(b, gamma, lip, k, g, shift, sat);
    with_k0.max(&with_k)
}

fn step_sizes(traj: &Trajectory) -> Vec<f64> {
    traj.x().windows(2).map(|w| w[0].dist(&w[1]).expect("same dimension")).collect()
}

/// `⌈‖x_K − p‖⌉` minimized over known fixed points `p`.
fn sharp_b(traj: &Trajectory, fixed: &[Point], k: usize) -> Option<u64> {
    let xk = traj.x().get(k)?;
    fixed
        .iter()
        .map(|p| xk.dist(p).expect("same dimension").ceil() as u64)
        .min()
}

/// Executes the scenario. Deterministic in the scenario (including its seed)
/// unless `options.timing` is set.
pub fn run(s: &Scenario, options: &RunOptions) -> Result<RunReport> {
    let started = Instant::now();
    let sat = Saturation::new(s.saturation_tau_exponent);
    let suites = options.suites.clone().unwrap_or_else(|| s.suites.clone());
    let op = &s.operator;
    let w = &s.schedule;
    let lip = op.lipschitz();
    let b = op.domain().diameter_bound();
    let tol = &s.tolerances;

    let mut bounds = scenario_bounds(s, &sat);
    let shift_bound = bounds["K"].clone();
    let shift = shift_bound.to_u64();
    let mut reports = vec![verify_schedule(w, SCHEDULE_CHECK_N, SCHEDULE_CHECK_K)];

    let traj = ishikawa(op, &s.x0, w, s.steps)?;
    let z = match shift {
        Some(k) => shifted_view(&traj, k as usize),
        None => Err(crate::Error::InsufficientLength { needed: u64::MAX, recorded: traj.len() }),
    };
    let fixed = op.known_fixed_points();
    let seed = |offset: u64| s.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(offset);
    let inconclusive = |name: &str, why: String| CertReport::new(name, Outcome::Inconclusive(why));

    if suites.contains(&Suite::Certify) {
        reports.push(check_self_map(op, tol.cert_samples, seed(1)));
        reports.push(check_pseudocontraction(op, tol.cert_samples, tol.cert_slack, seed(2)));
        reports.push(check_lipschitz(op, tol.cert_samples, tol.cert_slack, seed(3)));
        reports.push(check_monotone_complement(op, tol.cert_samples, tol.cert_slack, seed(4)));
        if let Some(kappa) = op.strictness() {
            reports.push(check_strict_pseudocontraction(op, kappa, tol.cert_samples, tol.cert_slack, seed(5)));
        }
    }

    if suites.contains(&Suite::Lemmas) {
        let mut points = fixed.to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed(6));
        points.extend((0..SAMPLED_REFERENCE_POINTS).map(|_| op.domain().sample(&mut rng)));
        match shift {
            Some(k) => reports.extend(check_lemma_suite(
                &traj,
                &LemmaSuiteInput { op, schedule: w, points: &points, shift: k as usize, b, slack: tol.slack },
            )),
            None => reports.push(inconclusive("lemmas", format!("shift K = {} is not machine-sized", sat.render(&shift_bound)))),
        }
    }

    if suites.contains(&Suite::Fejer) {
        match &z {
            Ok(z) => {
                for p in fixed {
                    reports.push(check_fejer_descent(z, p, w, tol.slack));
                }
                for &n in &s.fejer.n {
                    for &m in &s.fejer.m {
                        for &r in &s.fejer.r {
                            let salt = 7 + 1000 * n + 100 * m + r;
                            reports.push(check_uniform_fejer(z, op, b, n, m, r, tol.fejer_probes, seed(salt)));
                        }
                    }
                }
            }
            Err(e) => reports.push(inconclusive("fejer", e.to_string())),
        }
    }

    if suites.contains(&Suite::Closedness) {
        let m = closedness_moduli(lip);
        reports.push(check_uniform_closedness(
            op,
            &|k| m.omega_f(k),
            &|k| m.delta_f(k),
            tol.closedness_samples,
            tol.closedness_k_max,
            tol.slack,
            seed(8),
        ));
    }

    if suites.contains(&Suite::Liminf) {
        let (ls, ks) = (&s.liminf_l[..], &s.liminf_k[..]);
        let theta = &w.rate_theta;
        let x_res = traj.residuals();
        let (shift_ref, sat_ref) = (&shift_bound, &sat);
        let tilde = |bb: u64| move |l, k| delta_tilde(bb, theta, shift_ref, l, k, sat_ref);
        reports.push(check_liminf_sequence("liminf-x delta_tilde", x_res, &tilde(b), ls, ks));
        reports.push(check_liminf_sequence(
            "liminf-steps delta_hat",
            &step_sizes(&traj),
            &|l, k| delta_hat(b, lip, &w.rate_beta, theta, l, k, &sat),
            ls,
            ks,
        ));
        if w.is_canonical() {
            reports.push(check_liminf_sequence("liminf-x gamma_exp", x_res, &|l, k| gamma_exp(b, lip, l, k, &sat), ls, ks));
        }
        let afp = afp_bounds(b, theta, shift_bound.clone());
        reports.push(check_liminf_sequence("afp-x delta_tilde_prime", x_res, &|_, k| afp.delta_tilde_prime(k, &sat), &[0], ks));
        match &z {
            Ok(z) => {
                let z_res = z.residuals();
                reports.push(check_liminf_sequence("liminf-z delta", z_res, &|l, k| delta(b, theta, l, k, &sat), ls, ks));
                reports.push(check_liminf_sequence("afp-z delta_prime", z_res, &|_, k| afp.delta_prime(k, &sat), &[0], ks));
                reports.push(check_liminf_sequence("afp-z phi", z_res, &|_, k| afp.phi(k, &sat), &[0], ks));
                if let Some(bs) = sharp_b(&traj, fixed, z.shift()) {
                    bounds.insert("b_sharp".into(), sat.nat(bs));
                    reports.push(check_liminf_sequence(
                        &format!("liminf-x delta_tilde [b={bs}]"),
                        x_res,
                        &tilde(bs),
                        ls,
                        ks,
                    ));
                    reports.push(check_liminf_sequence(
                        &format!("liminf-z delta [b={bs}]"),
                        z_res,
                        &|l, k| delta(bs, theta, l, k, &sat),
                        ls,
                        ks,
                    ));
                }
            }
            Err(e) => reports.push(inconclusive("liminf-z", e.to_string())),
        }
    }

    if suites.contains(&Suite::Metastability) {
        for q in &s.queries {
            let sigma = match &s.overrides.sigma {
                Some(v) => v.clone(),
                None => bounds[&format!("sigma(k={},g={})", q.k, q.g)].clone(),
            };
            reports.push(check_metastability_bound(&traj, q, &sigma));
        }
    }

    if suites.contains(&Suite::Combined) {
        for q in &s.queries {
            let tag = format!("(k={},g={})", q.k, q.g);
            let omega = match &s.overrides.omega {
                Some(v) => v.clone(),
                None => bounds[&format!("omega{tag}")].clone(),
            };
            reports.push(check_combined_omega(&traj, q, &omega));
            if s.overrides.omega.is_none() {
                if let Some(prime) = bounds.get(&format!("omega_prime{tag}")) {
                    let mut r = check_combined_omega(&traj, q, prime);
                    r.name = format!("combined-prime k={} g={}", q.k, q.g);
                    reports.push(r);
                }
            }
        }
    }

    let last = traj.x().last().expect("at least x0").clone();
    let trajectory = TrajectorySummary {
        steps: s.steps,
        shift,
        last_residual: *traj.residuals().last().expect("at least x0"),
        last,
        reprojections: traj.reprojections().len(),
    };
    let runtime_ms = if options.timing { started.elapsed().as_millis() as u64 } else { 0 };
    Ok(RunReport { scenario: s.name.clone(), bounds, reports, trajectory, runtime_ms, saturation: sat })
}
