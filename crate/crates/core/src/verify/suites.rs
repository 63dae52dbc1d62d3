use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::iterate::{shifted_view, Trajectory};
use crate::numkernel::{norm, Point};
use crate::operators::{OperatorSpec, TOL_FIX};
use crate::rates::fejer_modulus_chi;
use crate::schedule::WeightSchedule;

use super::report::{CertReport, InequalityTally, Outcome};

/// Strict inequalities are checked as `lhs ≤ rhs − FEJER_STRICT_SLACK`.
pub const FEJER_STRICT_SLACK: f64 = 1e-12;
/// Slack for `‖z_{n+1} − p‖ ≤ ‖z_n − p‖`.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// `slack · (1 + ‖x‖²)`
pub fn scaled_slack(slack: f64, x: &Point) -> f64 {
    let n = norm(x);
    slack * (1.0 + n * n)
}

fn to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

fn d2(a: &Point, b: &Point) -> f64 {
    a.dist_sq(b).expect("same dimension")
}

fn d(a: &Point, b: &Point) -> f64 {
    a.dist(b).expect("same dimension")
}

fn apply(op: &OperatorSpec, x: &Point) -> Point {
    op.apply(x).expect("recorded points lie in the domain")
}

/// A point at distance at most `radius` from `center`, pulled back into the domain.
fn perturb(op: &OperatorSpec, rng: &mut ChaCha8Rng, center: &Point, radius: f64, on_sphere: bool) -> Point {
    let dim = center.dim();
    let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let len = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let r = if on_sphere { radius } else { radius * rng.gen::<f64>().powf(1.0 / dim as f64) };
    let offset = Point::from_raw(dir.iter().map(|c| c / len * r).collect());
    let p = center.add(&offset).expect("same dimension");
    op.domain().project(&p).expect("same dimension")
}

/// `‖z_{n+1}−p‖² ≤ ‖z_n−p‖² − ½·α·β·‖z_n−Tz_n‖²` along a shifted trajectory, with
/// the weights taken at the underlying index `n + K`.
pub fn check_fejer_descent(z: &Trajectory, p: &Point, schedule: &WeightSchedule, slack: f64) -> CertReport {
    let mut tally = InequalityTally::new(format!("fejer-descent p={p}"));
    let shift = z.shift() as u64;
    for n in 0..z.len().saturating_sub(1) {
        let (a, b) = (schedule.alpha_at(n as u64 + shift), schedule.beta_at(n as u64 + shift));
        let r = z.residuals()[n];
        let lhs = d2(&z.x()[n + 1], p);
        let rhs = d2(&z.x()[n], p) - 0.5 * a * b * r * r;
        tally.record(lhs, rhs, scaled_slack(slack, &z.x()[n]), || format!("n={n}"));
    }
    tally.finish()
}

/// Window Fejér property for near-fixed points: whenever
/// `‖p−Tp‖ ≤ 1/(χ_b(n,m,r)+1)`, every `l ≤ m` has
/// `‖z_{n+l}−p‖² < ‖z_n−p‖² + 1/(r+1)`.
#[allow(clippy::too_many_arguments)]
pub fn check_uniform_fejer(
    z: &Trajectory,
    op: &OperatorSpec,
    b: u64,
    n: u64,
    m: u64,
    r: u64,
    n_probe: usize,
    seed: u64,
) -> CertReport {
    let name = format!("uniform-fejer n={n} m={m} r={r}");
    let end = n.checked_add(m).map(|e| e as usize);
    if end.map_or(true, |e| e >= z.len()) {
        return CertReport::new(name, Outcome::Inconclusive(format!("window [{n}, {n}+{m}] exceeds trajectory")));
    }
    let chi = fejer_modulus_chi(b, n, m, r);
    let threshold = 1.0 / (to_f64(&chi) + 1.0);
    let radius = threshold / (1.0 + op.lipschitz().as_f64());
    let fixed = op.known_fixed_points();
    if fixed.is_empty() {
        return CertReport::new(name, Outcome::Inconclusive("no known fixed point to probe around".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = InequalityTally::new(name.clone());
    let mut accepted = 0;
    let (n, m) = (n as usize, m as usize);
    for i in 0..n_probe {
        let p = perturb(op, &mut rng, &fixed[i % fixed.len()], radius, i % 2 == 0);
        if op.residual(&p).map_or(true, |res| res > threshold) {
            continue;
        }
        accepted += 1;
        let base = d2(&z.x()[n], &p) + 1.0 / (r as f64 + 1.0);
        for l in 0..=m {
            let lhs = d2(&z.x()[n + l], &p);
            tally.record(lhs, base - FEJER_STRICT_SLACK, 0.0, || format!("probe {p}, l={l}"));
        }
    }
    if accepted == 0 {
        return CertReport::new(name, Outcome::Inconclusive("no probe met the residual threshold".into()));
    }
    let mut report = tally.finish();
    report.bound = Some(crate::rates::BoundNat::Exact(chi));
    report
}

/// For each `k ≤ k_max`: points `q` with `‖q−Tq‖ ≤ 1/(δ_F(k)+1)` and `p` with
/// `‖p−q‖ ≤ 1/(ω_F(k)+1)` must satisfy `‖p−Tp‖ ≤ 1/(k+1)`.
pub fn check_uniform_closedness(
    op: &OperatorSpec,
    omega_f: &dyn Fn(u64) -> BigUint,
    delta_f: &dyn Fn(u64) -> BigUint,
    n_samples: usize,
    k_max: u64,
    tol: f64,
    seed: u64,
) -> CertReport {
    let name = "uniform-closedness";
    let fixed = op.known_fixed_points();
    if fixed.is_empty() {
        return CertReport::new(name, Outcome::Inconclusive("no known fixed point to probe around".into()));
    }
    let lip = op.lipschitz().as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = InequalityTally::new(name);
    let mut rejected = 0u64;
    for k in 0..=k_max {
        let q_threshold = 1.0 / (to_f64(&delta_f(k)) + 1.0);
        let p_radius = 1.0 / (to_f64(&omega_f(k)) + 1.0);
        let target = 1.0 / (k as f64 + 1.0);
        for i in 0..n_samples {
            let q = perturb(op, &mut rng, &fixed[i % fixed.len()], q_threshold / (1.0 + lip), i % 3 == 0);
            if op.residual(&q).map_or(true, |res| res > q_threshold) {
                rejected += 1;
                continue;
            }
            let p = perturb(op, &mut rng, &q, p_radius, i % 2 == 0);
            let res = op.residual(&p).expect("projected into the domain");
            tally.record(res, target, tol, || format!("k={k}, q={q}, p={p}"));
        }
    }
    let mut report = tally.finish();
    if report.samples_or_steps == 0 {
        report.outcome = Outcome::Inconclusive(format!("all {rejected} candidate points missed the residual threshold"));
    }
    report
}

/// What [`check_lemma_suite`] needs beyond the trajectory itself.
pub struct LemmaSuiteInput<'a> {
    pub op: &'a OperatorSpec,
    pub schedule: &'a WeightSchedule,
    /// Reference points: known fixed points and sampled points of the domain.
    pub points: &'a [Point],
    /// The shift `K` after which the weight margin is at least ½.
    pub shift: usize,
    /// Diameter bound of the domain.
    pub b: u64,
    /// Relative slack; each step uses `slack·(1+‖x_n‖²)`.
    pub slack: f64,
}

/// Evaluates every step-level inequality and identity behind the convergence
/// argument at each recorded step. Returns one report per inequality.
pub fn check_lemma_suite(traj: &Trajectory, input: &LemmaSuiteInput<'_>) -> Vec<CertReport> {
    let LemmaSuiteInput { op, schedule, points, shift, b, slack } = *input;
    let lip = op.lipschitz().as_f64();
    let steps = traj.len().saturating_sub(1);
    let base = traj.shift() as u64;

    let mut step_ty = InequalityTally::new("step-bound-ty");
    let mut half_step = InequalityTally::new("half-step-bound");
    let mut step_lip = InequalityTally::new("step-lipschitz-bound");
    let mut tri_x = InequalityTally::new("approx-triangle-x");
    let mut tri_y = InequalityTally::new("approx-triangle-y");
    let mut id_x = InequalityTally::new("convex-identity-x");
    let mut id_y = InequalityTally::new("convex-identity-y");
    let mut id_res = InequalityTally::new("convex-identity-residual");
    let mut descent = InequalityTally::new("descent-inequality");
    let mut weight = InequalityTally::new("weight-margin");

    let p_data: Vec<(f64, Point)> = points
        .iter()
        .map(|p| (op.residual(p).expect("reference points lie in the domain"), apply(op, p)))
        .collect();

    for n in 0..steps {
        let (x, y, x1) = (&traj.x()[n], &traj.y()[n], &traj.x()[n + 1]);
        let (tx, ty) = (apply(op, x), apply(op, y));
        let (a, bt) = (schedule.alpha_at(n as u64 + base), schedule.beta_at(n as u64 + base));
        let tol = scaled_slack(slack, x);
        let ctx = || format!("n={n}");
        let res_x = d(x, &tx);

        step_ty.record(d(x, x1), d(x, &ty), tol, ctx);
        half_step.record(d(x, y), res_x, tol, ctx);
        step_lip.record(d(x, x1), (1.0 + lip) * res_x, tol, ctx);
        id_res.record_equal(
            d2(y, &ty),
            bt * d2(&tx, &ty) + (1.0 - bt) * d2(x, &ty) - bt * (1.0 - bt) * res_x * res_x,
            tol,
            ctx,
        );
        if n as u64 + base >= shift as u64 {
            weight.record(0.5, 1.0 - 2.0 * bt - lip * lip * bt * bt, slack, ctx);
        }

        for (p, (res_p, tp)) in points.iter().zip(&p_data) {
            let ctx = || format!("n={n}, p={p}");
            let sx = res_p + d(x, tp);
            let sy = res_p + d(y, tp);
            tri_x.record(d2(&tx, p), d2(x, p) + res_x * res_x + 2.0 * res_p * sx, tol, ctx);
            tri_y.record(d2(&ty, p), d2(y, p) + d2(y, &ty) + 2.0 * res_p * sy, tol, ctx);
            id_x.record_equal(
                d2(x1, p),
                a * d2(&ty, p) + (1.0 - a) * d2(x, p) - a * (1.0 - a) * d2(&ty, x),
                tol,
                ctx,
            );
            id_y.record_equal(
                d2(y, p),
                bt * d2(&tx, p) + (1.0 - bt) * d2(x, p) - bt * (1.0 - bt) * res_x * res_x,
                tol,
                ctx,
            );
            descent.record(
                d2(x1, p),
                d2(x, p) - a * bt * (1.0 - 2.0 * bt - lip * lip * bt * bt) * res_x * res_x
                    + 2.0 * res_p * (sx + sy),
                tol,
                ctx,
            );
        }
    }

    let mut reports: Vec<CertReport> = [
        step_ty, half_step, step_lip, tri_x, tri_y, id_x, id_y, id_res, descent, weight,
    ]
    .into_iter()
    .map(InequalityTally::finish)
    .collect();

    let mut perturbed = InequalityTally::new("shifted-descent-perturbed");
    let mut fixed = InequalityTally::new("shifted-descent-fixed");
    let mut monotone = InequalityTally::new("shifted-distance-monotone");
    match shifted_view(traj, shift) {
        Ok(z) => {
            let zbase = z.shift() as u64;
            for n in 0..z.len().saturating_sub(1) {
                let (zn, zn1) = (&z.x()[n], &z.x()[n + 1]);
                let (a, bt) = (schedule.alpha_at(n as u64 + zbase), schedule.beta_at(n as u64 + zbase));
                let r = z.residuals()[n];
                let tol = scaled_slack(slack, zn);
                for (p, (res_p, _)) in points.iter().zip(&p_data) {
                    let ctx = || format!("n={n}, p={p}");
                    let rhs = d2(zn, p) - 0.5 * a * bt * r * r;
                    perturbed.record(d2(zn1, p), rhs + 8.0 * b as f64 * res_p, tol, ctx);
                    if *res_p <= TOL_FIX {
                        fixed.record(d2(zn1, p), rhs, tol, ctx);
                        monotone.record(d(zn1, p), d(zn, p), MONOTONE_SLACK, ctx);
                    }
                }
            }
            reports.extend([perturbed.finish(), fixed.finish(), monotone.finish()]);
        }
        Err(e) => {
            for name in ["shifted-descent-perturbed", "shifted-descent-fixed", "shifted-distance-monotone"] {
                reports.push(CertReport::new(name, Outcome::Inconclusive(e.to_string())));
            }
        }
    }
    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterate::ishikawa;
    use crate::operators::gallery_operator;
    use crate::rates::{closedness_moduli, Lipschitz};
    use crate::schedule::canonical_schedule;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn suite(id: &str, x0: &[f64], shift: usize, b: u64) -> Vec<CertReport> {
        let op = gallery_operator(id).unwrap();
        let w = canonical_schedule();
        let traj = ishikawa(&op, &p(x0), &w, 2000).unwrap();
        let mut points = op.known_fixed_points().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        points.extend((0..4).map(|_| op.domain().sample(&mut rng)));
        check_lemma_suite(&traj, &LemmaSuiteInput { op: &op, schedule: &w, points: &points, shift, b, slack: 1e-9 })
    }

    #[test]
    fn lemma_suite_passes_on_gallery() {
        for (id, x0, k) in [("cubic", vec![0.9], 36), ("negation", vec![0.6, -0.3], 25), ("identity", vec![0.2], 25)] {
            for r in suite(id, &x0, k, 2) {
                assert!(r.outcome.is_pass(), "{id}: {} {:?}", r.name, r.outcome);
                assert!(r.samples_or_steps > 0, "{id}: {}", r.name);
            }
        }
    }

    #[test]
    fn fejer_descent_uses_shifted_weights() {
        let op = gallery_operator("negation").unwrap();
        let w = canonical_schedule();
        let traj = ishikawa(&op, &p(&[0.6, -0.3]), &w, 500).unwrap();
        let z = shifted_view(&traj, 25).unwrap();
        assert!(check_fejer_descent(&z, &p(&[0.0, 0.0]), &w, 1e-9).outcome.is_pass());
        let id = gallery_operator("identity").unwrap();
        let traj = ishikawa(&id, &p(&[0.3]), &w, 50).unwrap();
        let r = check_fejer_descent(&traj, &p(&[0.0]), &w, 1e-9);
        assert!(r.outcome.is_pass());
        assert_eq!(r.worst_margin, 0.0);
    }

    #[test]
    fn uniform_fejer_cases() {
        let op = gallery_operator("cubic").unwrap();
        let w = canonical_schedule();
        let traj = ishikawa(&op, &p(&[0.9]), &w, 200).unwrap();
        let z = shifted_view(&traj, 36).unwrap();
        assert!(check_uniform_fejer(&z, &op, 2, 0, 3, 2, 20, 1).outcome.is_pass());
        assert!(check_uniform_fejer(&z, &op, 2, 10, 0, 0, 20, 1).outcome.is_pass());
        assert!(check_uniform_fejer(&z, &op, 2, 500, 3, 0, 20, 1).outcome.is_inconclusive());
    }

    #[test]
    fn closedness_passes_and_adversary_fails() {
        let op = gallery_operator("cubic").unwrap();
        let m = closedness_moduli(Lipschitz::integer(2).unwrap());
        let r = check_uniform_closedness(&op, &|k| m.omega_f(k), &|k| m.delta_f(k), 200, 5, 1e-9, 4);
        assert!(r.outcome.is_pass(), "{:?}", r.outcome);
        let zero = |_: u64| BigUint::from(0u32);
        let r = check_uniform_closedness(&op, &zero, &|k| m.delta_f(k), 200, 5, 1e-9, 4);
        assert!(r.outcome.is_fail());
    }
}
