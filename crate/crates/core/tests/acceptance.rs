//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use metastab::iterate::{ishikawa, shifted_view, Trajectory};
use metastab::numkernel::{AmbientSet, Point};
use metastab::operators::{check_lipschitz, check_pseudocontraction, gallery_operator, OperatorSpec};
use metastab::rates::{
    afp_bounds, canonical_shift, closedness_moduli, compute_k, compute_m, delta, delta_tilde, fejer_modulus_chi,
    gamma_exp, omega_prime, table1_constants, BoundInputs, BoundNat, Counterfunction, Lipschitz, Saturation,
};
use metastab::schedule::canonical_schedule;
use metastab::verify::{
    check_combined_omega, check_fejer_descent, check_lemma_suite, check_liminf_modulus, check_metastability_bound,
    check_uniform_closedness, check_uniform_fejer, find_liminf_witness, find_metastable_witness, CertReport,
    LemmaSuiteInput, MetastabilityQuery, DEFAULT_SEARCH_CAP, DEFAULT_TRAJECTORY_LENGTH,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn p(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

struct Setting {
    id: &'static str,
    op: OperatorSpec,
    x0: Point,
}

impl Setting {
    fn b(&self) -> u64 {
        self.op.domain().diameter_bound()
    }

    fn shift(&self, sat: &Saturation) -> BoundNat {
        compute_k(self.op.lipschitz(), &canonical_schedule().rate_beta, sat)
    }

    fn run(&self, steps: usize) -> Trajectory {
        ishikawa(&self.op, &self.x0, &canonical_schedule(), steps).unwrap()
    }
}

/// The two reference scenarios: `x − x³` on `[−1, 1]` and `−x` on the unit disc.
fn settings() -> [Setting; 2] {
    [
        Setting { id: "cubic", op: gallery_operator("cubic").unwrap(), x0: p(&[0.9]) },
        Setting { id: "negation", op: gallery_operator("negation").unwrap(), x0: p(&[0.6, -0.3]) },
    ]
}

fn expect(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn all_pass(reports: &[CertReport]) -> Result<(), String> {
    match reports.iter().find(|r| !r.outcome.is_pass()) {
        None => Ok(()),
        Some(r) => Err(format!("{}: {:?}", r.name, r.outcome)),
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let elapsed = started.elapsed();
    expect(elapsed <= limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn formula_exactness() -> Outcome {
    let started = Instant::now();
    let count = exact_values(&Saturation::default())?;
    within(Duration::from_secs(1), started)?;
    Ok(format!("{count} exact values"))
}

fn exact_values(sat: &Saturation) -> Result<usize, String> {
    let one = Lipschitz::integer(1).unwrap();
    let two = Lipschitz::integer(2).unwrap();
    let beta = Counterfunction::shifted_square();
    let theta = Counterfunction::Power(4);
    let gamma = Counterfunction::Affine(1, 1);
    let n = |v: u64| sat.nat(v);
    let four16 = sat.nat(num_bigint::BigUint::from(4u32).pow(16) + 25u32);

    let checks: Vec<(&str, BoundNat, BoundNat)> = vec![
        ("K(L=1)", compute_k(one, &beta, sat), n(25)),
        ("K(L=2)", compute_k(two, &beta, sat), n(36)),
        ("M(1,0)", compute_m(1, 0, sat), n(4)),
        ("delta(1,0,0)", delta(1, &theta, 0, 0, sat), n(256)),
        ("gamma_exp(1,1,0,0)", gamma_exp(1, one, 0, 0, sat), n(281)),
        ("omega_F(0)", sat.clamp(closedness_moduli(one).omega_f(0)), n(4)),
        ("delta_F(0)", sat.clamp(closedness_moduli(one).delta_f(0)), n(1)),
        ("chi(1,.,2,0)", sat.clamp(fejer_modulus_chi(1, 0, 2, 0)), n(16)),
        ("K0(L=1)", canonical_shift(one, sat), n(25)),
    ];
    for (name, got, want) in &checks {
        expect(got == want, || format!("{name}: got {got}, want {want}"))?;
    }
    let c = table1_constants(one, &beta, &gamma, 0, sat);
    expect(
        (c.shift.clone(), c.p.clone(), sat.clamp(c.k0.clone()), c.p0.clone()) == (n(25), n(4), n(2), n(10)),
        || format!("table1 constants {c:?}"),
    )?;
    let inputs = BoundInputs { b: 1, lipschitz: one, rate_beta: &beta, rate_theta: &theta, gamma: &gamma };
    let zero = Counterfunction::Const(0);
    expect(inputs.sigma(0, &zero, sat) == n(281), || "sigma".into())?;
    expect(inputs.omega(0, &zero, sat) == four16, || "omega".into())?;
    expect(omega_prime(1, &gamma, one, 0, &zero, sat) == four16, || "omega_prime".into())?;
    Ok(checks.len() + 4)
}

/// Witness-versus-bound comparisons gathered from the liminf and metastability checks.
fn comparisons(sat: &Saturation) -> Vec<(String, u64, BoundNat)> {
    let w = canonical_schedule();
    let mut out = Vec::new();
    for s in settings() {
        let traj = s.run(20_000);
        let b = s.b();
        let shift = s.shift(sat);
        let gamma = s.op.domain().total_boundedness_modulus();
        let inputs = BoundInputs {
            b,
            lipschitz: s.op.lipschitz(),
            rate_beta: &w.rate_beta,
            rate_theta: &w.rate_theta,
            gamma: &gamma,
        };
        let afp = afp_bounds(b, &w.rate_theta, shift.clone());
        for k in 0..=3 {
            for l in [0, 5, 10] {
                let wit = find_liminf_witness(&traj, l, k).unwrap();
                out.push((format!("{} delta_tilde({l},{k})", s.id), wit, delta_tilde(b, &w.rate_theta, &shift, l, k, sat)));
                out.push((format!("{} gamma_exp({l},{k})", s.id), wit, gamma_exp(b, s.op.lipschitz(), l, k, sat)));
            }
            let wit = find_liminf_witness(&traj, 0, k).unwrap();
            out.push((format!("{} phi({k})", s.id), wit, afp.phi(k, sat)));
        }
        for k in 0..=2 {
            for g in [Counterfunction::Const(0), Counterfunction::Const(5), Counterfunction::Affine(1, 1)] {
                let q = MetastabilityQuery::new(k, g.clone(), 5_000).unwrap();
                let wit = find_metastable_witness(&traj, &q).unwrap().unwrap();
                out.push((format!("{} sigma({k},{g})", s.id), wit, inputs.sigma(k, &g, sat)));
                out.push((format!("{} omega({k},{g})", s.id), wit, inputs.omega(k, &g, sat)));
                out.push((format!("{} omega_prime({k},{g})", s.id), wit, omega_prime(b, &gamma, s.op.lipschitz(), k, &g, sat)));
            }
        }
    }
    out
}

fn saturation_soundness() -> Outcome {
    let started = Instant::now();
    let small = Saturation::new(64);
    let large = Saturation::new(4096);
    let formulas = exact_values(&small)? + exact_values(&large)?;
    let a = comparisons(&small);
    let b = comparisons(&large);
    let mut exact_vs_huge = 0;
    for ((name, wa, ba), (_, wb, bb)) in a.iter().zip(&b) {
        expect(wa == wb, || format!("{name}: witnesses differ"))?;
        expect(ba.admits(*wa) == bb.admits(*wb), || format!("{name}: verdicts differ ({ba} vs {bb})"))?;
        if ba.is_huge() && !bb.is_huge() {
            exact_vs_huge += 1;
        }
        if let BoundNat::Exact(v) = ba {
            expect(bb == &BoundNat::Exact(v.clone()), || format!("{name}: exact values differ"))?;
        }
    }
    within(Duration::from_secs(1), started)?;
    Ok(format!("{formulas} formula values at both thresholds, {} comparisons agree ({exact_vs_huge} saturate only at 1e64)", a.len()))
}

fn operator_certification() -> Outcome {
    let started = Instant::now();
    for id in ["negation", "rotation-pi3", "cubic", "strict-k13"] {
        let op = gallery_operator(id).unwrap();
        all_pass(&[check_pseudocontraction(&op, 10_000, 1e-9, 1), check_lipschitz(&op, 10_000, 1e-9, 2)])?;
    }
    let lowered = gallery_operator("cubic").unwrap().with_lipschitz(Lipschitz::integer(1).unwrap());
    let r = check_lipschitz(&lowered, 10_000, 1e-9, 3);
    expect(r.outcome.is_fail(), || "cubic with L=1 was not rejected".into())?;
    within(Duration::from_secs(5), started)?;
    Ok("4 operators certified, lowered constant rejected".into())
}

fn lemma_suite() -> Outcome {
    let started = Instant::now();
    let sat = Saturation::default();
    let w = canonical_schedule();
    let mut count = 0;
    for s in settings() {
        let traj = s.run(10_000);
        let shift = s.shift(&sat).to_u64().unwrap() as usize;
        let mut points = s.op.known_fixed_points().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        points.extend((0..4).map(|_| s.op.domain().sample(&mut rng)));
        let input = LemmaSuiteInput { op: &s.op, schedule: &w, points: &points, shift, b: s.b(), slack: 1e-9 };
        let reports = check_lemma_suite(&traj, &input);
        all_pass(&reports).map_err(|e| format!("{}: {e}", s.id))?;
        let z = shifted_view(&traj, shift).unwrap();
        for fp in s.op.known_fixed_points() {
            all_pass(&[check_fejer_descent(&z, fp, &w, 1e-9)]).map_err(|e| format!("{}: {e}", s.id))?;
        }
        count += reports.len();
    }
    within(Duration::from_secs(10), started)?;
    Ok(format!("{count} inequality reports, 10^4 steps on each of 2 scenarios"))
}

fn liminf_modulus() -> Outcome {
    let started = Instant::now();
    let sat = Saturation::default();
    let theta = canonical_schedule().rate_theta;
    let mut checked = 0;
    for s in settings() {
        let traj = s.run(20_000);
        let shift = s.shift(&sat);
        let bound = |l, k| delta_tilde(s.b(), &theta, &shift, l, k, &sat);
        let r = check_liminf_modulus(s.id, &traj, &bound, &[0, 5, 10], &[0, 1, 2, 3]);
        all_pass(&[r])?;
        for l in [0, 5, 10] {
            for k in 0..=3 {
                let n = find_liminf_witness(&traj, l, k).ok_or_else(|| format!("{}: no witness", s.id))?;
                expect(n >= l && bound(l, k).admits(n), || format!("{} ({l},{k}): N={n}", s.id))?;
                expect(traj.residuals()[n as usize] <= 1.0 / (k as f64 + 1.0), || "residual".into())?;
                checked += 1;
            }
        }
    }
    within(Duration::from_secs(10), started)?;
    Ok(format!("{checked} grid points"))
}

fn metastability() -> Outcome {
    let started = Instant::now();
    let sat = Saturation::default();
    let w = canonical_schedule();
    let mut largest = 0;
    for s in settings() {
        let traj = s.run(DEFAULT_TRAJECTORY_LENGTH);
        let gamma = s.op.domain().total_boundedness_modulus();
        let inputs = BoundInputs {
            b: s.b(),
            lipschitz: s.op.lipschitz(),
            rate_beta: &w.rate_beta,
            rate_theta: &w.rate_theta,
            gamma: &gamma,
        };
        for k in 0..=2 {
            for g in [Counterfunction::Const(0), Counterfunction::Const(5), Counterfunction::Affine(1, 1)] {
                let q = MetastabilityQuery::new(k, g.clone(), DEFAULT_SEARCH_CAP).unwrap();
                let meta = check_metastability_bound(&traj, &q, &inputs.sigma(k, &g, &sat));
                let comb = check_combined_omega(&traj, &q, &inputs.omega(k, &g, &sat));
                all_pass(&[meta.clone(), comb.clone()]).map_err(|e| format!("{}: {e}", s.id))?;
                largest = largest.max(meta.witness.unwrap()).max(comb.witness.unwrap());
            }
        }
    }
    within(Duration::from_secs(60), started)?;
    Ok(format!("18 queries, largest witness {largest}"))
}

fn uniform_moduli() -> Outcome {
    let started = Instant::now();
    let sat = Saturation::default();
    let mut reports = 0;
    for s in settings() {
        let traj = s.run(1_000);
        let z = shifted_view(&traj, s.shift(&sat).to_u64().unwrap() as usize).unwrap();
        for n in [0, 10] {
            for m in [0, 1, 3] {
                for r in [0, 2] {
                    let rep = check_uniform_fejer(&z, &s.op, s.b(), n, m, r, 20, 100 * n + 10 * m + r);
                    all_pass(&[rep]).map_err(|e| format!("{}: {e}", s.id))?;
                    reports += 1;
                }
            }
        }
        let moduli = closedness_moduli(s.op.lipschitz());
        let rep = check_uniform_closedness(&s.op, &|k| moduli.omega_f(k), &|k| moduli.delta_f(k), 1000, 5, 1e-9, 5);
        all_pass(&[rep]).map_err(|e| format!("{}: {e}", s.id))?;
        reports += 1;
    }
    within(Duration::from_secs(10), started)?;
    Ok(format!("{reports} reports"))
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Points pairwise farther apart than `eps`, as many as rejection sampling finds.
fn spread_points(set: &AmbientSet, eps: f64, want: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for _ in 0..want * 4 {
        if pts.len() >= want {
            break;
        }
        let c = set.sample(rng).coords().to_vec();
        if pts.iter().all(|q| dist_sq(q, &c) > eps * eps) {
            pts.push(c);
        }
    }
    pts
}

fn has_close_pair(pts: &[Vec<f64>], eps: f64) -> bool {
    pts.iter().enumerate().any(|(i, a)| pts[i + 1..].iter().any(|b| dist_sq(a, b) <= eps * eps))
}

fn pigeonhole() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sequences = 0;
    for d in 1..=3 {
        let sets = [
            AmbientSet::unit_box(d),
            AmbientSet::new_box(Point::zeros(d), Point::new((0..d).map(|i| 0.3 + 0.2 * i as f64).collect()).unwrap())
                .unwrap(),
            AmbientSet::new_ball(Point::zeros(d), 0.5).unwrap(),
        ];
        for set in &sets {
            let gamma = set.total_boundedness_modulus();
            for k in 0..=3u64 {
                let count = gamma.at(k).unwrap() as usize + 1;
                let eps = 1.0 / (k as f64 + 1.0);
                for trial in 0..100 {
                    let mut pts = if trial % 2 == 0 { spread_points(set, eps, count, &mut rng) } else { Vec::new() };
                    while pts.len() < count {
                        pts.push(set.sample(&mut rng).coords().to_vec());
                    }
                    // shuffle so the spread prefix does not sit first
                    for i in (1..pts.len()).rev() {
                        pts.swap(i, rng.gen_range(0..=i));
                    }
                    expect(has_close_pair(&pts, eps), || format!("{set:?} k={k}: {count} points pairwise > {eps}"))?;
                    sequences += 1;
                }
            }
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!("{sequences} sequences"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let verify = |file: &str, out: &str| {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_metastab"))
            .args(["verify", scenario(file).to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?
            .status;
        Ok::<_, String>((status.code(), std::fs::read(out).map_err(|e| e.to_string())?))
    };
    let (code_a, a) = verify("negation.toml", "a.json")?;
    let (code_b, b) = verify("negation.toml", "b.json")?;
    expect(a == b, || "reports differ between runs".into())?;
    expect(code_a == Some(0) && code_b == Some(0), || format!("passing scenario exited with {code_a:?}"))?;
    let (code, _) = verify("adversarial.toml", "c.json")?;
    expect(code == Some(1), || format!("adversarial scenario exited with {code:?}"))?;
    Ok(format!("{} identical bytes, exit codes 0 and 1", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("formula exactness", formula_exactness),
        ("saturation soundness", saturation_soundness),
        ("operator certification", operator_certification),
        ("lemma suite", lemma_suite),
        ("liminf modulus", liminf_modulus),
        ("metastability", metastability),
        ("uniform moduli", uniform_moduli),
        ("total boundedness pigeonhole", pigeonhole),
        ("determinism and exit codes", cli_contract),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = check();
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}; {secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail}; {secs:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
