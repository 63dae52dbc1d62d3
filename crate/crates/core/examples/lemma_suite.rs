//! The inequality battery along a negation trajectory.

use metastab::iterate::{ishikawa, shifted_view};
use metastab::operators::gallery_operator;
use metastab::rates::{closedness_moduli, compute_k, Saturation};
use metastab::schedule::canonical_schedule;
use metastab::verify::{check_lemma_suite, check_uniform_closedness, check_uniform_fejer, LemmaSuiteInput};
use metastab::Point;

fn main() -> metastab::Result<()> {
    let sat = Saturation::default();
    let op = gallery_operator("negation").expect("gallery operator");
    let w = canonical_schedule();
    let traj = ishikawa(&op, &Point::new(vec![0.6, -0.3])?, &w, 10_000)?;
    let shift = compute_k(op.lipschitz(), &w.rate_beta, &sat).to_u64().expect("small shift") as usize;
    let b = op.domain().diameter_bound();

    let mut points = op.known_fixed_points().to_vec();
    points.push(Point::new(vec![0.2, 0.5])?);
    let input = LemmaSuiteInput { op: &op, schedule: &w, points: &points, shift, b, slack: 1e-9 };
    for r in check_lemma_suite(&traj, &input) {
        println!("{:<13} {}", r.outcome.label(), r.name);
    }

    let z = shifted_view(&traj, shift)?;
    let fejer = check_uniform_fejer(&z, &op, b, 0, 1, 2, 20, 1);
    println!("{:<13} {}", fejer.outcome.label(), fejer.name);
    let moduli = closedness_moduli(op.lipschitz());
    let closed = check_uniform_closedness(&op, &|k| moduli.omega_f(k), &|k| moduli.delta_f(k), 1_000, 5, 1e-9, 2);
    println!("{:<13} {}", closed.outcome.label(), closed.name);
    Ok(())
}
