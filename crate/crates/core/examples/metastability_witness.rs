//! Metastability witnesses on the cubic operator compared with the rates Σ and Ω.

use metastab::iterate::ishikawa;
use metastab::operators::gallery_operator;
use metastab::rates::{BoundInputs, Counterfunction, Saturation};
use metastab::schedule::canonical_schedule;
use metastab::verify::{check_combined_omega, check_metastability_bound, MetastabilityQuery};
use metastab::Point;

fn short(s: String) -> String {
    if s.len() > 24 {
        format!("{}... ({} digits)", &s[..8], s.len())
    } else {
        s
    }
}

fn main() -> metastab::Result<()> {
    let sat = Saturation::default();
    let op = gallery_operator("cubic").expect("gallery operator");
    let w = canonical_schedule();
    let traj = ishikawa(&op, &Point::new(vec![0.9])?, &w, 50_000)?;
    let gamma = op.domain().total_boundedness_modulus();
    let inputs = BoundInputs {
        b: op.domain().diameter_bound(),
        lipschitz: op.lipschitz(),
        rate_beta: &w.rate_beta,
        rate_theta: &w.rate_theta,
        gamma: &gamma,
    };

    for k in 0..4 {
        for g in ["const(0)", "const(5)", "affine(1,1)", "pow(2)"] {
            let g: Counterfunction = g.parse()?;
            let q = MetastabilityQuery::new(k, g.clone(), 10_000)?;
            let meta = check_metastability_bound(&traj, &q, &inputs.sigma(k, &g, &sat));
            let comb = check_combined_omega(&traj, &q, &inputs.omega(k, &g, &sat));
            for r in [meta, comb] {
                let bound = r.bound.as_ref().map(|b| short(sat.render(b))).unwrap_or_default();
                println!("{:<13} {:<28} N = {:<6} bound {bound}", r.outcome.label(), r.name, r.witness.unwrap_or(0));
            }
        }
    }
    Ok(())
}
