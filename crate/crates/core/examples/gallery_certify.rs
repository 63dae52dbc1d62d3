//! Sample-based certification of every gallery operator.

use metastab::operators::{check_lipschitz, check_pseudocontraction, check_self_map, gallery, max_fixed_point_residual};
use metastab::Lipschitz;

fn main() -> metastab::Result<()> {
    for op in gallery() {
        let reports = [
            check_pseudocontraction(&op, 10_000, 1e-9, 1),
            check_lipschitz(&op, 10_000, 1e-9, 2),
            check_self_map(&op, 1_000, 3),
        ];
        let verdicts: Vec<&str> = reports.iter().map(|r| r.outcome.label()).collect();
        println!(
            "{:<14} L={:<4} fixed-point residual {:.1e}  {}",
            op.id(),
            op.lipschitz(),
            max_fixed_point_residual(&op)?,
            verdicts.join(" "),
        );
    }

    // claiming too small a constant is caught
    let cubic = metastab::operators::gallery_operator("cubic").expect("gallery operator");
    let r = check_lipschitz(&cubic.with_lipschitz(Lipschitz::integer(1)?), 10_000, 1e-9, 2);
    println!("cubic with L=1: {:?}", r.outcome);
    Ok(())
}
