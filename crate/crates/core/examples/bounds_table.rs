//! Effective moduli and rates for the canonical schedule at a few Lipschitz constants.

use metastab::rates::{
    afp_bounds, compute_k, delta_tilde, omega_prime, BoundInputs, Counterfunction, Lipschitz, Saturation,
};
use metastab::schedule::canonical_schedule;

fn main() -> metastab::Result<()> {
    let sat = Saturation::default();
    let w = canonical_schedule();
    let gamma = Counterfunction::Affine(1, 1);
    let b = 1;

    for l in [1, 2, 5] {
        let lip = Lipschitz::integer(l)?;
        let shift = compute_k(lip, &w.rate_beta, &sat);
        let afp = afp_bounds(b, &w.rate_theta, shift.clone());
        println!("L = {l}: K = {}", sat.render(&shift));
        for k in 0..3 {
            println!(
                "  k={k}  delta_tilde(0,k) = {:<12} phi(k) = {}",
                sat.render(&delta_tilde(b, &w.rate_theta, &shift, 0, k, &sat)),
                sat.render(&afp.phi(k, &sat)),
            );
        }
        let inputs = BoundInputs { b, lipschitz: lip, rate_beta: &w.rate_beta, rate_theta: &w.rate_theta, gamma: &gamma };
        for g in [Counterfunction::Const(0), Counterfunction::Const(1)] {
            println!(
                "  g={g:<9} sigma = {:<8} omega = {:<12} omega' = {}",
                sat.render(&inputs.sigma(0, &g, &sat)),
                sat.render(&inputs.omega(0, &g, &sat)),
                sat.render(&omega_prime(b, &gamma, lip, 0, &g, &sat)),
            );
        }
    }
    Ok(())
}
