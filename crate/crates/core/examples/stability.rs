//! Lipschitz dependence on the coefficients and the Gronwall envelope of
//! the sensitivity energy.
//!
//! `cargo run --example stability`

use hyperwave::dictionary::{check_dim_condition, kappa_mu};
use hyperwave::scenarios;
use hyperwave::sensitivity::random_directions;
use hyperwave::verify::{gronwall_consistency, lipschitz_alpha_test, DEFAULT_LIPSCHITZ_STEPS};

fn main() -> hyperwave::Result<()> {
    for nonquadratic in [false, true] {
        let setup = scenarios::stability_setup(nonquadratic)?;
        let alpha = setup.alpha().as_slice().to_vec();
        let (kappa, mu) = kappa_mu(setup.dictionary(), &alpha)?;
        println!(
            "nonquadratic = {nonquadratic}: kappa = {kappa:.4}, mu = {mu:.4}, dimension condition {}",
            check_dim_condition(setup.dictionary(), &alpha)?
        );
        let dirs = random_directions(alpha.len(), 3, 5);
        let lip = lipschitz_alpha_test(&setup, &alpha, &dirs, &DEFAULT_LIPSCHITZ_STEPS)?;
        println!("  Lipschitz ratio spread over eps: {:.3}", lip.spread);
        let g = gronwall_consistency(&setup, &alpha, &[0.3, -0.2])?;
        println!("  Gronwall: b = {:.3}, k = {:.3}, max psi/envelope = {:.3e}", g.b, g.k, g.max_ratio);
    }
    Ok(())
}
