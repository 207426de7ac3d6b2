//! Discrete and continuous adjoints: pairing certificate and gradient
//! agreement.
//!
//! `cargo run --example adjoint`

use hyperwave::adjoint::{apply_adjoint, AdjointMethod};
use hyperwave::forward::solve_forward;
use hyperwave::scenarios;
use hyperwave::sensitivity::Linearization;
use hyperwave::verify::{adjoint_certificate, consistency_weight};

fn main() -> hyperwave::Result<()> {
    let setup = scenarios::nonquadratic_small(2, 6, 16)?;
    let alpha = setup.alpha().as_slice().to_vec();
    for method in [AdjointMethod::Discrete, AdjointMethod::Continuous] {
        let cert = adjoint_certificate(&setup, &alpha, 20, 1, method)?;
        println!("{method:?}: max pairing mismatch over 20 trials {:.2e}", cert.max_mismatch);
    }

    let (u, _) = solve_forward(&setup)?;
    let lin = Linearization::new(&setup, &alpha, &u)?;
    let w = consistency_weight(setup.grid());
    let gd = apply_adjoint(&lin, &w, AdjointMethod::Discrete)?;
    let gc = apply_adjoint(&lin, &w, AdjointMethod::Continuous)?;
    println!("discrete   {gd:.6?}");
    println!("continuous {gc:.6?}");
    Ok(())
}
