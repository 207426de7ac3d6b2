//! Frechet derivative of the forward map and its Taylor remainder.
//!
//! `cargo run --example derivative`

use hyperwave::forward::solve_forward;
use hyperwave::scenarios;
use hyperwave::sensitivity::{norm_l2_v, solve_frechet};
use hyperwave::verify::{taylor_order_test, DEFAULT_TAYLOR_STEPS};

fn main() -> hyperwave::Result<()> {
    let setup = scenarios::nonquadratic_small(1, 12, 24)?;
    let alpha = setup.alpha().as_slice().to_vec();
    let h = [0.5, -0.4, 0.8];
    let (u, _) = solve_forward(&setup)?;
    let v = solve_frechet(&setup, &alpha, &h, &u)?;
    println!("||T'(alpha) h|| = {:.6e}", norm_l2_v(setup.grid(), &v)?);

    let taylor = taylor_order_test(&setup, &alpha, &h, &DEFAULT_TAYLOR_STEPS)?;
    println!("{:>8} {:>12} {:>12}", "s", "remainder", "remainder/s");
    for row in &taylor.rows {
        println!(
            "{:>8.0e} {:>12.4e} {:>12.4e}",
            row.s,
            row.remainder.unwrap_or(f64::NAN),
            row.over_s.unwrap_or(f64::NAN)
        );
    }
    println!("slope {:.3}", taylor.slope.unwrap_or(f64::NAN));
    Ok(())
}
