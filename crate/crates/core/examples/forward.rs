//! Solve the twin problem forward and print the energy history.
//!
//! `cargo run --example forward`

use hyperwave::forward::{energy_budget, solve_forward};
use hyperwave::scenarios;

fn main() -> hyperwave::Result<()> {
    let setup = scenarios::twin_setup()?;
    let (u, report) = solve_forward(&setup)?;
    let energy = energy_budget(&u, &setup)?;
    println!("grid: d = {}, n = {}, steps = {}", setup.grid().dim(), setup.grid().n(), setup.grid().steps());
    println!("cfl number {:.3}, max |u| {:.4}", report.cfl, u.max_abs());
    for k in (0..=setup.grid().steps()).step_by(8) {
        println!("t = {:.3}  E = {:.6}", setup.grid().time(k), energy[k]);
    }
    Ok(())
}
