//! Load an experiment file, solve it and write the field and a CSV copy.
//!
//! `cargo run --example config_run -- crates/core/examples/configs/mixed_2d.toml out/`

use std::path::PathBuf;

use hyperwave::config::load_config;
use hyperwave::forward::solve_forward;
use hyperwave::io::{save_field, write_field_csv};

fn main() -> hyperwave::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/mixed_2d.toml"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;

    let cfg = load_config(&config)?;
    let setup = cfg.build_setup()?;
    let (u, report) = solve_forward(&setup)?;
    save_field(out.join("u.field"), &u)?;
    write_field_csv(out.join("u.csv"), setup.grid(), &u)?;
    println!("{} steps, cfl {:.3}, wrote {}", setup.grid().steps(), report.cfl, out.display());
    Ok(())
}
