//! Twin experiment: recover the slab coefficients from clean and from
//! 1% noisy data with projected Landweber.
//!
//! `cargo run --release --example invert_twin`

use hyperwave::forward::forward_field;
use hyperwave::inversion::{add_noise, invert, relative_error_inf, InversionConfig};
use hyperwave::scenarios::{self, TWIN_START, TWIN_TRUTH};

fn main() -> hyperwave::Result<()> {
    let setup = scenarios::twin_setup()?;
    let clean = forward_field(&setup, &TWIN_TRUTH)?;

    let result = invert(&setup, &clean, &TWIN_START, &InversionConfig::default())?;
    println!(
        "clean: {:?} after {} iterations ({:?}), error {:.2e}",
        result.alpha,
        result.trace.records.len(),
        result.stop,
        relative_error_inf(&result.alpha, &TWIN_TRUTH)
    );

    let (noisy, delta) = add_noise(&setup, &clean, 0.01, 7)?;
    let config = InversionConfig {
        noise_level: delta,
        discrepancy_factor: 1.5,
        ..InversionConfig::default()
    };
    let result = invert(&setup, &noisy, &TWIN_START, &config)?;
    println!(
        "noisy: {:?} after {} iterations ({:?}), error {:.2e}",
        result.alpha,
        result.trace.records.len(),
        result.stop,
        relative_error_inf(&result.alpha, &TWIN_TRUTH)
    );
    Ok(())
}
