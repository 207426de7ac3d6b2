//! Reference problems shared by the examples, the acceptance suite and the
//! command line defaults.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::dictionary::{CoefficientVector, EnergyDictionary, EnergyEntry, EnergyFamily, SpatialWeight};
use crate::error::Result;
use crate::forward::ProblemSetup;
use crate::grid::{Grid, MaterialField, SpaceTimeField};

/// Coefficients of the twin experiment.
pub const TWIN_TRUTH: [f64; 3] = [1.0, 1.5, 0.8];
/// Starting guess of the twin experiment.
pub const TWIN_START: [f64; 3] = [1.0, 1.0, 1.0];
/// Weight floor of the slab dictionaries.
pub const SLAB_FLOOR: f64 = 0.05;
/// `eps` of the saturating entries in the slab dictionary.
pub const SLAB_EPS: f64 = 0.5;
/// `eps` of the saturating entry in the stability dictionary; small enough
/// that `7/8 mu < kappa` holds after the certification safety factor.
pub const STABILITY_EPS: f64 = 0.05;

/// `count` entries whose weights are bumps on consecutive slabs
/// `[k/count, (k+1)/count]` along the first axis, floor [`SLAB_FLOOR`].
pub fn slab_dictionary(dim: usize, count: usize, family: EnergyFamily) -> Result<EnergyDictionary> {
    let width = 1.0 / count as f64;
    let entries = (0..count)
        .map(|k| {
            let mut lower = vec![0.0; dim];
            let mut upper = vec![1.0; dim];
            lower[0] = k as f64 * width;
            upper[0] = (k + 1) as f64 * width;
            let weight = SpatialWeight::Bump {
                lower,
                upper,
                ramp: 0.25 * width,
                floor: SLAB_FLOOR,
            };
            EnergyEntry::new(dim, family, weight)
        })
        .collect::<Result<_>>()?;
    EnergyDictionary::new(dim, entries)
}

/// Three quadratic slab entries.
pub fn quadratic_slabs(dim: usize) -> Result<EnergyDictionary> {
    slab_dictionary(dim, 3, EnergyFamily::quadratic(1.0))
}

/// Quadratic and saturating entries alternating over three slabs.
pub fn mixed_slabs(dim: usize) -> Result<EnergyDictionary> {
    let width = 1.0 / 3.0;
    let fams = [
        EnergyFamily::saturating(1.0, SLAB_EPS),
        EnergyFamily::quadratic(1.0),
        EnergyFamily::saturating(0.5, SLAB_EPS),
    ];
    let entries = fams
        .iter()
        .enumerate()
        .map(|(k, fam)| {
            let mut lower = vec![0.0; dim];
            let mut upper = vec![1.0; dim];
            lower[0] = k as f64 * width;
            upper[0] = (k + 1) as f64 * width;
            EnergyEntry::new(
                dim,
                *fam,
                SpatialWeight::Bump {
                    lower,
                    upper,
                    ramp: 0.25 * width,
                    floor: SLAB_FLOOR,
                },
            )
        })
        .collect::<Result<_>>()?;
    EnergyDictionary::new(dim, entries)
}

/// Constant-weight dictionary meeting the dimension condition for every
/// positive coefficient vector: two quadratic entries, or a quadratic and
/// a weakly saturating entry.
pub fn stability_dictionary(dim: usize, nonquadratic: bool) -> Result<EnergyDictionary> {
    let second = if nonquadratic {
        EnergyFamily::saturating(1.0, STABILITY_EPS)
    } else {
        EnergyFamily::Quadratic {
            a: 1.0,
            b: 0.0,
            c: 0.0,
        }
    };
    EnergyDictionary::new(
        dim,
        vec![
            EnergyEntry::new(dim, EnergyFamily::quadratic(1.0), SpatialWeight::constant(1.0))?,
            EnergyEntry::new(dim, second, SpatialWeight::constant(1.0))?,
        ],
    )
}

/// Superposition of the first two sine modes per axis, scaled by
/// `amplitude`; component `c` is scaled by `1 - 0.3 c`.
pub fn smooth_displacement(grid: &Grid, amplitude: f64) -> Array2<f64> {
    let d = grid.dim();
    Array2::from_shape_fn((grid.nodes(), d), |(node, c)| {
        let x = grid.node_position(node);
        let mut v = 1.0;
        for a in 0..d {
            v *= (PI * x[a]).sin() + 0.5 * (2.0 * PI * x[a]).sin();
        }
        amplitude * (1.0 - 0.3 * c as f64) * v
    })
}

/// Gaussian load pulse centred at `centre` in the first axis, active for
/// `t < 0.2`.
pub fn pulse_force(grid: &Grid, amplitude: f64, centre: f64) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, |t, x, out| {
        let envelope = if t < 0.2 { (PI * t / 0.2).sin().powi(2) } else { 0.0 };
        let r2 = (x[0] - centre).powi(2);
        let v = amplitude * envelope * (-r2 / 0.01).exp();
        out.iter_mut().for_each(|o| *o = v);
    })
}

/// Smooth initial data, unit density, a load pulse.
pub fn reference_setup(
    dim: usize,
    n: usize,
    steps: usize,
    horizon: f64,
    dict: EnergyDictionary,
    alpha: Vec<f64>,
    amplitude: f64,
) -> Result<ProblemSetup> {
    let grid = Grid::new(dim, n, horizon, steps)?;
    let material = MaterialField::from_fn(&grid, |x| 1.0 + 0.2 * x[0])?;
    let u0 = smooth_displacement(&grid, amplitude);
    let u1 = u0.mapv(|v| -0.5 * v);
    let force = pulse_force(&grid, 5.0 * amplitude, 0.7);
    ProblemSetup::new(grid, material, dict, CoefficientVector::new(alpha)?)?
        .with_initial(u0, u1)?
        .with_force(force)
}

/// Twin experiment: `d = 1`, `n = 16`, `m = 64`, three quadratic slabs,
/// coefficients at [`TWIN_TRUTH`].
pub fn twin_setup() -> Result<ProblemSetup> {
    reference_setup(1, 16, 64, 0.6, quadratic_slabs(1)?, TWIN_TRUTH.to_vec(), 1.0)
}

/// Small quadratic slab problem for adjoint certification.
pub fn quadratic_small(dim: usize, n: usize, steps: usize) -> Result<ProblemSetup> {
    reference_setup(dim, n, steps, 0.25, quadratic_slabs(dim)?, vec![1.0, 1.3, 0.8], 0.3)
}

/// Mixed slab problem with strains of order one, so the saturating part is
/// active.
pub fn nonquadratic_small(dim: usize, n: usize, steps: usize) -> Result<ProblemSetup> {
    reference_setup(dim, n, steps, 0.25, mixed_slabs(dim)?, vec![1.0, 1.3, 0.8], 0.3)
}

/// Time horizon `0.5` with `m = 4 (n + 1)`, fine enough for CFL 0.5 at
/// coefficient sums up to about 4.
pub fn refined_small(dim: usize, n: usize, nonquadratic: bool) -> Result<ProblemSetup> {
    let dict = if nonquadratic { mixed_slabs(dim)? } else { quadratic_slabs(dim)? };
    reference_setup(dim, n, 4 * (n + 1), 0.5, dict, vec![1.0, 1.3, 0.8], 0.3)
}

/// Stability test problem at `alpha = (1, 1)`.
pub fn stability_setup(nonquadratic: bool) -> Result<ProblemSetup> {
    reference_setup(1, 16, 64, 0.5, stability_dictionary(1, nonquadratic)?, vec![1.0, 1.0], 0.3)
}
