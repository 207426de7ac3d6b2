//! Energy-density bound constants and their certification.
//!
//! `kappa[0..2]` and `mu[0..8]` hold the lower/upper constants of the
//! growth, coercivity and higher-derivative conditions an entry must meet.
//! Closed forms are used where they exist (all of the quadratic family,
//! the coercivity constants of the saturating family). Everything else is
//! the maximum over a deterministic sample set times [`SAFETY_FACTOR`].

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::family::{frob2, EnergyFamily};
use super::weight::SpatialWeight;

/// Multiplier applied to sampled suprema.
pub const SAFETY_FACTOR: f64 = 1.05;

/// Radius of the strain ball used for bounds that grow without limit in
/// `Y` (the spatial derivative of the stress, `mu[4]`).
pub const STRAIN_BALL_RADIUS: f64 = 1.0;

/// Zero bounds are replaced by this value so every constant is positive.
pub const BOUND_FLOOR: f64 = 1e-12;

const SAMPLE_SEED: u64 = 0x5eed_b0_u64;
const RANDOM_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// `kappa^[0]`, `kappa^[1]`.
    pub kappa: [f64; 2],
    /// `mu^[0]` ... `mu^[7]`.
    pub mu: [f64; 8],
}

impl BoundConstants {
    pub(crate) fn validate(&self) -> Result<(), String> {
        for (i, v) in self.kappa.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(format!("kappa[{i}] must be positive and finite, got {v}"));
            }
        }
        for (i, v) in self.mu.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(format!("mu[{i}] must be positive and finite, got {v}"));
            }
        }
        if self.kappa[0] > self.mu[0] || self.kappa[1] > self.mu[1] {
            return Err("lower bounds exceed upper bounds".into());
        }
        Ok(())
    }
}

/// Bounds of the weight-free strain function `C_hat(Y)`.
#[derive(Debug, Clone, Copy)]
struct StrainBounds {
    energy_lower: f64,
    energy_upper: f64,
    hessian_lower: f64,
    hessian_upper: f64,
    third: f64,
    fourth: f64,
    /// `sup |dC/dY_ab|` over the strain ball.
    stress_ball: f64,
    /// `sup |d^2 C / dY_ab dY_cd|` over all strains.
    hessian_entry: f64,
}

pub(crate) fn certify(dim: usize, family: &EnergyFamily, weight: &SpatialWeight) -> BoundConstants {
    let s = match family {
        EnergyFamily::Quadratic { .. } => quadratic_bounds(dim, family),
        EnergyFamily::Saturating { .. } => sampled_bounds(dim, family),
    };
    let lo = weight.min_value();
    let hi = weight.max_value();
    let grad = weight.gradient_bound();
    let pos = |v: f64| if v > BOUND_FLOOR { v } else { BOUND_FLOOR };
    BoundConstants {
        kappa: [lo * s.energy_lower, lo * s.hessian_lower],
        mu: [
            hi * s.energy_upper,
            hi * s.hessian_upper,
            pos(hi * s.third),
            pos(hi * s.fourth),
            pos(grad * s.stress_ball),
            pos(grad * s.hessian_entry),
            pos(grad * s.hessian_entry),
            pos(grad * s.third),
        ],
    }
}

fn quadratic_bounds(dim: usize, family: &EnergyFamily) -> StrainBounds {
    let (a, b, c) = family.quadratic_part();
    let dd = dim * dim;
    let upper = a + b * dim as f64 + c;
    let mut hess = vec![0.0; dd * dd];
    family.hessian(dim, &vec![0.0; dd], &mut hess);
    // The stress is linear, so its largest entry on the ball is the largest
    // Euclidean row norm of the Hessian times the radius.
    let stress_ball = hess
        .chunks(dd)
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        * STRAIN_BALL_RADIUS;
    let hessian_entry = hess.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    StrainBounds {
        energy_lower: a,
        energy_upper: upper,
        hessian_lower: 2.0 * a,
        hessian_upper: 2.0 * upper,
        third: 0.0,
        fourth: 0.0,
        stress_ball,
        hessian_entry,
    }
}

/// Deterministic strain samples: structured directions on a radius ladder
/// plus Gaussian directions with log-uniform radii.
pub(crate) fn strain_samples(dim: usize) -> Vec<Vec<f64>> {
    let dd = dim * dim;
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let mut ident = vec![0.0; dd];
    for i in 0..dim {
        ident[i * dim + i] = 1.0;
    }
    dirs.push(ident);
    for i in 0..dim {
        for j in 0..dim {
            let mut e = vec![0.0; dd];
            e[i * dim + j] = 1.0;
            dirs.push(e.clone());
            if i < j {
                e[j * dim + i] = 1.0;
                dirs.push(e.clone());
                e[j * dim + i] = -1.0;
                dirs.push(e);
            }
        }
    }
    for d in dirs.iter_mut() {
        let n = frob2(d).sqrt();
        d.iter_mut().for_each(|v| *v /= n);
    }

    let mut out = vec![vec![0.0; dd]];
    for k in 0..=60 {
        let r = 10f64.powf(-3.0 + 5.0 * k as f64 / 60.0);
        for d in &dirs {
            out.push(d.iter().map(|v| v * r).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for _ in 0..RANDOM_SAMPLES {
        let mut y: Vec<f64> = (0..dd).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = frob2(&y).sqrt();
        let r = 10f64.powf(rng.random_range(-3.0..2.0));
        y.iter_mut().for_each(|v| *v *= r / n);
        out.push(y);
    }
    out
}

fn sampled_bounds(dim: usize, family: &EnergyFamily) -> StrainBounds {
    let dd = dim * dim;
    let quad = quadratic_bounds(dim, family);
    let mut hess = vec![0.0; dd * dd];
    let mut stress = vec![0.0; dd];
    let mut energy_ratio: f64 = 0.0;
    let mut hess_max: f64 = 0.0;
    let mut third: f64 = 0.0;
    let mut fourth: f64 = 0.0;
    let mut stress_ball: f64 = 0.0;
    let mut hess_entry: f64 = 0.0;
    for y in strain_samples(dim) {
        let s = frob2(&y);
        if s > 0.0 {
            energy_ratio = energy_ratio.max(family.energy(dim, &y) / s);
        }
        family.hessian(dim, &y, &mut hess);
        hess_entry = hess.iter().fold(hess_entry, |m, v| m.max(v.abs()));
        let eig = DMatrix::from_row_slice(dd, dd, &hess).symmetric_eigenvalues();
        hess_max = hess_max.max(eig.max());
        if s.sqrt() <= STRAIN_BALL_RADIUS {
            family.stress(dim, &y, &mut stress);
            stress_ball = stress.iter().fold(stress_ball, |m, v| m.max(v.abs()));
        }
        for a in 0..dd {
            for b in 0..dd {
                for c in 0..dd {
                    third = third.max(family.third_entry(&y, a, b, c).abs());
                    for e in 0..dd {
                        fourth = fourth.max(family.fourth_entry(&y, a, b, c, e).abs());
                    }
                }
            }
        }
    }
    StrainBounds {
        // psi >= 0 with a positive semi-definite Hessian, so the quadratic
        // part's lower bounds stay valid.
        energy_lower: quad.energy_lower,
        hessian_lower: quad.hessian_lower,
        energy_upper: SAFETY_FACTOR * energy_ratio,
        hessian_upper: SAFETY_FACTOR * hess_max,
        third: SAFETY_FACTOR * third,
        fourth: SAFETY_FACTOR * fourth,
        stress_ball: SAFETY_FACTOR * stress_ball,
        hessian_entry: SAFETY_FACTOR * hess_entry,
    }
}
