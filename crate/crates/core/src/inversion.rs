//! Projected Landweber iteration for the coefficients, with discrepancy
//! stopping and a best-iterate return.
//!
//! Data misfit is measured in `L2(0,T;V)` (L2 plus the gradient seminorm,
//! weight one each); its gradient is `T'(alpha)^*` applied to the Riesz
//! representer `r - div J r` of the residual `r = T(alpha) - u_meas`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::adjoint::{apply_adjoint, AdjointMethod};
use crate::dictionary::{check_admissible, AdmissibilityThresholds, EnergyDictionary};
use crate::error::{Error, Result};
use crate::forward::{forward_field, ProblemSetup};
use crate::grid::SpaceTimeField;
use crate::sensitivity::{inner_l2_v, norm_l2_v, riesz_weight, Linearization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionConfig {
    /// Landweber step `omega`; estimated from the derivative when absent.
    #[serde(default)]
    pub step_size: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Noise level `delta` of the data in the `L2(0,T;V)` norm.
    #[serde(default)]
    pub noise_level: f64,
    #[serde(default = "default_discrepancy")]
    pub discrepancy_factor: f64,
    #[serde(default = "default_alpha_min")]
    pub alpha_min: f64,
    #[serde(default)]
    pub method: AdjointMethod,
    #[serde(default)]
    pub thresholds: Option<AdmissibilityThresholds>,
    /// Consecutive non-decreasing iterations before giving up.
    #[serde(default = "default_stall_limit")]
    pub stall_limit: usize,
    /// Safety factor of the estimated step: `omega = factor / L`.
    #[serde(default = "default_step_factor")]
    pub step_factor: f64,
}

fn default_max_iterations() -> usize {
    500
}
fn default_discrepancy() -> f64 {
    1.5
}
fn default_alpha_min() -> f64 {
    1e-3
}
fn default_stall_limit() -> usize {
    10
}
fn default_step_factor() -> f64 {
    0.9
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            step_size: None,
            max_iterations: default_max_iterations(),
            noise_level: 0.0,
            discrepancy_factor: default_discrepancy(),
            alpha_min: default_alpha_min(),
            method: AdjointMethod::Discrete,
            thresholds: None,
            stall_limit: default_stall_limit(),
            step_factor: default_step_factor(),
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.step_size {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("step size must be positive, got {w}")));
            }
        }
        if !(self.noise_level.is_finite() && self.noise_level >= 0.0) {
            return Err(Error::invalid("noise level must be non-negative"));
        }
        if !(self.discrepancy_factor > 1.0 && self.discrepancy_factor.is_finite()) {
            return Err(Error::invalid("discrepancy factor must exceed 1"));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min.is_finite()) {
            return Err(Error::invalid("alpha_min must be positive"));
        }
        if !(self.step_factor > 0.0 && self.step_factor < 2.0) {
            return Err(Error::invalid("step factor must lie in (0, 2)"));
        }
        if self.stall_limit == 0 {
            return Err(Error::invalid("stall limit must be at least 1"));
        }
        if let Some(t) = &self.thresholds {
            t.validate().map_err(Error::InvalidInput)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iteration: usize,
    pub alpha: Vec<f64>,
    pub residual_norm: f64,
    pub misfit: f64,
    pub gradient_norm: f64,
    pub admissible: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct IterateTrace {
    pub step_size: f64,
    pub records: Vec<IterateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    Discrepancy,
    MaxIterations,
    Stalled,
    /// Zero gradient: the current iterate is a fixed point.
    Stationary,
    SolverFailure { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub alpha: Vec<f64>,
    pub best_iteration: usize,
    pub stop: StopReason,
    pub trace: IterateTrace,
}

/// Outcome of [`project_admissible`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub alpha: Vec<f64>,
    /// Factor applied to restore the lower bounds (1 when none was needed).
    pub scale: f64,
    /// Upper-bound inequalities violated after projection.
    pub mu_violations: Vec<String>,
}

// rounding slack so the scaled vector passes the exact check
const SCALE_SLACK: f64 = 4.0 * f64::EPSILON;

/// Clips to `[floor, inf)` and, if a lower inequality
/// `sum alpha_K kappa_K^[a] >= kappa^[a]` fails, scales the whole vector by
/// the smallest factor restoring all of them. Upper inequalities are only
/// reported.
pub fn project_admissible(
    dict: &EnergyDictionary,
    alpha: &[f64],
    thresholds: Option<&AdmissibilityThresholds>,
    floor: f64,
) -> Result<Projection> {
    dict.check_len(alpha, "coefficient vector")?;
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("coefficient vector is not finite"));
    }
    let mut out: Vec<f64> = alpha.iter().map(|v| v.max(floor)).collect();
    let mut scale: f64 = 1.0;
    let mut mu_violations = Vec::new();
    if let Some(th) = thresholds {
        for (a, target) in th.kappa.iter().enumerate() {
            let sum: f64 = dict
                .entries()
                .iter()
                .zip(&out)
                .map(|(e, x)| x * e.bounds().kappa[a])
                .sum();
            if sum < *target {
                scale = scale.max(target / sum * (1.0 + SCALE_SLACK));
            }
        }
        if scale > 1.0 {
            out.iter_mut().for_each(|v| *v *= scale);
        }
        mu_violations = check_admissible(dict, &out, th)?
            .violations
            .into_iter()
            .filter(|v| v.starts_with("mu"))
            .collect();
    }
    Ok(Projection {
        alpha: out,
        scale,
        mu_violations,
    })
}

/// `1/2 ||T(alpha) - u_meas||^2` in `L2(0,T;V)`.
pub fn misfit(setup: &ProblemSetup, alpha: &[f64], u_meas: &SpaceTimeField) -> Result<f64> {
    let u = forward_field(setup, alpha)?;
    let r = u.sub(u_meas)?;
    Ok(0.5 * inner_l2_v(setup.grid(), &r, &r)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisfitGradient {
    pub misfit: f64,
    pub residual_norm: f64,
    pub gradient: Vec<f64>,
}

/// Misfit and its gradient in `alpha` via the chosen adjoint.
pub fn misfit_and_gradient(
    setup: &ProblemSetup,
    alpha: &[f64],
    u_meas: &SpaceTimeField,
    method: AdjointMethod,
) -> Result<MisfitGradient> {
    u_meas.check_grid(setup.grid())?;
    let u = forward_field(setup, alpha)?;
    let r = u.sub(u_meas)?;
    let rn = norm_l2_v(setup.grid(), &r)?;
    let lin = Linearization::new(setup, alpha, &u)?;
    let w = riesz_weight(setup.grid(), &r)?;
    let gradient = apply_adjoint(&lin, &w, method)?;
    Ok(MisfitGradient {
        misfit: 0.5 * rn * rn,
        residual_norm: rn,
        gradient,
    })
}

/// `P(alpha - omega * grad)`, i.e. `P(alpha + omega T'^*(u_meas - T(alpha)))`.
pub fn landweber_step(
    setup: &ProblemSetup,
    alpha: &[f64],
    u_meas: &SpaceTimeField,
    config: &InversionConfig,
    step_size: f64,
) -> Result<Vec<f64>> {
    let mg = misfit_and_gradient(setup, alpha, u_meas, config.method)?;
    let trial: Vec<f64> = alpha
        .iter()
        .zip(&mg.gradient)
        .map(|(a, g)| a - step_size * g)
        .collect();
    Ok(project_admissible(setup.dictionary(), &trial, config.thresholds.as_ref(), config.alpha_min)?.alpha)
}

/// Power-iteration estimate of the largest eigenvalue of
/// `T'(alpha)^* T'(alpha)` in the `L2(0,T;V)` metric.
pub fn estimate_operator_norm(setup: &ProblemSetup, alpha: &[f64], iterations: usize) -> Result<f64> {
    let u = forward_field(setup, alpha)?;
    let lin = Linearization::new(setup, alpha, &u)?;
    let n = alpha.len();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..iterations.max(1) {
        let v = lin.apply(&x)?;
        let y = apply_adjoint(&lin, &riesz_weight(setup.grid(), &v)?, AdjointMethod::Discrete)?;
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ny == 0.0 {
            return Ok(0.0);
        }
        let next = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        x = y.iter().map(|v| v / ny).collect();
        if (next - lambda).abs() <= 1e-12 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    Ok(lambda)
}

/// Projected Landweber from `alpha0`.
pub fn invert(
    setup: &ProblemSetup,
    u_meas: &SpaceTimeField,
    alpha0: &[f64],
    config: &InversionConfig,
) -> Result<InversionResult> {
    run(setup, u_meas, alpha0, config, IterateTrace::default())
}

/// Continues a run from the last recorded iterate of `trace`.
pub fn resume(
    setup: &ProblemSetup,
    u_meas: &SpaceTimeField,
    trace: IterateTrace,
    config: &InversionConfig,
) -> Result<InversionResult> {
    let last = trace
        .records
        .last()
        .ok_or_else(|| Error::invalid("cannot resume from an empty trace"))?;
    let alpha = last.alpha.clone();
    run(setup, u_meas, &alpha, config, trace)
}

fn run(
    setup: &ProblemSetup,
    u_meas: &SpaceTimeField,
    alpha0: &[f64],
    config: &InversionConfig,
    mut trace: IterateTrace,
) -> Result<InversionResult> {
    config.validate()?;
    u_meas.check_grid(setup.grid())?;
    let dict = setup.dictionary();
    let resumed = trace.records.pop();
    let first_iteration = resumed.as_ref().map_or(0, |r| r.iteration);
    let mut alpha = project_admissible(dict, alpha0, config.thresholds.as_ref(), config.alpha_min)?.alpha;
    let step = match (config.step_size, resumed.is_some() && trace.step_size > 0.0) {
        (Some(w), _) => w,
        (None, true) => trace.step_size,
        (None, false) => {
            let l = estimate_operator_norm(setup, &alpha, 50)?;
            if l <= 0.0 {
                return Err(Error::invalid("derivative vanishes at the starting point"));
            }
            config.step_factor / l
        }
    };
    trace.step_size = step;
    let target = config.discrepancy_factor * config.noise_level;
    let mut best: Option<(f64, usize, Vec<f64>)> = trace
        .records
        .iter()
        .map(|r| (r.misfit, r.iteration, r.alpha.clone()))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let mut stalled = 0usize;
    let mut stop = StopReason::MaxIterations;

    for iteration in first_iteration..=config.max_iterations.max(first_iteration) {
        let mg = match misfit_and_gradient(setup, &alpha, u_meas, config.method) {
            Ok(mg) => mg,
            Err(e @ (Error::BlowUp { .. } | Error::Cfl { .. })) => {
                stop = StopReason::SolverFailure { message: e.to_string() };
                break;
            }
            Err(e) => return Err(e),
        };
        let adm = match &config.thresholds {
            Some(th) => check_admissible(dict, &alpha, th)?,
            None => check_admissible(dict, &alpha, &AdmissibilityThresholds::vacuous())?,
        };
        let gradient_norm = mg.gradient.iter().map(|v| v * v).sum::<f64>().sqrt();
        trace.records.push(IterateRecord {
            iteration,
            alpha: alpha.clone(),
            residual_norm: mg.residual_norm,
            misfit: mg.misfit,
            gradient_norm,
            admissible: adm.admissible,
            violations: adm.violations,
        });
        match &best {
            Some((m, _, _)) if mg.misfit >= *m => stalled += 1,
            _ => {
                best = Some((mg.misfit, iteration, alpha.clone()));
                stalled = 0;
            }
        }
        if mg.residual_norm <= target {
            stop = StopReason::Discrepancy;
            break;
        }
        if gradient_norm == 0.0 {
            stop = StopReason::Stationary;
            break;
        }
        if stalled >= config.stall_limit {
            stop = StopReason::Stalled;
            break;
        }
        if iteration >= config.max_iterations {
            break;
        }
        let trial: Vec<f64> = alpha
            .iter()
            .zip(&mg.gradient)
            .map(|(a, g)| a - step * g)
            .collect();
        alpha = project_admissible(dict, &trial, config.thresholds.as_ref(), config.alpha_min)?.alpha;
    }
    let (_, best_iteration, best_alpha) = best.unwrap_or((f64::INFINITY, first_iteration, alpha));
    Ok(InversionResult {
        alpha: best_alpha,
        best_iteration,
        stop,
        trace,
    })
}

/// Adds seeded Gaussian noise scaled to `fraction` of the data's
/// `L2(0,T;V)` norm. Returns the noisy field and the realized noise norm.
pub fn add_noise(setup: &ProblemSetup, clean: &SpaceTimeField, fraction: f64, seed: u64) -> Result<(SpaceTimeField, f64)> {
    if !(fraction.is_finite() && fraction >= 0.0) {
        return Err(Error::invalid("noise fraction must be non-negative"));
    }
    let grid = setup.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = SpaceTimeField::zeros(grid);
    noise
        .values_mut()
        .iter_mut()
        .for_each(|v| *v = StandardNormal.sample(&mut rng));
    let nn = norm_l2_v(grid, &noise)?;
    let target = fraction * norm_l2_v(grid, clean)?;
    let noise = if nn > 0.0 { noise.scaled(target / nn) } else { noise };
    let mut noisy = clean.clone();
    noisy.axpy(1.0, &noise)?;
    Ok((noisy, target))
}

/// `||a - b||_inf / ||b||_inf`.
pub fn relative_error_inf(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let den = b.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    num / den
}
