//! Stored energy dictionary: entries `C_K(x, Y) = phi_K(x) * C_hat_K(Y)`,
//! their conic combination and the admissibility checks on coefficients.

mod bounds;
mod family;
mod weight;

use serde::{Deserialize, Serialize};

pub use bounds::{BoundConstants, BOUND_FLOOR, SAFETY_FACTOR, STRAIN_BALL_RADIUS};
pub use family::EnergyFamily;
pub use weight::SpatialWeight;


use crate::error::{Error, Result};

/// One dictionary entry with its certified bound constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    family: EnergyFamily,
    weight: SpatialWeight,
    bounds: BoundConstants,
}

impl EnergyEntry {
    /// Builds an entry and certifies its bound constants.
    pub fn new(dim: usize, family: EnergyFamily, weight: SpatialWeight) -> Result<Self> {
        check_dim(dim)?;
        family.validate().map_err(Error::InvalidInput)?;
        weight.validate(dim).map_err(Error::InvalidInput)?;
        let bounds = bounds::certify(dim, &family, &weight);
        Ok(EnergyEntry {
            family,
            weight,
            bounds,
        })
    }

    /// Builds an entry with caller-supplied bound constants.
    pub fn with_bounds(
        dim: usize,
        family: EnergyFamily,
        weight: SpatialWeight,
        bounds: BoundConstants,
    ) -> Result<Self> {
        check_dim(dim)?;
        family.validate().map_err(Error::InvalidInput)?;
        weight.validate(dim).map_err(Error::InvalidInput)?;
        bounds.validate().map_err(Error::InvalidInput)?;
        Ok(EnergyEntry {
            family,
            weight,
            bounds,
        })
    }

    pub fn family(&self) -> &EnergyFamily {
        &self.family
    }

    pub fn weight(&self) -> &SpatialWeight {
        &self.weight
    }

    pub fn bounds(&self) -> &BoundConstants {
        &self.bounds
    }

    pub fn eval_energy(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = check_point(x, y)?;
        Ok(self.weight.value(x) * self.family.energy(d, y))
    }

    pub fn eval_stress(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let d = check_point(x, y)?;
        let mut out = vec![0.0; d * d];
        self.family.stress(d, y, &mut out);
        let w = self.weight.value(x);
        out.iter_mut().for_each(|v| *v *= w);
        Ok(out)
    }

    /// Flat `d^2 x d^2` Hessian.
    pub fn eval_hessian(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let d = check_point(x, y)?;
        let mut out = vec![0.0; d * d * d * d];
        self.family.hessian(d, y, &mut out);
        let w = self.weight.value(x);
        out.iter_mut().for_each(|v| *v *= w);
        Ok(out)
    }

    pub fn eval_third(&self, x: &[f64], y: &[f64], h1: &[f64], h2: &[f64]) -> Result<Vec<f64>> {
        let d = check_point(x, y)?;
        for (name, h) in [("h1", h1), ("h2", h2)] {
            if h.len() != d * d {
                return Err(Error::mismatch(format!("direction {name}"), d * d, h.len()));
            }
            if h.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("direction {name} is not finite")));
            }
        }
        let mut out = vec![0.0; d * d];
        self.family.third(d, y, h1, h2, &mut out);
        let w = self.weight.value(x);
        out.iter_mut().for_each(|v| *v *= w);
        Ok(out)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::invalid(format!("spatial dimension must be 1, 2 or 3, got {dim}")));
    }
    Ok(())
}

fn check_point(x: &[f64], y: &[f64]) -> Result<usize> {
    let d = x.len();
    check_dim(d)?;
    if y.len() != d * d {
        return Err(Error::mismatch("strain matrix", d * d, y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("strain matrix Y is not finite"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("position x is not finite"));
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDictionary {
    dim: usize,
    entries: Vec<EnergyEntry>,
}

impl EnergyDictionary {
    pub fn new(dim: usize, entries: Vec<EnergyEntry>) -> Result<Self> {
        check_dim(dim)?;
        if entries.is_empty() {
            return Err(Error::invalid("dictionary needs at least one entry"));
        }
        for (k, e) in entries.iter().enumerate() {
            e.weight
                .validate(dim)
                .map_err(|m| Error::invalid(format!("entry {k}: {m}")))?;
        }
        Ok(EnergyDictionary { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[EnergyEntry] {
        &self.entries
    }

    pub fn entry(&self, k: usize) -> &EnergyEntry {
        &self.entries[k]
    }

    /// True when every entry has a quadratic strain dependence.
    pub fn is_quadratic(&self) -> bool {
        self.entries.iter().all(|e| e.family.is_quadratic())
    }

    pub(crate) fn check_len(&self, alpha: &[f64], what: &str) -> Result<()> {
        if alpha.len() != self.len() {
            return Err(Error::mismatch(what.to_string(), self.len(), alpha.len()));
        }
        Ok(())
    }
}

/// Coefficient vector `alpha` of the conic combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientVector(Vec<f64>);

impl CoefficientVector {
    /// Strictly positive coefficients.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::invalid(format!(
                "coefficient {} must be positive and finite, got {v}",
                k + 1
            )));
        }
        Ok(CoefficientVector(values))
    }

    /// Finite coefficients of any sign (directions, test vectors).
    pub fn relaxed(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficient vector is not finite"));
        }
        Ok(CoefficientVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for CoefficientVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Thresholds `kappa^[1], kappa^[2]` and `mu^[1..7]` defining the
/// admissible coefficient set.
///
/// `kappa[0]` bounds `sum alpha_K kappa_K^[0]` from below and `kappa[1]`
/// bounds `sum alpha_K kappa_K^[1]`; `mu[b-1]` bounds
/// `sum alpha_K mu_K^[b]` from above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityThresholds {
    pub kappa: [f64; 2],
    pub mu: [f64; 7],
}

impl AdmissibilityThresholds {
    pub fn new(kappa: [f64; 2], mu: [f64; 7]) -> Result<Self> {
        let t = AdmissibilityThresholds { kappa, mu };
        t.validate().map_err(Error::InvalidInput)?;
        Ok(t)
    }

    /// Thresholds that every positive coefficient vector satisfies.
    pub fn vacuous() -> Self {
        AdmissibilityThresholds {
            kappa: [f64::MIN_POSITIVE; 2],
            mu: [f64::MAX; 7],
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self
            .kappa
            .iter()
            .chain(self.mu.iter())
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err("admissibility thresholds must be positive and finite".into());
        }
        Ok(())
    }
}

/// `C_alpha = sum_K alpha_K C_K` evaluated pointwise.
#[derive(Debug, Clone)]
pub struct CombinedEnergy<'a> {
    dict: &'a EnergyDictionary,
    alpha: Vec<f64>,
}

pub fn combine<'a>(dict: &'a EnergyDictionary, alpha: &CoefficientVector) -> Result<CombinedEnergy<'a>> {
    dict.check_len(alpha, "coefficient vector")?;
    Ok(CombinedEnergy {
        dict,
        alpha: alpha.as_slice().to_vec(),
    })
}

impl CombinedEnergy<'_> {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    fn accumulate(&self, len: usize, f: impl Fn(&EnergyEntry) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; len];
        for (entry, &a) in self.dict.entries.iter().zip(&self.alpha) {
            let v = f(entry)?;
            acc.iter_mut().zip(&v).for_each(|(s, x)| *s += a * x);
        }
        Ok(acc)
    }

    pub fn energy(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.accumulate(1, |e| e.eval_energy(x, y).map(|v| vec![v]))?[0])
    }

    pub fn stress(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.accumulate(y.len(), |e| e.eval_stress(x, y))
    }

    pub fn hessian(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.accumulate(y.len() * y.len(), |e| e.eval_hessian(x, y))
    }

    pub fn third(&self, x: &[f64], y: &[f64], h1: &[f64], h2: &[f64]) -> Result<Vec<f64>> {
        self.accumulate(y.len(), |e| e.eval_third(x, y, h1, h2))
    }
}

/// `(kappa, mu) = (sum alpha_K kappa_K^[1], sum alpha_K mu_K^[1])`.
pub fn kappa_mu(dict: &EnergyDictionary, alpha: &[f64]) -> Result<(f64, f64)> {
    dict.check_len(alpha, "coefficient vector")?;
    let kappa = dict
        .entries
        .iter()
        .zip(alpha)
        .map(|(e, a)| a * e.bounds.kappa[1])
        .sum();
    let mu = dict
        .entries
        .iter()
        .zip(alpha)
        .map(|(e, a)| a * e.bounds.mu[1])
        .sum();
    Ok((kappa, mu))
}

/// `7/8 mu < kappa < 9/8 mu`.
pub fn check_dim_condition(dict: &EnergyDictionary, alpha: &[f64]) -> Result<bool> {
    let (kappa, mu) = kappa_mu(dict, alpha)?;
    Ok(0.875 * mu < kappa && kappa < 1.125 * mu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Names of failed inequalities: `positivity(K)`, `kappa[a]`, `mu[b]`
    /// (all 1-based).
    pub violations: Vec<String>,
}

pub fn check_admissible(
    dict: &EnergyDictionary,
    alpha: &[f64],
    thresholds: &AdmissibilityThresholds,
) -> Result<Admissibility> {
    dict.check_len(alpha, "coefficient vector")?;
    let mut violations = Vec::new();
    for (k, a) in alpha.iter().enumerate() {
        if !(*a > 0.0) {
            violations.push(format!("positivity({})", k + 1));
        }
    }
    for (a, target) in thresholds.kappa.iter().enumerate() {
        let sum: f64 = dict
            .entries
            .iter()
            .zip(alpha)
            .map(|(e, x)| x * e.bounds.kappa[a])
            .sum();
        if sum < *target {
            violations.push(format!("kappa[{}]", a + 1));
        }
    }
    for (b, target) in thresholds.mu.iter().enumerate() {
        let sum: f64 = dict
            .entries
            .iter()
            .zip(alpha)
            .map(|(e, x)| x * e.bounds.mu[b + 1])
            .sum();
        if sum > *target {
            violations.push(format!("mu[{}]", b + 1));
        }
    }
    Ok(Admissibility {
        admissible: violations.is_empty(),
        violations,
    })
}

/// Default embedding constant used when none is supplied.
pub const DEFAULT_EMBEDDING_CONSTANT: f64 = 1.0;
/// Default `epsilon` in `(0, 1)` paired with the dimension condition.
pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub c_bar: f64,
    pub c_hat: f64,
    pub zeta: f64,
    pub eta: f64,
}

/// `C_bar(alpha)`, `C_hat(alpha)` and the alpha-independent envelope
/// `zeta <= C_bar(alpha) <= eta`.
///
/// `C_hat` depends on an embedding constant `k_hat` and on `epsilon`,
/// neither of which can be computed here; they are caller inputs.
pub fn stability_constants(
    dict: &EnergyDictionary,
    alpha: &[f64],
    k_hat: f64,
    epsilon: f64,
) -> Result<StabilityConstants> {
    if !check_dim_condition(dict, alpha)? {
        return Err(Error::invalid(
            "dimension condition 7/8 mu < kappa < 9/8 mu does not hold",
        ));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(k_hat.is_finite() && k_hat > 0.0) {
        return Err(Error::invalid(format!("embedding constant must be positive, got {k_hat}")));
    }
    let (kappa, mu) = kappa_mu(dict, alpha)?;
    let mu2: f64 = dict
        .entries
        .iter()
        .zip(alpha)
        .map(|(e, a)| a * e.bounds.mu[2])
        .sum();
    let c_bar = mu2 / kappa;
    let c_hat = k_hat / (1.0 - (1.0 - epsilon).sqrt()) * mu / (kappa * kappa);
    let mu2s = dict.entries.iter().map(|e| e.bounds.mu[2]);
    let k1s = dict.entries.iter().map(|e| e.bounds.kappa[1]);
    let zeta = mu2s.clone().fold(f64::INFINITY, f64::min) / k1s.clone().fold(0.0, f64::max);
    let eta = mu2s.fold(0.0, f64::max) / k1s.fold(f64::INFINITY, f64::min);
    Ok(StabilityConstants {
        c_bar,
        c_hat,
        zeta,
        eta,
    })
}
