//! Executable checks of the analytical properties of `T`: Taylor order of
//! the derivative, the adjoint pairing, Lipschitz stability in `alpha` and
//! the constant-coefficient Gronwall envelope.
//!
//! Every check returns its full table so callers can gate on it or write
//! it out with [`crate::io::write_table`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adjoint::{apply_adjoint, apply_adjoint_discrete, AdjointMethod};
use crate::dictionary::{check_dim_condition, kappa_mu, stability_constants, DEFAULT_EMBEDDING_CONSTANT, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::forward::{forward_field, solve_forward_at, ProblemSetup};
use crate::grid::{Grid, MaterialField, SpaceTimeField};
use crate::sensitivity::{norm_l2_v, Linearization};

/// Default step sizes of the Taylor test.
pub const DEFAULT_TAYLOR_STEPS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
/// Default perturbation sizes of the Lipschitz test.
pub const DEFAULT_LIPSCHITZ_STEPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// A named CSV-shaped table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip representation; empty for `None`.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Least-squares slope of `y` against `x`. `None` with fewer than two
/// points or no spread in `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = x[..n].iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Slope in log-log of the positive finite pairs.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    least_squares_slope(&lx, &ly)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorRow {
    pub s: f64,
    pub remainder: Option<f64>,
    /// Remainder over `||T(alpha)||`.
    pub relative: Option<f64>,
    /// Remainder over `s`; tends to zero for a Frechet derivative.
    pub over_s: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    pub reference_norm: f64,
    pub slope: Option<f64>,
    pub rows: Vec<TaylorRow>,
}

impl TaylorReport {
    pub fn max_relative(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.relative)
            .try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("taylor", &["s", "remainder", "relative", "remainder_over_s", "failure"]);
        for r in &self.rows {
            t.push(vec![
                cell(Some(r.s)),
                cell(r.remainder),
                cell(r.relative),
                cell(r.over_s),
                r.failure.clone().unwrap_or_default(),
            ]);
        }
        t
    }
}

/// `r(s) = ||T(alpha + s h) - T(alpha) - s T'(alpha) h||` in `L2(0,T;V)`
/// for each `s`, and the least-squares slope of `log r` against `log s`.
/// Failed perturbed solves are kept as marked rows.
pub fn taylor_order_test(setup: &ProblemSetup, alpha: &[f64], h: &[f64], steps: &[f64]) -> Result<TaylorReport> {
    setup.dictionary().check_len(h, "direction")?;
    if steps.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("Taylor steps must be positive"));
    }
    let grid = setup.grid();
    let u = forward_field(setup, alpha)?;
    let lin = Linearization::new(setup, alpha, &u)?;
    let v = lin.apply(h)?;
    let reference_norm = norm_l2_v(grid, &u)?;
    let rows: Vec<TaylorRow> = steps
        .iter()
        .map(|&s| {
            let shifted: Vec<f64> = alpha.iter().zip(h).map(|(a, b)| a + s * b).collect();
            let outcome = if shifted.iter().any(|x| !(*x > 0.0)) {
                Err(Error::invalid("perturbed coefficients leave the positive cone"))
            } else {
                forward_field(setup, &shifted).and_then(|us| {
                    let mut r = us.sub(&u)?;
                    r.axpy(-s, &v)?;
                    norm_l2_v(grid, &r)
                })
            };
            match outcome {
                Ok(r) => TaylorRow {
                    s,
                    remainder: Some(r),
                    relative: Some(r / reference_norm),
                    over_s: Some(r / s),
                    failure: None,
                },
                Err(e) => TaylorRow {
                    s,
                    remainder: None,
                    relative: None,
                    over_s: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let (ss, rs): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| r.remainder.map(|x| (r.s, x))).unzip();
    Ok(TaylorReport {
        reference_norm,
        slope: log_log_slope(&ss, &rs),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointCertificate {
    pub method: AdjointMethod,
    pub max_mismatch: f64,
    pub mismatches: Vec<f64>,
}

impl AdjointCertificate {
    pub fn table(&self) -> Table {
        let mut t = Table::new("adjoint", &["trial", "mismatch"]);
        for (i, m) in self.mismatches.iter().enumerate() {
            t.push(vec![i.to_string(), cell(Some(*m))]);
        }
        t
    }
}

/// `max |<T'h, w> - <h, g>| / (||T'h|| ||w|| + ||h|| ||g||)` over seeded
/// random pairs `(h, w)`, `h` uniform in `[-1, 1]^N`, `w` uniform in
/// `[-1, 1]` per node and step.
pub fn adjoint_certificate(
    setup: &ProblemSetup,
    alpha: &[f64],
    trials: usize,
    seed: u64,
    method: AdjointMethod,
) -> Result<AdjointCertificate> {
    let grid = setup.grid();
    let u = forward_field(setup, alpha)?;
    let lin = Linearization::new(setup, alpha, &u)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::with_capacity(trials);
    for _ in 0..trials {
        let h: Vec<f64> = (0..alpha.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = SpaceTimeField::from_fn(grid, |_, _, o| o.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)));
        mismatches.push(pairing_mismatch(&lin, &h, &w, method)?);
    }
    Ok(AdjointCertificate {
        method,
        max_mismatch: mismatches.iter().copied().fold(0.0, f64::max),
        mismatches,
    })
}

/// `|<T'h, w> - <h, g>| / (||T'h|| ||w|| + ||h|| ||g||)`, zero when the
/// denominator vanishes.
pub fn pairing_mismatch(lin: &Linearization, h: &[f64], w: &SpaceTimeField, method: AdjointMethod) -> Result<f64> {
    let grid = lin.grid();
    let v = lin.apply(h)?;
    let g = apply_adjoint(lin, w, method)?;
    let lhs = grid.inner_space_time(&v, w)?;
    let rhs: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
    let nv = grid.inner_space_time(&v, &v)?.sqrt();
    let nw = grid.inner_space_time(w, w)?.sqrt();
    let nh = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ng = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let den = nv * nw + nh * ng;
    Ok(if den == 0.0 { 0.0 } else { (lhs - rhs).abs() / den })
}

/// Smooth, grid-independent weight used to compare the two adjoints.
pub fn consistency_weight(grid: &Grid) -> SpaceTimeField {
    use std::f64::consts::PI;
    SpaceTimeField::from_fn(grid, |t, x, o| {
        let s: f64 = x.iter().map(|v| (PI * v).sin()).product();
        o.iter_mut()
            .enumerate()
            .for_each(|(c, v)| *v = (1.0 + t) * s * (1.0 - 0.25 * c as f64));
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    /// Decay rate `-d log(difference) / d log(n)`.
    pub slope: Option<f64>,
    /// Strictly decreasing in `n`.
    pub monotone: bool,
}

impl ConsistencyReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new("adjoint_consistency", &["n", "relative_difference"]);
        for r in &self.rows {
            t.push(vec![r.n.to_string(), cell(Some(r.difference))]);
        }
        t
    }
}

/// `||g_cont - g_disc|| / ||g_disc||` on each setup under
/// [`consistency_weight`], with the observed decay rate in `n`.
pub fn adjoint_consistency(setups: &[ProblemSetup]) -> Result<ConsistencyReport> {
    let mut rows = Vec::with_capacity(setups.len());
    for setup in setups {
        let alpha = setup.alpha().as_slice();
        let u = forward_field(setup, alpha)?;
        let lin = Linearization::new(setup, alpha, &u)?;
        let w = consistency_weight(setup.grid());
        let gd = apply_adjoint_discrete(&lin, &w)?;
        let gc = apply_adjoint(&lin, &w, AdjointMethod::Continuous)?;
        let num = gd.iter().zip(&gc).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den = gd.iter().map(|a| a * a).sum::<f64>().sqrt();
        rows.push(ConsistencyRow {
            n: setup.grid().n(),
            difference: num / den,
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ds: Vec<f64> = rows.iter().map(|r| r.difference).collect();
    let slope = if ds.iter().all(|d| *d > 0.0) {
        log_log_slope(&ns, &ds).map(|s| -s)
    } else {
        None
    };
    let monotone = ds.windows(2).all(|w| w[1] < w[0]);
    Ok(ConsistencyReport { rows, slope, monotone })
}

/// Per-step `rho ||u_t||^2 + kappa ||Ju||^2`; node and cell sums times the
/// cell volume.
pub fn energy_norm(grid: &Grid, field: &SpaceTimeField, material: &MaterialField, kappa: f64) -> Result<Vec<f64>> {
    field.check_grid(grid)?;
    if material.rho().len() != grid.nodes() {
        return Err(Error::mismatch("density nodes", grid.nodes(), material.rho().len()));
    }
    let d = grid.dim();
    let vol = grid.volume();
    let mut jac = vec![0.0; grid.cells() * d * d];
    Ok((0..=grid.steps())
        .map(|k| {
            let vel = field.velocity(k, grid.dt());
            let kinetic: f64 = vel
                .rows()
                .into_iter()
                .zip(material.rho())
                .map(|(r, rho)| rho * r.iter().map(|v| v * v).sum::<f64>())
                .sum();
            grid.jacobian_into(field.step_slice(k), &mut jac);
            let strain: f64 = jac.iter().map(|v| v * v).sum();
            vol * (kinetic + kappa * strain)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRow {
    pub direction: usize,
    pub eps: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub rows: Vec<LipschitzRow>,
    /// Largest max/min ratio over `eps` for a single direction.
    pub spread: f64,
}

impl LipschitzReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new("lipschitz", &["direction", "eps", "ratio"]);
        for r in &self.rows {
            t.push(vec![r.direction.to_string(), cell(Some(r.eps)), cell(Some(r.ratio))]);
        }
        t
    }
}

/// For `alpha_bar = alpha + eps d / ||d||_inf`, the ratio
/// `sup_t [rho ||u_t - ubar_t||^2 + kappa(alpha) ||Ju - Jubar||^2]^(1/2) / eps`.
/// Both coefficient vectors must satisfy the dimension condition.
pub fn lipschitz_alpha_test(
    setup: &ProblemSetup,
    alpha: &[f64],
    directions: &[Vec<f64>],
    eps: &[f64],
) -> Result<LipschitzReport> {
    let dict = setup.dictionary();
    if !check_dim_condition(dict, alpha)? {
        return Err(Error::invalid("base coefficients violate the dimension condition"));
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::invalid("perturbation sizes must be positive"));
    }
    let (kappa, _) = kappa_mu(dict, alpha)?;
    let u = forward_field(setup, alpha)?;
    let mut rows = Vec::new();
    let mut spread: f64 = 1.0;
    for (i, d) in directions.iter().enumerate() {
        dict.check_len(d, "direction")?;
        let dn = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if dn == 0.0 {
            return Err(Error::invalid("zero perturbation direction"));
        }
        let mut ratios = Vec::with_capacity(eps.len());
        for &e in eps {
            let bar: Vec<f64> = alpha.iter().zip(d).map(|(a, b)| a + e * b / dn).collect();
            if !check_dim_condition(dict, &bar)? || bar.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::invalid(format!("perturbed coefficients {bar:?} are not admissible")));
            }
            let ub = forward_field(setup, &bar)?;
            let diff = u.sub(&ub)?;
            let en = energy_norm(setup.grid(), &diff, setup.material(), kappa)?;
            let sup = en.iter().fold(0.0_f64, |m, v| m.max(*v));
            let actual = alpha.iter().zip(&bar).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            let ratio = sup.sqrt() / actual;
            ratios.push(ratio);
            rows.push(LipschitzRow {
                direction: i,
                eps: e,
                ratio,
            });
        }
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        spread = spread.max(hi / lo);
    }
    Ok(LipschitzReport { rows, spread })
}

/// `[exp(b tau / 2) a^(1/2) + k / b (exp(b tau / 2) - 1)]^2` on each `tau`;
/// the `b -> 0` limit `(a^(1/2) + k tau / 2)^2` when `b = 0`.
pub fn gronwall_envelope(a: f64, b: f64, k: f64, taus: &[f64]) -> Result<Vec<f64>> {
    for (name, v) in [("a", a), ("b", b), ("k", k)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(format!("{name} must be non-negative, got {v}")));
        }
    }
    if taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("tau must be non-negative"));
    }
    Ok(taus
        .iter()
        .map(|&t| {
            let inner = if b == 0.0 {
                a.sqrt() + 0.5 * k * t
            } else {
                let half = 0.5 * b * t;
                half.exp() * a.sqrt() + k / b * half.exp_m1()
            };
            inner * inner
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallConsistency {
    pub b: f64,
    pub k: f64,
    pub tau: Vec<f64>,
    pub psi: Vec<f64>,
    pub envelope: Vec<f64>,
    /// `max psi / envelope` over `tau > 0`.
    pub max_ratio: f64,
}

impl GronwallConsistency {
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("gronwall", &["tau", "psi", "envelope"]);
        for i in 0..self.tau.len() {
            t.push(vec![
                cell(Some(self.tau[i])),
                cell(Some(self.psi[i])),
                cell(Some(self.envelope[i])),
            ]);
        }
        t
    }
}

/// Measured `psi(tau) = rho ||v_t||^2 + kappa ||Jv||^2` of the sensitivity
/// `v = T'(alpha) h` against the envelope with `a = 0` and the constants
/// of the continuity estimate instantiated from measured solution bounds:
/// `b = d^6 / 8 eta mu / kappa M1`, `k = 2 d ||h||_inf S1`,
/// `S1 = rho_min^(-1/2) sum_K (sqrt(d) mu_K^[4] + d^2 M0 mu_K^[1])`.
pub fn gronwall_consistency(setup: &ProblemSetup, alpha: &[f64], h: &[f64]) -> Result<GronwallConsistency> {
    let dict = setup.dictionary();
    dict.check_len(h, "direction")?;
    let grid = setup.grid();
    let d = grid.dim() as f64;
    let (kappa, mu) = kappa_mu(dict, alpha)?;
    let eta = stability_constants(dict, alpha, DEFAULT_EMBEDDING_CONSTANT, DEFAULT_EPSILON)?.eta;
    let (u, report) = solve_forward_at(setup, alpha)?;
    let [m0, m1, _, _] = report.regularity;
    let lin = Linearization::new(setup, alpha, &u)?;
    let v = lin.apply(h)?;
    let psi = energy_norm(grid, &v, setup.material(), kappa)?;
    let b = d.powi(6) / 8.0 * eta * mu / kappa * m1;
    let s1: f64 = dict
        .entries()
        .iter()
        .map(|e| d.sqrt() * e.bounds().mu[4] + d * d * m0 * e.bounds().mu[1])
        .sum::<f64>()
        / setup.material().min().sqrt();
    let hn = h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let k = 2.0 * d * hn * s1;
    let tau: Vec<f64> = (0..=grid.steps()).map(|i| grid.time(i)).collect();
    let envelope = gronwall_envelope(0.0, b, k, &tau)?;
    let max_ratio = psi
        .iter()
        .zip(&envelope)
        .skip(1)
        .map(|(p, e)| p / e)
        .fold(0.0, f64::max);
    Ok(GronwallConsistency {
        b,
        k,
        tau,
        psi,
        envelope,
        max_ratio,
    })
}

#[cfg(test)]
mod tests;
