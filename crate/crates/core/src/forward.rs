//! Forward operator: explicit central-difference (leapfrog) integration of
//! `rho u_tt - div grad_Y C_alpha(x, Ju) = f` with homogeneous Dirichlet
//! boundary values.

use std::sync::Arc;
use std::time::Instant;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::dictionary::{kappa_mu, CoefficientVector, EnergyDictionary};
use crate::error::{Error, Result};
use crate::grid::{Grid, MaterialField, SpaceTimeField};
use crate::operator::GridEnergy;

/// Default CFL safety factor.
pub const CFL_SAFETY: f64 = 0.5;

/// Everything defining one initial-boundary value problem.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    grid: Grid,
    material: MaterialField,
    force: Arc<SpaceTimeField>,
    u0: Arc<Array2<f64>>,
    u1: Arc<Array2<f64>>,
    dict: Arc<EnergyDictionary>,
    alpha: CoefficientVector,
    energy: Arc<GridEnergy>,
    cfl_safety: f64,
}

impl ProblemSetup {
    /// Setup with zero forcing and zero initial data.
    pub fn new(
        grid: Grid,
        material: MaterialField,
        dict: impl Into<Arc<EnergyDictionary>>,
        alpha: CoefficientVector,
    ) -> Result<Self> {
        let dict = dict.into();
        if dict.dim() != grid.dim() {
            return Err(Error::mismatch("dictionary dimension", grid.dim(), dict.dim()));
        }
        dict.check_len(&alpha, "coefficient vector")?;
        if material.rho().len() != grid.nodes() {
            return Err(Error::mismatch("density field", grid.nodes(), material.rho().len()));
        }
        let energy = Arc::new(GridEnergy::new(&dict, &grid));
        let zero = Arc::new(Array2::zeros((grid.nodes(), grid.dim())));
        Ok(ProblemSetup {
            force: Arc::new(SpaceTimeField::zeros(&grid)),
            u0: zero.clone(),
            u1: zero,
            grid,
            material,
            dict,
            alpha,
            energy,
            cfl_safety: CFL_SAFETY,
        })
    }

    pub fn with_force(mut self, force: SpaceTimeField) -> Result<Self> {
        force.check_grid(&self.grid)?;
        if !force.is_finite() {
            return Err(Error::invalid("force field is not finite"));
        }
        self.force = Arc::new(force);
        Ok(self)
    }

    /// Initial displacement and velocity on the interior nodes; boundary
    /// values are zero by construction.
    pub fn with_initial(mut self, u0: Array2<f64>, u1: Array2<f64>) -> Result<Self> {
        self.grid.check_nodes(u0.view(), "initial displacement")?;
        self.grid.check_nodes(u1.view(), "initial velocity")?;
        if u0.iter().chain(u1.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial data is not finite"));
        }
        self.u0 = Arc::new(u0.as_standard_layout().into_owned());
        self.u1 = Arc::new(u1.as_standard_layout().into_owned());
        Ok(self)
    }

    pub fn with_alpha(&self, alpha: CoefficientVector) -> Result<Self> {
        self.dict.check_len(&alpha, "coefficient vector")?;
        let mut s = self.clone();
        s.alpha = alpha;
        Ok(s)
    }

    pub fn with_cfl_safety(mut self, safety: f64) -> Result<Self> {
        if !(safety.is_finite() && safety > 0.0) {
            return Err(Error::invalid(format!("CFL safety must be positive, got {safety}")));
        }
        self.cfl_safety = safety;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn material(&self) -> &MaterialField {
        &self.material
    }

    pub fn force(&self) -> &SpaceTimeField {
        &self.force
    }

    pub fn u0(&self) -> &Array2<f64> {
        &self.u0
    }

    pub fn u1(&self) -> &Array2<f64> {
        &self.u1
    }

    pub fn dictionary(&self) -> &EnergyDictionary {
        &self.dict
    }

    pub fn dictionary_arc(&self) -> Arc<EnergyDictionary> {
        self.dict.clone()
    }

    pub fn alpha(&self) -> &CoefficientVector {
        &self.alpha
    }

    pub fn energy(&self) -> &GridEnergy {
        &self.energy
    }

    pub fn cfl_safety(&self) -> f64 {
        self.cfl_safety
    }

    /// `dt * sqrt(mu / rho_min) / dx` with `mu = sum alpha_K mu_K^[1]`.
    pub fn cfl_number(&self, alpha: &[f64]) -> Result<f64> {
        let (_, mu) = kappa_mu(&self.dict, alpha)?;
        Ok(self.grid.dt() * (mu.max(0.0) / self.material.min()).sqrt() / self.grid.dx())
    }

    /// Largest admissible time step for `alpha`.
    pub fn max_time_step(&self, alpha: &[f64]) -> Result<f64> {
        let (_, mu) = kappa_mu(&self.dict, alpha)?;
        Ok(self.cfl_safety * self.grid.dx() * (self.material.min() / mu.max(f64::MIN_POSITIVE)).sqrt())
    }

    pub fn check_cfl(&self, alpha: &[f64]) -> Result<f64> {
        let cfl = self.cfl_number(alpha)?;
        if cfl > self.cfl_safety * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt: self.grid.dt(),
                limit: self.max_time_step(alpha)?,
                cfl,
                safety: self.cfl_safety,
            });
        }
        Ok(cfl)
    }

    pub(crate) fn inv_rho_components(&self) -> Vec<f64> {
        let d = self.grid.dim();
        self.material
            .rho()
            .iter()
            .flat_map(|r| std::iter::repeat_n(1.0 / r, d))
            .collect()
    }
}

/// Per-solve diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub kinetic: Vec<f64>,
    pub strain: Vec<f64>,
    pub cfl: f64,
    /// Measured surrogates for the solution-class bounds `M0..M3`:
    /// `M0 = sup_t max |d_l d_j u|_{L2}`, `M1 = sup |d_l u_t|`,
    /// `M2 = sup |d_l d_j u_t|`, `M3 = sup |d_l d_j u|`.
    pub regularity: [f64; 4],
    pub wall_time_s: f64,
}

/// Shared leapfrog driver. `force(k, state, out)` writes the total force
/// (before division by `rho`) at level `k`.
pub(crate) fn integrate(
    grid: &Grid,
    inv_rho: &[f64],
    start: &[f64],
    start_velocity: &[f64],
    mut force: impl FnMut(usize, &[f64], &mut [f64]),
) -> Result<Array3<f64>> {
    let m = grid.steps();
    let per = grid.nodes() * grid.dim();
    let dt = grid.dt();
    let dt2 = dt * dt;
    let mut vals = vec![0.0; (m + 1) * per];
    let mut f = vec![0.0; per];
    vals[..per].copy_from_slice(start);
    force(0, start, &mut f);
    {
        let (u0, rest) = vals.split_at_mut(per);
        for i in 0..per {
            rest[i] = u0[i] + dt * start_velocity[i] + 0.5 * dt2 * inv_rho[i] * f[i];
        }
        if rest[..per].iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { step: 1 });
        }
    }
    for k in 1..m {
        let (done, next) = vals.split_at_mut((k + 1) * per);
        let prev = &done[(k - 1) * per..k * per];
        let cur = &done[k * per..];
        force(k, cur, &mut f);
        let next = &mut next[..per];
        for i in 0..per {
            next[i] = 2.0 * cur[i] - prev[i] + dt2 * inv_rho[i] * f[i];
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { step: k + 1 });
        }
    }
    Ok(Array3::from_shape_vec((m + 1, grid.nodes(), grid.dim()), vals).expect("shape"))
}

/// Solves the forward problem at the setup's own coefficients.
pub fn solve_forward(setup: &ProblemSetup) -> Result<(SpaceTimeField, SolveReport)> {
    solve_forward_at(setup, setup.alpha())
}

/// Solves the forward problem at `alpha` (any finite vector of the right
/// length; positivity is not required here).
pub fn solve_forward_at(setup: &ProblemSetup, alpha: &[f64]) -> Result<(SpaceTimeField, SolveReport)> {
    let started = Instant::now();
    let u = forward_field(setup, alpha)?;
    let mut report = diagnostics(setup, alpha, &u)?;
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok((u, report))
}

/// The displacement field only, without diagnostics.
pub fn forward_field(setup: &ProblemSetup, alpha: &[f64]) -> Result<SpaceTimeField> {
    setup.dictionary().check_len(alpha, "coefficient vector")?;
    setup.check_cfl(alpha)?;
    let grid = setup.grid();
    let dd = grid.dim() * grid.dim();
    let mut jac = vec![0.0; grid.cells() * dd];
    let mut stress = vec![0.0; grid.cells() * dd];
    let inv_rho = setup.inv_rho_components();
    let energy = setup.energy();
    let force = setup.force();
    let values = integrate(
        grid,
        &inv_rho,
        setup.u0().as_slice().expect("standard layout"),
        setup.u1().as_slice().expect("standard layout"),
        |k, state, out| {
            grid.jacobian_into(state, &mut jac);
            energy.stress_field(alpha, &jac, &mut stress);
            out.copy_from_slice(force.step_slice(k));
            grid.divergence_add(&stress, out, 1.0);
        },
    )?;
    SpaceTimeField::from_values(grid, values)
}

fn diagnostics(setup: &ProblemSetup, alpha: &[f64], u: &SpaceTimeField) -> Result<SolveReport> {
    let grid = setup.grid();
    let (kinetic, strain) = energy_parts(setup, alpha, u)?;
    let dt = grid.dt();
    let dd = grid.dim() * grid.dim();
    let mut jac = vec![0.0; grid.cells() * dd];
    let mut reg = [0.0_f64; 4];
    for k in 0..=grid.steps() {
        let (sup_u, l2_u) = second_difference_stats(grid, u.step_slice(k));
        let vel = u.velocity(k, dt);
        let vel = vel.as_slice().expect("fresh array");
        let (sup_v, _) = second_difference_stats(grid, vel);
        grid.jacobian_into(vel, &mut jac);
        let sup_jv = jac.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        reg[0] = reg[0].max(l2_u);
        reg[1] = reg[1].max(sup_jv);
        reg[2] = reg[2].max(sup_v);
        reg[3] = reg[3].max(sup_u);
    }
    Ok(SolveReport {
        kinetic,
        strain,
        cfl: setup.cfl_number(alpha)?,
        regularity: reg,
        wall_time_s: 0.0,
    })
}

/// `(sup, max L2)` over all second differences `d_l d_j u_i` of one slice.
fn second_difference_stats(grid: &Grid, u: &[f64]) -> (f64, f64) {
    let d = grid.dim();
    let n = grid.n() as isize;
    let dx2 = grid.dx() * grid.dx();
    let value = |idx: &[isize; 3], comp: usize| -> f64 {
        if idx[..d].iter().any(|&i| i < 0 || i >= n) {
            return 0.0;
        }
        let node = idx[..d].iter().rev().fold(0isize, |acc, &i| acc * n + i) as usize;
        u[node * d + comp]
    };
    let mut sup: f64 = 0.0;
    let mut l2max: f64 = 0.0;
    for comp in 0..d {
        for l in 0..d {
            for j in l..d {
                let mut sq = 0.0;
                for node in 0..grid.nodes() {
                    let mi = grid.node_multi_index(node);
                    let base = [mi[0] as isize, mi[1] as isize, mi[2] as isize];
                    let shift = |dl: isize, dj: isize| {
                        let mut p = base;
                        p[l] += dl;
                        p[j] += dj;
                        p
                    };
                    let val = if l == j {
                        (value(&shift(1, 0), comp) - 2.0 * value(&base, comp) + value(&shift(-1, 0), comp))
                            / dx2
                    } else {
                        (value(&shift(1, 1), comp) - value(&shift(1, -1), comp) - value(&shift(-1, 1), comp)
                            + value(&shift(-1, -1), comp))
                            / (4.0 * dx2)
                    };
                    sup = sup.max(val.abs());
                    sq += val * val;
                }
                l2max = l2max.max((sq * grid.volume()).sqrt());
            }
        }
    }
    (sup, l2max)
}

/// Kinetic and stored energy per time level.
fn energy_parts(setup: &ProblemSetup, alpha: &[f64], u: &SpaceTimeField) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = setup.grid();
    u.check_grid(grid)?;
    let d = grid.dim();
    let vol = grid.volume();
    let rho = setup.material().rho();
    let mut jac = vec![0.0; grid.cells() * d * d];
    let mut kinetic = Vec::with_capacity(grid.steps() + 1);
    let mut strain = Vec::with_capacity(grid.steps() + 1);
    let m = grid.steps();
    for k in 0..=m {
        let vel = match k {
            0 => setup.u1().clone(),
            k if k == m => final_velocity(setup, alpha, u, &mut jac),
            k => u.velocity(k, grid.dt()),
        };
        let ke: f64 = vel
            .outer_iter()
            .zip(rho)
            .map(|(v, r)| r * v.iter().map(|x| x * x).sum::<f64>())
            .sum();
        kinetic.push(0.5 * vol * ke);
        grid.jacobian_into(u.step_slice(k), &mut jac);
        strain.push(vol * setup.energy().energy_sum(alpha, &jac));
    }
    Ok((kinetic, strain))
}

/// `(u^m - u^{m-1}) / dt + dt/2 * u_tt^m` with `u_tt^m` from the equation,
/// the start-up step run backwards.
fn final_velocity(setup: &ProblemSetup, alpha: &[f64], u: &SpaceTimeField, jac: &mut [f64]) -> Array2<f64> {
    let grid = setup.grid();
    let (m, dt) = (grid.steps(), grid.dt());
    let mut stress = vec![0.0; jac.len()];
    grid.jacobian_into(u.step_slice(m), jac);
    setup.energy().stress_field(alpha, jac, &mut stress);
    let mut acc = setup.force().step_slice(m).to_vec();
    grid.divergence_add(&stress, &mut acc, 1.0);
    let mut vel = (&u.step(m) - &u.step(m - 1)) / dt;
    for ((v, a), ir) in vel.iter_mut().zip(&acc).zip(setup.inv_rho_components().iter()) {
        *v += 0.5 * dt * a * ir;
    }
    vel
}

/// `E^k = 1/2 sum rho |u_t^k|^2 + sum C_alpha(x, Ju^k)` at the setup's
/// coefficients.
pub fn energy_budget(u: &SpaceTimeField, setup: &ProblemSetup) -> Result<Vec<f64>> {
    energy_budget_at(u, setup, setup.alpha())
}

pub fn energy_budget_at(u: &SpaceTimeField, setup: &ProblemSetup, alpha: &[f64]) -> Result<Vec<f64>> {
    let (k, s) = energy_parts(setup, alpha, u)?;
    Ok(k.iter().zip(&s).map(|(a, b)| a + b).collect())
}

/// Defect of the discrete scheme at the setup's coefficients.
pub fn residual(u: &SpaceTimeField, setup: &ProblemSetup) -> Result<SpaceTimeField> {
    residual_at(u, setup, setup.alpha())
}

/// Per level `k`: `rho D_tt u^k - div grad_Y C_alpha(Ju^k) - f^k`, with
/// `D_tt` the central second difference for `0 < k < m`, the start-up
/// difference `2 (u^1 - u^0 - dt u_1) / dt^2` at `k = 0` and the backward
/// difference at `k = m`. A solution returned by [`solve_forward`] has a
/// round-off residual on levels `0..m`.
pub fn residual_at(u: &SpaceTimeField, setup: &ProblemSetup, alpha: &[f64]) -> Result<SpaceTimeField> {
    let grid = setup.grid();
    u.check_grid(grid)?;
    setup.dictionary().check_len(alpha, "coefficient vector")?;
    let m = grid.steps();
    let dt2 = grid.dt() * grid.dt();
    let d = grid.dim();
    let per = grid.nodes() * d;
    let rho: Vec<f64> = setup
        .material()
        .rho()
        .iter()
        .flat_map(|r| std::iter::repeat_n(*r, d))
        .collect();
    let u1 = setup.u1().as_slice().expect("standard layout");
    let mut jac = vec![0.0; grid.cells() * d * d];
    let mut stress = vec![0.0; grid.cells() * d * d];
    let mut div = vec![0.0; per];
    let mut out = SpaceTimeField::zeros(grid);
    for k in 0..=m {
        let uk = u.step_slice(k);
        grid.jacobian_into(uk, &mut jac);
        setup.energy().stress_field(alpha, &jac, &mut stress);
        grid.divergence_into(&stress, &mut div);
        let f = setup.force().step_slice(k);
        let mut acc = vec![0.0; per];
        for i in 0..per {
            let utt = if k == 0 {
                2.0 * (u.step_slice(1)[i] - uk[i] - grid.dt() * u1[i]) / dt2
            } else if k == m {
                (uk[i] - 2.0 * u.step_slice(m - 1)[i] + u.step_slice(m - 2)[i]) / dt2
            } else {
                (u.step_slice(k + 1)[i] - 2.0 * uk[i] + u.step_slice(k - 1)[i]) / dt2
            };
            acc[i] = rho[i] * utt - div[i] - f[i];
        }
        out.step_mut(k)
            .as_slice_mut()
            .expect("standard layout")
            .copy_from_slice(&acc);
    }
    Ok(out)
}
