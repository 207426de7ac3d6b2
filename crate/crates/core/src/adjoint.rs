//! `T'(alpha)^* w` two ways.
//!
//! The discrete variant runs the exact transpose of the linearized leapfrog
//! recurrence, so `<T'(alpha) h, w> = <h, g>` holds to round-off in the
//! space-time pairing (trapezoid in time, `dx^d` in space).
//!
//! The continuous variant integrates the backward problem
//! `rho p_tt - div(A : Jp) = w`, `p(T) = p_t(T) = 0`, with the forward
//! leapfrog run on a reversed clock, and assembles
//! `g_K = -int_0^T int <grad_Y C_K(Ju), Jp> dx dt` by the same quadrature.
//!
//! The co-normal boundary condition `A : (p (x) nu) = 0` forces `p = 0` on
//! the boundary whenever `A` is coercive (contract it with `p (x) nu`), so
//! the backward problem carries the same homogeneous Dirichlet closure as
//! the forward one. See [`conormal_trace`].

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::integrate;
use crate::grid::SpaceTimeField;
use crate::sensitivity::Linearization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AdjointMethod {
    #[default]
    Discrete,
    Continuous,
}

impl std::str::FromStr for AdjointMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(AdjointMethod::Discrete),
            "continuous" => Ok(AdjointMethod::Continuous),
            other => Err(Error::invalid(format!(
                "unknown adjoint method '{other}', expected discrete or continuous"
            ))),
        }
    }
}

/// Backward solution together with the weight that drove it.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointState {
    pub p: SpaceTimeField,
    pub w: SpaceTimeField,
}

fn check_weight(lin: &Linearization, w: &SpaceTimeField) -> Result<()> {
    w.check_grid(lin.grid())?;
    if !w.is_finite() {
        return Err(Error::invalid("adjoint weight is not finite"));
    }
    Ok(())
}

/// `g` with `<T'(alpha) h, w> = <h, g>` for every `h`, exactly.
pub fn apply_adjoint_discrete(lin: &Linearization, w: &SpaceTimeField) -> Result<Vec<f64>> {
    check_weight(lin, w)?;
    let setup = lin.setup();
    setup.check_cfl(lin.alpha())?;
    let grid = lin.grid();
    let m = grid.steps();
    let per = grid.nodes() * grid.dim();
    let dt2 = grid.dt() * grid.dt();
    let tau = grid.time_weights();
    let inv_rho = setup.inv_rho_components();
    let mut ws = lin.workspace();

    // q[k] for k = 1..=m; q^{m+1} = q^{m+2} = 0.
    let mut q = vec![vec![0.0; per]; m + 3];
    let mut s = vec![0.0; per];
    for k in (1..=m).rev() {
        lin.apply_stiffness(k, &q[k + 1], &mut s, &mut ws);
        let wk = w.step_slice(k);
        let (head, tail) = q.split_at_mut(k + 1);
        let qk = &mut head[k];
        for i in 0..per {
            qk[i] = 2.0 * tail[0][i] - tail[1][i] + inv_rho[i] * (dt2 * s[i] + tau[k] * wk[i]);
        }
        if qk.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { step: k });
        }
    }

    // g_K = -dt^2 [ 1/2 <J q^1, sigma_K^0> + sum_{k=1}^{m-1} <J q^{k+1}, sigma_K^k> ]
    let jq: Vec<Vec<f64>> = (1..=m)
        .into_par_iter()
        .map(|k| {
            let mut j = vec![0.0; grid.cells() * grid.dim() * grid.dim()];
            grid.jacobian_into(&q[k], &mut j);
            j
        })
        .collect();
    let vol = grid.volume();
    let g = (0..lin.len())
        .into_par_iter()
        .map(|kk| {
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let mut acc = 0.5 * dot(&jq[0], lin.entry_stress(kk, 0));
            for k in 1..m {
                acc += dot(&jq[k], lin.entry_stress(kk, k));
            }
            -dt2 * vol * acc
        })
        .collect();
    Ok(g)
}

/// Backward problem with zero final data, solved on the reversed clock.
pub fn solve_backward_continuous(lin: &Linearization, w: &SpaceTimeField) -> Result<SpaceTimeField> {
    check_weight(lin, w)?;
    let setup = lin.setup();
    setup.check_cfl(lin.alpha())?;
    let grid = lin.grid();
    let m = grid.steps();
    let per = grid.nodes() * grid.dim();
    let zero = vec![0.0; per];
    let inv_rho = setup.inv_rho_components();
    let mut ws = lin.workspace();
    let reversed = integrate(grid, &inv_rho, &zero, &zero, |s, state, out| {
        lin.apply_stiffness(m - s, state, out, &mut ws);
        out.iter_mut()
            .zip(w.step_slice(m - s))
            .for_each(|(a, b)| *a += b);
    })?;
    let mut values = reversed;
    values.invert_axis(Axis(0));
    SpaceTimeField::from_values(grid, values)
}

/// Backward solve plus the gradient contraction.
pub fn apply_adjoint_continuous(lin: &Linearization, w: &SpaceTimeField) -> Result<(Vec<f64>, AdjointState)> {
    let p = solve_backward_continuous(lin, w)?;
    let g = contract_gradient(lin, &p);
    Ok((
        g,
        AdjointState {
            p,
            w: w.clone(),
        },
    ))
}

/// `g_K = -sum_k tau_k <sigma_K^k, J p^k>` over cells.
pub fn contract_gradient(lin: &Linearization, p: &SpaceTimeField) -> Vec<f64> {
    let grid = lin.grid();
    let tau = grid.time_weights();
    let jp: Vec<Vec<f64>> = (0..=grid.steps())
        .into_par_iter()
        .map(|k| {
            let mut j = vec![0.0; grid.cells() * grid.dim() * grid.dim()];
            grid.jacobian_into(p.step_slice(k), &mut j);
            j
        })
        .collect();
    let vol = grid.volume();
    (0..lin.len())
        .into_par_iter()
        .map(|kk| {
            let mut acc = 0.0;
            for (k, t) in tau.iter().enumerate() {
                acc += t * jp[k]
                    .iter()
                    .zip(lin.entry_stress(kk, k))
                    .map(|(x, y)| x * y)
                    .sum::<f64>();
            }
            -vol * acc
        })
        .collect()
}

/// Either adjoint by method.
pub fn apply_adjoint(lin: &Linearization, w: &SpaceTimeField, method: AdjointMethod) -> Result<Vec<f64>> {
    match method {
        AdjointMethod::Discrete => apply_adjoint_discrete(lin, w),
        AdjointMethod::Continuous => Ok(apply_adjoint_continuous(lin, w)?.0),
    }
}

/// Co-normal trace `M_kl = sum_ij p_i A_(ij)(kl) nu_j` of one cell tensor.
/// `<p (x) nu, M> = <p (x) nu, A (p (x) nu)> >= kappa |p|^2 |nu|^2`, so it
/// vanishes only for `p = 0` when `A` is coercive.
pub fn conormal_trace(tensor: &[f64], p: &[f64], nu: &[f64]) -> Vec<f64> {
    let d = p.len();
    let dd = d * d;
    let mut out = vec![0.0; dd];
    for i in 0..d {
        for j in 0..d {
            let w = p[i] * nu[j];
            if w == 0.0 {
                continue;
            }
            let row = &tensor[(i * d + j) * dd..(i * d + j + 1) * dd];
            out.iter_mut().zip(row).for_each(|(o, a)| *o += w * a);
        }
    }
    out
}
