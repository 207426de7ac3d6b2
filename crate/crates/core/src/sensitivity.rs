//! Fréchet derivative `v = T'(alpha) h`: the forward leapfrog scheme
//! linearized about a computed state `u`, with frozen coefficient tensors
//! `A^k = grad_Y grad_Y C_alpha(Ju^k)` and source `div sum_K h_K sigma_K^k`,
//! `sigma_K^k = grad_Y C_K(Ju^k)`.

use ndarray::{Array2, Array3, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dictionary::kappa_mu;
use crate::error::{Error, Result};
use crate::forward::{integrate, ProblemSetup};
use crate::grid::{Grid, SpaceTimeField};
use crate::operator::contract_hessian;

/// `A^k` per cell and time level, `d^4` values per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCoefficients {
    dim: usize,
    /// `(steps + 1, cells, d^4)`.
    tensors: Array3<f64>,
}

impl LinearizedCoefficients {
    pub fn tensors(&self) -> &Array3<f64> {
        &self.tensors
    }

    /// Flat tensors of time level `k`, `cells * d^4` values.
    pub fn level(&self, k: usize) -> &[f64] {
        let per = self.tensors.len_of(Axis(1)) * self.tensors.len_of(Axis(2));
        &self.tensors.as_slice().expect("standard layout")[k * per..(k + 1) * per]
    }

    /// Largest `|A_(ij)(kl) - A_(kl)(ij)|` relative to `max |A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let dd = self.dim * self.dim;
        let scale = self.tensors.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for t in self.tensors.as_slice().expect("standard layout").chunks_exact(dd * dd) {
            for a in 0..dd {
                for b in a + 1..dd {
                    worst = worst.max((t[a * dd + b] - t[b * dd + a]).abs());
                }
            }
        }
        worst / scale
    }

    /// Range of `<H, A H> / |H|^2` over `samples` random `(k, cell, H)`.
    pub fn form_range(&self, samples: usize, seed: u64) -> (f64, f64) {
        let dd = self.dim * self.dim;
        let levels = self.tensors.len_of(Axis(0));
        let cells = self.tensors.len_of(Axis(1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for _ in 0..samples {
            let k = rng.random_range(0..levels);
            let c = rng.random_range(0..cells);
            let h: Vec<f64> = (0..dd).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = self.tensors.slice(ndarray::s![k, c, ..]);
            let mut form = 0.0;
            for a in 0..dd {
                for b in 0..dd {
                    form += h[a] * t[a * dd + b] * h[b];
                }
            }
            let n2: f64 = h.iter().map(|v| v * v).sum();
            lo = lo.min(form / n2);
            hi = hi.max(form / n2);
        }
        (lo, hi)
    }
}

fn check_state(setup: &ProblemSetup, alpha: &[f64], u: &SpaceTimeField) -> Result<()> {
    setup.dictionary().check_len(alpha, "coefficient vector")?;
    u.check_grid(setup.grid())?;
    if !u.is_finite() {
        return Err(Error::invalid("state field is not finite"));
    }
    Ok(())
}

/// `A^k = sum_K alpha_K phi_K hess C_K(Ju^k)` on every cell and level.
pub fn build_linearization(setup: &ProblemSetup, alpha: &[f64], u: &SpaceTimeField) -> Result<LinearizedCoefficients> {
    check_state(setup, alpha, u)?;
    let grid = setup.grid();
    let d = grid.dim();
    let d4 = d.pow(4);
    let cells = grid.cells();
    let mut tensors = Array3::zeros((grid.steps() + 1, cells, d4));
    tensors
        .as_slice_mut()
        .expect("fresh array")
        .par_chunks_mut(cells * d4)
        .enumerate()
        .for_each_init(
            || vec![0.0; cells * d * d],
            |jac, (k, level)| {
                grid.jacobian_into(u.step_slice(k), jac);
                setup.energy().hessian_field(alpha, jac, level);
            },
        );
    Ok(LinearizedCoefficients { dim: d, tensors })
}

/// `div sum_K h_K grad_Y C_K(Ju^k)` at every level.
pub fn build_rhs(setup: &ProblemSetup, h: &[f64], u: &SpaceTimeField) -> Result<SpaceTimeField> {
    check_state(setup, h, u)?;
    let grid = setup.grid();
    let dd = grid.dim() * grid.dim();
    let mut out = SpaceTimeField::zeros(grid);
    let mut jac = vec![0.0; grid.cells() * dd];
    let mut stress = vec![0.0; grid.cells() * dd];
    for k in 0..=grid.steps() {
        grid.jacobian_into(u.step_slice(k), &mut jac);
        setup.energy().stress_field(h, &jac, &mut stress);
        let mut level = out.step_mut(k);
        grid.divergence_into(&stress, level.as_slice_mut().expect("standard layout"));
    }
    Ok(out)
}

/// Frozen linearization about one state: coefficient tensors plus the
/// per-entry stresses. Shared by the derivative and both adjoints.
#[derive(Debug, Clone)]
pub struct Linearization {
    setup: ProblemSetup,
    alpha: Vec<f64>,
    coefficients: LinearizedCoefficients,
    /// `sigma[K]` is `(steps + 1, cells * d^2)`, weight included.
    sigma: Vec<Array2<f64>>,
}

impl Linearization {
    pub fn new(setup: &ProblemSetup, alpha: &[f64], u: &SpaceTimeField) -> Result<Self> {
        let coefficients = build_linearization(setup, alpha, u)?;
        let grid = setup.grid();
        let dd = grid.dim() * grid.dim();
        let per = grid.cells() * dd;
        let mut jacs = Array2::zeros((grid.steps() + 1, per));
        for (k, mut row) in jacs.outer_iter_mut().enumerate() {
            grid.jacobian_into(u.step_slice(k), row.as_slice_mut().expect("standard layout"));
        }
        let sigma = (0..setup.dictionary().len())
            .into_par_iter()
            .map(|kk| {
                let mut s = Array2::zeros((grid.steps() + 1, per));
                for (jac, mut row) in jacs.outer_iter().zip(s.outer_iter_mut()) {
                    setup.energy().entry_stress_field(
                        kk,
                        jac.as_slice().expect("standard layout"),
                        row.as_slice_mut().expect("standard layout"),
                    );
                }
                s
            })
            .collect();
        Ok(Linearization {
            setup: setup.clone(),
            alpha: alpha.to_vec(),
            coefficients,
            sigma,
        })
    }

    pub fn setup(&self) -> &ProblemSetup {
        &self.setup
    }

    pub fn grid(&self) -> &Grid {
        self.setup.grid()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn coefficients(&self) -> &LinearizedCoefficients {
        &self.coefficients
    }

    /// Number of dictionary entries.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Stress field of entry `kk` at level `k` (`cells * d^2`).
    pub fn entry_stress(&self, kk: usize, k: usize) -> &[f64] {
        let row = self.sigma[kk].row(k);
        let per = row.len();
        &self.sigma[kk].as_slice().expect("standard layout")[k * per..(k + 1) * per]
    }

    /// `out = div(A^k : J v)`; `ws` holds two `cells * d^2` buffers.
    pub(crate) fn apply_stiffness(&self, k: usize, v: &[f64], out: &mut [f64], ws: &mut Workspace) {
        let grid = self.grid();
        let dd = grid.dim() * grid.dim();
        grid.jacobian_into(v, &mut ws.jac);
        contract_hessian(dd, self.coefficients.level(k), &ws.jac, &mut ws.flux);
        grid.divergence_into(&ws.flux, out);
    }

    /// `out += div(sum_K h_K sigma_K^k)`.
    fn add_source(&self, k: usize, h: &[f64], out: &mut [f64], ws: &mut Workspace) {
        ws.flux.iter_mut().for_each(|v| *v = 0.0);
        for (kk, hk) in h.iter().enumerate() {
            if *hk == 0.0 {
                continue;
            }
            ws.flux
                .iter_mut()
                .zip(self.entry_stress(kk, k))
                .for_each(|(a, b)| *a += hk * b);
        }
        self.grid().divergence_add(&ws.flux, out, 1.0);
    }

    pub(crate) fn workspace(&self) -> Workspace {
        let g = self.grid();
        let n = g.cells() * g.dim() * g.dim();
        Workspace {
            jac: vec![0.0; n],
            flux: vec![0.0; n],
        }
    }

    /// Solves for `v = T'(alpha) h`.
    pub fn apply(&self, h: &[f64]) -> Result<SpaceTimeField> {
        self.setup.dictionary().check_len(h, "direction")?;
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("direction is not finite"));
        }
        self.setup.check_cfl(&self.alpha)?;
        let grid = self.grid();
        let per = grid.nodes() * grid.dim();
        let zero = vec![0.0; per];
        let inv_rho = self.setup.inv_rho_components();
        let mut ws = self.workspace();
        let values = integrate(grid, &inv_rho, &zero, &zero, |k, state, out| {
            self.apply_stiffness(k, state, out, &mut ws);
            self.add_source(k, h, out, &mut ws);
        })?;
        SpaceTimeField::from_values(grid, values)
    }

    /// Dense `((steps+1) * nodes * d) x N` matrix of unit responses.
    pub fn dense_matrix(&self) -> Result<Array2<f64>> {
        let n = self.len();
        let cols: Vec<SpaceTimeField> = (0..n)
            .into_par_iter()
            .map(|kk| {
                let mut e = vec![0.0; n];
                e[kk] = 1.0;
                self.apply(&e)
            })
            .collect::<Result<_>>()?;
        let rows = cols.first().map_or(0, |c| c.values().len());
        let mut out = Array2::zeros((rows, n));
        for (kk, c) in cols.iter().enumerate() {
            out.column_mut(kk)
                .iter_mut()
                .zip(c.values().iter())
                .for_each(|(a, b)| *a = *b);
        }
        Ok(out)
    }
}

pub(crate) struct Workspace {
    pub(crate) jac: Vec<f64>,
    pub(crate) flux: Vec<f64>,
}

/// Solves the linearized problem at `alpha` about `u` in direction `h`.
pub fn solve_frechet(setup: &ProblemSetup, alpha: &[f64], h: &[f64], u: &SpaceTimeField) -> Result<SpaceTimeField> {
    Linearization::new(setup, alpha, u)?.apply(h)
}

/// `<a, b>` in `L2(0,T;V)`: the space-time L2 product plus the same
/// product of the cell gradients.
pub fn inner_l2_v(grid: &Grid, a: &SpaceTimeField, b: &SpaceTimeField) -> Result<f64> {
    a.check_grid(grid)?;
    b.check_grid(grid)?;
    let base = grid.inner_space_time(a, b)?;
    let dd = grid.dim() * grid.dim();
    let mut ja = vec![0.0; grid.cells() * dd];
    let mut jb = vec![0.0; grid.cells() * dd];
    let mut acc = 0.0;
    for (k, w) in grid.time_weights().iter().enumerate() {
        grid.jacobian_into(a.step_slice(k), &mut ja);
        grid.jacobian_into(b.step_slice(k), &mut jb);
        acc += w * ja.iter().zip(&jb).map(|(x, y)| x * y).sum::<f64>();
    }
    Ok(base + acc * grid.volume())
}

pub fn norm_l2_v(grid: &Grid, a: &SpaceTimeField) -> Result<f64> {
    Ok(inner_l2_v(grid, a, a)?.max(0.0).sqrt())
}

/// Representer of the `L2(0,T;V)` product in the plain `L2` pairing:
/// `<a, r>_V = <a, r - div J r>` for every node field `a`.
pub fn riesz_weight(grid: &Grid, r: &SpaceTimeField) -> Result<SpaceTimeField> {
    r.check_grid(grid)?;
    let dd = grid.dim() * grid.dim();
    let mut out = r.clone();
    let mut jac = vec![0.0; grid.cells() * dd];
    for k in 0..=grid.steps() {
        grid.jacobian_into(r.step_slice(k), &mut jac);
        let mut level = out.step_mut(k);
        grid.divergence_add(&jac, level.as_slice_mut().expect("standard layout"), -1.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContinuityReport {
    /// `max ||v||_{L2(0,T;V)} / ||h||_inf` over the samples.
    pub l1: f64,
    pub ratios: Vec<f64>,
}

/// Measured continuity constant of `h -> v` over the given directions.
pub fn continuity_bound_check(lin: &Linearization, directions: &[Vec<f64>]) -> Result<ContinuityReport> {
    let ratios: Vec<f64> = directions
        .par_iter()
        .map(|h| {
            let hinf = h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if hinf == 0.0 {
                return Err(Error::invalid("direction must be nonzero"));
            }
            let v = lin.apply(h)?;
            Ok(norm_l2_v(lin.grid(), &v)? / hinf)
        })
        .collect::<Result<_>>()?;
    let l1 = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ContinuityReport { l1, ratios })
}

/// `count` seeded random directions with entries in `[-1, 1]`.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// `(kappa(alpha), mu(alpha))` paired with the sampled form range of `A`.
pub fn coercivity_summary(lin: &Linearization, samples: usize, seed: u64) -> Result<((f64, f64), (f64, f64))> {
    let km = kappa_mu(lin.setup().dictionary(), lin.alpha())?;
    Ok((km, lin.coefficients().form_range(samples, seed)))
}

#[cfg(test)]
mod tests;
