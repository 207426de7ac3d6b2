//! Dictionary evaluated on a grid: cell weights are sampled once, the
//! strain functions are evaluated per cell.

use crate::dictionary::{EnergyDictionary, EnergyFamily};
use crate::grid::Grid;

#[derive(Debug, Clone)]
pub struct GridEnergy {
    dim: usize,
    families: Vec<EnergyFamily>,
    /// `weights[K][cell] = phi_K(cell centre)`.
    weights: Vec<Vec<f64>>,
}

impl GridEnergy {
    pub fn new(dict: &EnergyDictionary, grid: &Grid) -> Self {
        let d = grid.dim();
        let weights = dict
            .entries()
            .iter()
            .map(|e| {
                (0..grid.cells())
                    .map(|c| e.weight().value(&grid.cell_center(c)[..d]))
                    .collect()
            })
            .collect();
        GridEnergy {
            dim: d,
            families: dict.entries().iter().map(|e| *e.family()).collect(),
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn cell_weights(&self, k: usize) -> &[f64] {
        &self.weights[k]
    }

    /// `sum_cells C_alpha(x_c, J_c)` (without the cell volume).
    pub fn energy_sum(&self, alpha: &[f64], jac: &[f64]) -> f64 {
        let dd = self.dim * self.dim;
        let mut acc = 0.0;
        for (cell, y) in jac.chunks_exact(dd).enumerate() {
            for (k, fam) in self.families.iter().enumerate() {
                if alpha[k] != 0.0 {
                    acc += alpha[k] * self.weights[k][cell] * fam.energy(self.dim, y);
                }
            }
        }
        acc
    }

    /// Writes `sum_K coeffs_K phi_K grad_Y C_hat_K(J)` per cell into `out`.
    pub fn stress_field(&self, coeffs: &[f64], jac: &[f64], out: &mut [f64]) {
        let dd = self.dim * self.dim;
        let mut tmp = vec![0.0; dd];
        out.iter_mut().for_each(|v| *v = 0.0);
        for (cell, (y, o)) in jac.chunks_exact(dd).zip(out.chunks_exact_mut(dd)).enumerate() {
            for (k, fam) in self.families.iter().enumerate() {
                let w = coeffs[k] * self.weights[k][cell];
                if w == 0.0 {
                    continue;
                }
                fam.stress(self.dim, y, &mut tmp);
                o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += w * b);
            }
        }
    }

    /// Stress field of a single entry (weight included, no coefficient).
    pub fn entry_stress_field(&self, k: usize, jac: &[f64], out: &mut [f64]) {
        let dd = self.dim * self.dim;
        let fam = &self.families[k];
        for (cell, (y, o)) in jac.chunks_exact(dd).zip(out.chunks_exact_mut(dd)).enumerate() {
            fam.stress(self.dim, y, o);
            let w = self.weights[k][cell];
            o.iter_mut().for_each(|v| *v *= w);
        }
    }

    /// Writes the combined Hessian per cell (`d^4` values each) into `out`.
    pub fn hessian_field(&self, alpha: &[f64], jac: &[f64], out: &mut [f64]) {
        let dd = self.dim * self.dim;
        let d4 = dd * dd;
        let mut tmp = vec![0.0; d4];
        out.iter_mut().for_each(|v| *v = 0.0);
        for (cell, (y, o)) in jac.chunks_exact(dd).zip(out.chunks_exact_mut(d4)).enumerate() {
            for (k, fam) in self.families.iter().enumerate() {
                let w = alpha[k] * self.weights[k][cell];
                if w == 0.0 {
                    continue;
                }
                fam.hessian(self.dim, y, &mut tmp);
                o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += w * b);
            }
        }
    }
}

/// `out_c = A_c : H_c` for every cell (`A` holds `d^4` values per cell).
pub(crate) fn contract_hessian(dd: usize, hess: &[f64], h: &[f64], out: &mut [f64]) {
    for ((a, hc), oc) in hess
        .chunks_exact(dd * dd)
        .zip(h.chunks_exact(dd))
        .zip(out.chunks_exact_mut(dd))
    {
        for (row, o) in a.chunks_exact(dd).zip(oc.iter_mut()) {
            *o = row.iter().zip(hc).map(|(x, y)| x * y).sum();
        }
    }
}
