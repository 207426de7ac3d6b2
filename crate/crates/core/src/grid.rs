//! Regular grids on the unit box and the matched Jacobian/divergence pair.
//!
//! Displacements live on the `n^d` interior nodes; the boundary nodes carry
//! the homogeneous Dirichlet value and are never stored. Displacement
//! gradients live on the `(n+1)^d` cell centres: each component is the
//! difference across the cell averaged over the remaining axes, which is a
//! central difference about the cell centre. The divergence is defined as
//! the exact negative transpose of that map, so
//! `sum_cells <P, Ju> = -sum_nodes <div P, u>` holds to round-off for every
//! node field. Nodes and cells carry the same quadrature weight `dx^d`.

use ndarray::{Array2, Array3, ArrayView2, ArrayView3, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NO_NODE: u32 = u32::MAX;

/// Space-time grid over `[0, T] x (0, 1)^d`.
#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    horizon: f64,
    steps: usize,
    /// `2^d` corner node indices per cell, `NO_NODE` on the boundary.
    corners: Vec<u32>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && self.steps == other.steps
            && self.horizon == other.horizon
    }
}

/// Plain description of a grid, used for headers and configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub dim: usize,
    pub n: usize,
    pub steps: usize,
    pub horizon: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, horizon: f64, steps: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 interior points per axis, got {n}")));
        }
        if steps < 2 {
            return Err(Error::invalid(format!("need at least 2 time steps, got {steps}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("time horizon must be positive, got {horizon}")));
        }
        let cells_per_axis = n + 1;
        let cells = cells_per_axis.pow(dim as u32);
        let ncorner = 1usize << dim;
        if n.pow(dim as u32) >= NO_NODE as usize {
            return Err(Error::invalid("grid too large"));
        }
        let mut corners = vec![NO_NODE; cells * ncorner];
        for cell in 0..cells {
            let cidx = unravel(cell, cells_per_axis, dim);
            for b in 0..ncorner {
                let mut node = 0usize;
                let mut stride = 1usize;
                let mut inside = true;
                for a in 0..dim {
                    // physical node index along axis a, 0 and n+1 are boundary
                    let p = cidx[a] + ((b >> a) & 1);
                    if p == 0 || p == n + 1 {
                        inside = false;
                        break;
                    }
                    node += (p - 1) * stride;
                    stride *= n;
                }
                if inside {
                    corners[cell * ncorner + b] = node as u32;
                }
            }
        }
        Ok(Grid {
            dim,
            n,
            horizon,
            steps,
            corners,
        })
    }

    pub fn from_shape(shape: GridShape) -> Result<Self> {
        Grid::new(shape.dim, shape.n, shape.horizon, shape.steps)
    }

    pub fn shape(&self) -> GridShape {
        GridShape {
            dim: self.dim,
            n: self.n,
            steps: self.steps,
            horizon: self.horizon,
        }
    }

    /// Same spatial grid with a different time discretization.
    pub fn with_time(&self, horizon: f64, steps: usize) -> Result<Self> {
        Grid::new(self.dim, self.n, horizon, steps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.steps as f64
    }

    pub fn nodes(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn cells(&self) -> usize {
        (self.n + 1).pow(self.dim as u32)
    }

    /// Quadrature weight of a node or a cell.
    pub fn volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn node_position(&self, node: usize) -> [f64; 3] {
        let idx = unravel(node, self.n, self.dim);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (idx[a] + 1) as f64 * self.dx();
        }
        x
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 3] {
        let idx = unravel(cell, self.n + 1, self.dim);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (idx[a] as f64 + 0.5) * self.dx();
        }
        x
    }

    /// Interior node index from a per-axis index (0-based, interior only).
    pub fn node_index(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn node_multi_index(&self, node: usize) -> [usize; 3] {
        unravel(node, self.n, self.dim)
    }

    /// Trapezoidal weights in time, `dt/2` at both ends.
    pub fn time_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.steps + 1];
        w[0] = 0.5 * dt;
        w[self.steps] = 0.5 * dt;
        w
    }

    /// Cell-centred displacement gradient of a node field (flat slices:
    /// `u` is `nodes * d`, `out` is `cells * d * d`, row-major `(i, j)` =
    /// `d u_i / d x_j`).
    pub fn jacobian_into(&self, u: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let dd = d * d;
        let ncorner = 1usize << d;
        let w = 1.0 / (self.dx() * (1usize << (d - 1)) as f64);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (cell, jac) in out.chunks_exact_mut(dd).enumerate() {
            let corners = &self.corners[cell * ncorner..(cell + 1) * ncorner];
            for (b, &node) in corners.iter().enumerate() {
                if node == NO_NODE {
                    continue;
                }
                let un = &u[node as usize * d..(node as usize + 1) * d];
                for j in 0..d {
                    let s = if (b >> j) & 1 == 1 { w } else { -w };
                    for i in 0..d {
                        jac[i * d + j] += s * un[i];
                    }
                }
            }
        }
    }

    /// Negative transpose of [`Grid::jacobian_into`]; `out` is overwritten.
    pub fn divergence_into(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.divergence_add(p, out, 1.0);
    }

    /// `out += scale * div P`.
    pub(crate) fn divergence_add(&self, p: &[f64], out: &mut [f64], scale: f64) {
        let d = self.dim;
        let dd = d * d;
        let ncorner = 1usize << d;
        let w = scale / (self.dx() * (1usize << (d - 1)) as f64);
        for (cell, pc) in p.chunks_exact(dd).enumerate() {
            let corners = &self.corners[cell * ncorner..(cell + 1) * ncorner];
            for (b, &node) in corners.iter().enumerate() {
                if node == NO_NODE {
                    continue;
                }
                let on = &mut out[node as usize * d..(node as usize + 1) * d];
                for j in 0..d {
                    // transpose of +w for the upper corner is -w
                    let s = if (b >> j) & 1 == 1 { -w } else { w };
                    for i in 0..d {
                        on[i] += s * pc[i * d + j];
                    }
                }
            }
        }
    }

    /// Displacement gradient of a node field shaped `(nodes, d)`; returns
    /// `(cells, d*d)`.
    pub fn jacobian(&self, u: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_nodes(u, "jacobian input")?;
        let u = u.as_standard_layout();
        let mut out = Array2::zeros((self.cells(), self.dim * self.dim));
        self.jacobian_into(
            u.as_slice().expect("standard layout"),
            out.as_slice_mut().expect("fresh array"),
        );
        Ok(out)
    }

    /// Row-wise divergence of a cell matrix field `(cells, d*d)`; returns
    /// `(nodes, d)`.
    pub fn divergence(&self, p: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_cells(p, "divergence input")?;
        let p = p.as_standard_layout();
        let mut out = Array2::zeros((self.nodes(), self.dim));
        self.divergence_into(
            p.as_slice().expect("standard layout"),
            out.as_slice_mut().expect("fresh array"),
        );
        Ok(out)
    }

    pub(crate) fn check_nodes(&self, u: ArrayView2<f64>, what: &str) -> Result<()> {
        if u.nrows() != self.nodes() {
            return Err(Error::mismatch(format!("{what} (nodes)"), self.nodes(), u.nrows()));
        }
        if u.ncols() != self.dim {
            return Err(Error::mismatch(format!("{what} (components)"), self.dim, u.ncols()));
        }
        Ok(())
    }

    pub(crate) fn check_cells(&self, p: ArrayView2<f64>, what: &str) -> Result<()> {
        if p.nrows() != self.cells() {
            return Err(Error::mismatch(format!("{what} (cells)"), self.cells(), p.nrows()));
        }
        if p.ncols() != self.dim * self.dim {
            return Err(Error::mismatch(
                format!("{what} (components)"),
                self.dim * self.dim,
                p.ncols(),
            ));
        }
        Ok(())
    }

    /// Spatial L2 inner product. Works for node fields and cell fields
    /// alike since both use the weight `dx^d` (midpoint rule on cells).
    pub fn inner_space(&self, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
        if a.dim() != b.dim() {
            return Err(Error::mismatch("inner product operand size", a.len(), b.len()));
        }
        Ok(self.volume() * a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>())
    }

    /// Space-time inner product of `(steps+1, points, comps)` arrays:
    /// trapezoidal in time, midpoint in space.
    pub fn inner_space_time_arrays(&self, a: ArrayView3<f64>, b: ArrayView3<f64>) -> Result<f64> {
        if a.dim() != b.dim() {
            return Err(Error::mismatch("inner product operand size", a.len(), b.len()));
        }
        if a.len_of(Axis(0)) != self.steps + 1 {
            return Err(Error::mismatch("time levels", self.steps + 1, a.len_of(Axis(0))));
        }
        let tw = self.time_weights();
        let mut acc = 0.0;
        for (k, w) in tw.iter().enumerate() {
            let s: f64 = a
                .index_axis(Axis(0), k)
                .iter()
                .zip(b.index_axis(Axis(0), k).iter())
                .map(|(x, y)| x * y)
                .sum();
            acc += w * s;
        }
        Ok(acc * self.volume())
    }

    pub fn inner_space_time(&self, a: &SpaceTimeField, b: &SpaceTimeField) -> Result<f64> {
        a.check_grid(self)?;
        b.check_grid(self)?;
        self.inner_space_time_arrays(a.values.view(), b.values.view())
    }
}

fn unravel(mut idx: usize, base: usize, dim: usize) -> [usize; 3] {
    let mut out = [0; 3];
    for slot in out.iter_mut().take(dim) {
        *slot = idx % base;
        idx /= base;
    }
    out
}

/// Vector-valued field on the interior nodes at every time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    shape: GridShape,
    values: Array3<f64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &Grid) -> Self {
        SpaceTimeField {
            shape: grid.shape(),
            values: Array3::zeros((grid.steps + 1, grid.nodes(), grid.dim)),
        }
    }

    /// Samples `f(t, x, out)` at every node and time level.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, &[f64], &mut [f64])) -> Self {
        let mut field = SpaceTimeField::zeros(grid);
        let d = grid.dim;
        for k in 0..=grid.steps {
            let t = grid.time(k);
            let mut slice = field.values.index_axis_mut(Axis(0), k);
            for node in 0..grid.nodes() {
                let x = grid.node_position(node);
                let mut row = slice.row_mut(node);
                let out = row.as_slice_mut().expect("contiguous row");
                f(t, &x[..d], out);
            }
        }
        field
    }

    /// Same spatial value at every time level.
    pub fn constant_in_time(grid: &Grid, slice: ArrayView2<f64>) -> Result<Self> {
        grid.check_nodes(slice, "field slice")?;
        let mut field = SpaceTimeField::zeros(grid);
        for mut s in field.values.outer_iter_mut() {
            s.assign(&slice);
        }
        Ok(field)
    }

    pub fn from_values(grid: &Grid, values: Array3<f64>) -> Result<Self> {
        let expected = (grid.steps + 1, grid.nodes(), grid.dim);
        if values.dim() != expected {
            return Err(Error::mismatch(
                "space-time field size",
                expected.0 * expected.1 * expected.2,
                values.len(),
            ));
        }
        Ok(SpaceTimeField {
            shape: grid.shape(),
            values: values.as_standard_layout().into_owned(),
        })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn steps(&self) -> usize {
        self.shape.steps
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array3<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array3<f64> {
        self.values
    }

    pub fn step(&self, k: usize) -> ArrayView2<'_, f64> {
        self.values.index_axis(Axis(0), k)
    }

    pub fn step_mut(&mut self, k: usize) -> ArrayViewMut2<'_, f64> {
        self.values.index_axis_mut(Axis(0), k)
    }

    /// Contiguous slice of time level `k`.
    pub fn step_slice(&self, k: usize) -> &[f64] {
        let per = self.shape.n.pow(self.shape.dim as u32) * self.shape.dim;
        &self.values.as_slice().expect("standard layout")[k * per..(k + 1) * per]
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        let g = grid.shape();
        if self.shape.dim != g.dim {
            return Err(Error::mismatch("field dimension", g.dim, self.shape.dim));
        }
        if self.shape.n != g.n {
            return Err(Error::mismatch("field points per axis", g.n, self.shape.n));
        }
        if self.shape.steps != g.steps {
            return Err(Error::mismatch("field time steps", g.steps, self.shape.steps));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        SpaceTimeField {
            shape: self.shape,
            values: &self.values * s,
        }
    }

    /// `self - other`.
    pub fn sub(&self, other: &SpaceTimeField) -> Result<Self> {
        self.same_shape(other)?;
        Ok(SpaceTimeField {
            shape: self.shape,
            values: &self.values - &other.values,
        })
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SpaceTimeField) -> Result<()> {
        self.same_shape(other)?;
        self.values.scaled_add(s, &other.values);
        Ok(())
    }

    fn same_shape(&self, other: &SpaceTimeField) -> Result<()> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::mismatch("field size", self.values.len(), other.values.len()));
        }
        Ok(())
    }

    /// Second-order velocity estimate at level `k`: central inside,
    /// one-sided three-point at both ends.
    pub fn velocity(&self, k: usize, dt: f64) -> Array2<f64> {
        let m = self.shape.steps;
        let u = |j: usize| self.step(j);
        if k == 0 {
            (&u(1) * 4.0 - &u(0) * 3.0 - &u(2)) / (2.0 * dt)
        } else if k == m {
            (&u(m) * 3.0 - &u(m - 1) * 4.0 + &u(m - 2)) / (2.0 * dt)
        } else {
            (&u(k + 1) - &u(k - 1)) / (2.0 * dt)
        }
    }
}

/// Mass density per interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    rho: Vec<f64>,
}

impl MaterialField {
    pub fn constant(grid: &Grid, rho: f64) -> Result<Self> {
        MaterialField::from_fn(grid, |_| rho)
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let rho: Vec<f64> = (0..grid.nodes())
            .map(|node| f(&grid.node_position(node)[..grid.dim]))
            .collect();
        if let Some(v) = rho.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!("density must be positive and finite, got {v}")));
        }
        Ok(MaterialField { rho })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn min(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests;
