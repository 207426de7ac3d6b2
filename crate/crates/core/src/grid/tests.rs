use std::f64::consts::PI;

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn random_nodes(grid: &Grid, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((grid.nodes(), grid.dim()), |_| rng.random_range(-1.0..1.0))
}

fn random_cells(grid: &Grid, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((grid.cells(), grid.dim() * grid.dim()), |_| rng.random_range(-1.0..1.0))
}

fn norm(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn rejects_degenerate_grids() {
    assert!(Grid::new(0, 8, 1.0, 10).is_err());
    assert!(Grid::new(4, 8, 1.0, 10).is_err());
    assert!(Grid::new(1, 1, 1.0, 10).is_err());
    assert!(Grid::new(1, 8, 1.0, 1).is_err());
    assert!(Grid::new(1, 8, -1.0, 10).is_err());
    let g = Grid::new(2, 8, 0.5, 10).unwrap();
    assert_eq!(g.dx(), 1.0 / 9.0);
    assert_eq!(g.dt(), 0.05);
    assert_eq!(g.nodes(), 64);
    assert_eq!(g.cells(), 81);
}

#[test]
fn summation_by_parts_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in [1, 2] {
        for n in [4, 8, 16] {
            let g = Grid::new(d, n, 1.0, 2).unwrap();
            for _ in 0..5 {
                let w = random_nodes(&g, &mut rng);
                let p = random_cells(&g, &mut rng);
                let lhs = g.inner_space(p.view(), g.jacobian(w.view()).unwrap().view()).unwrap();
                let rhs = g.inner_space(g.divergence(p.view()).unwrap().view(), w.view()).unwrap();
                let scale = g.volume() * norm(&p) * norm(&w);
                assert!((lhs + rhs).abs() <= 1e-12 * scale, "d={d} n={n}: {}", lhs + rhs);
            }
        }
    }
}

#[test]
fn zero_field_has_zero_jacobian() {
    let g = Grid::new(2, 5, 1.0, 2).unwrap();
    let j = g.jacobian(Array2::zeros((g.nodes(), 2)).view()).unwrap();
    assert!(j.iter().all(|v| *v == 0.0));
}

#[test]
fn jacobian_of_parabola() {
    // x(1-x) vanishes on the boundary, so the cell stencil is a central
    // difference about every cell centre, exact for quadratics.
    let g = Grid::new(1, 16, 1.0, 2).unwrap();
    let u = Array2::from_shape_fn((g.nodes(), 1), |(i, _)| {
        let x = g.node_position(i)[0];
        x * (1.0 - x)
    });
    let j = g.jacobian(u.view()).unwrap();
    for c in 0..g.cells() {
        let x = g.cell_center(c)[0];
        assert!((j[[c, 0]] - (1.0 - 2.0 * x)).abs() <= 1e-12);
    }
}

#[test]
fn affine_field_has_constant_interior_gradient() {
    let g = Grid::new(2, 6, 1.0, 2).unwrap();
    let u = Array2::from_shape_fn((g.nodes(), 2), |(i, c)| {
        let x = g.node_position(i);
        if c == 0 { 2.0 * x[0] - x[1] } else { 0.5 * x[1] + 3.0 * x[0] }
    });
    let j = g.jacobian(u.view()).unwrap();
    let expect = [2.0, -1.0, 3.0, 0.5];
    for c in 0..g.cells() {
        let x = g.cell_center(c);
        let interior = (0..2).all(|a| x[a] > g.dx() && x[a] < 1.0 - g.dx());
        if interior {
            for k in 0..4 {
                assert!((j[[c, k]] - expect[k]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn divergence_of_constant_vanishes_inside() {
    let g = Grid::new(2, 6, 1.0, 2).unwrap();
    let p = Array2::from_elem((g.cells(), 4), 1.7);
    let div = g.divergence(p.view()).unwrap();
    for node in 0..g.nodes() {
        assert!(div.row(node).iter().all(|v| v.abs() <= 1e-12));
    }
}

fn divergence_error(n: usize) -> f64 {
    let g = Grid::new(1, n, 1.0, 2).unwrap();
    let p = Array2::from_shape_fn((g.cells(), 1), |(c, _)| (PI * g.cell_center(c)[0]).sin());
    let div = g.divergence(p.view()).unwrap();
    (0..g.nodes())
        .map(|i| (div[[i, 0]] - PI * (PI * g.node_position(i)[0]).cos()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn divergence_converges_at_second_order() {
    let errs: Vec<f64> = [8, 17, 35, 71].iter().map(|&n| divergence_error(n)).collect();
    for w in errs.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!(slope >= 1.9, "slope {slope} from {errs:?}");
    }
}

#[test]
fn jacobian_converges_at_second_order_in_2d() {
    let err = |n: usize| {
        let g = Grid::new(2, n, 1.0, 2).unwrap();
        let u = Array2::from_shape_fn((g.nodes(), 2), |(i, c)| {
            let x = g.node_position(i);
            (PI * x[0]).sin() * (PI * x[1]).sin() * if c == 0 { 1.0 } else { 0.5 }
        });
        let j = g.jacobian(u.view()).unwrap();
        let mut e: f64 = 0.0;
        for cell in 0..g.cells() {
            let x = g.cell_center(cell);
            let gx = PI * (PI * x[0]).cos() * (PI * x[1]).sin();
            let gy = PI * (PI * x[0]).sin() * (PI * x[1]).cos();
            e = e.max((j[[cell, 0]] - gx).abs()).max((j[[cell, 3]] - 0.5 * gy).abs());
        }
        e
    };
    let errs: Vec<f64> = [7, 15, 31].iter().map(|&n| err(n)).collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
    }
}

#[test]
fn inner_products() {
    let g = Grid::new(1, 9, 2.5, 10).unwrap();
    let zero = SpaceTimeField::zeros(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = SpaceTimeField::from_fn(&g, |_, _, out| out[0] = rng.random_range(-1.0..1.0));
    assert_eq!(g.inner_space_time(&zero, &w).unwrap(), 0.0);
    assert!(g.inner_space_time(&w, &w).unwrap() > 0.0);

    // constant cell fields: cells cover the unit interval exactly
    let (a, b) = (1.3, -0.4);
    let fa = ndarray::Array3::from_elem((11, g.cells(), 1), a);
    let fb = ndarray::Array3::from_elem((11, g.cells(), 1), b);
    let v = g.inner_space_time_arrays(fa.view(), fb.view()).unwrap();
    assert!((v - a * b * 2.5).abs() <= 1e-12);
}

#[test]
fn velocity_estimator_is_exact_on_quadratics_in_time() {
    let g = Grid::new(1, 4, 1.0, 8).unwrap();
    let f = SpaceTimeField::from_fn(&g, |t, x, out| out[0] = (1.0 + 2.0 * t + 3.0 * t * t) * x[0]);
    for k in 0..=8 {
        let v = f.velocity(k, g.dt());
        for i in 0..g.nodes() {
            let x = g.node_position(i)[0];
            assert!((v[[i, 0]] - (2.0 + 6.0 * g.time(k)) * x).abs() <= 1e-12);
        }
    }
}

#[test]
fn material_rejects_non_positive_density() {
    let g = Grid::new(1, 4, 1.0, 2).unwrap();
    assert!(MaterialField::constant(&g, 0.0).is_err());
    let m = MaterialField::from_fn(&g, |x| 1.0 + x[0]).unwrap();
    assert!(m.min() > 1.0 && m.max() < 2.0);
}

proptest! {
    #[test]
    fn inner_product_is_symmetric(seed in 0u64..1000) {
        let g = Grid::new(2, 4, 1.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = SpaceTimeField::from_fn(&g, |_, _, o| o.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)));
        let b = SpaceTimeField::from_fn(&g, |_, _, o| o.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)));
        prop_assert_eq!(g.inner_space_time(&a, &b).unwrap(), g.inner_space_time(&b, &a).unwrap());
    }
}
