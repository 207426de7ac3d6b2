use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::forward::{forward_field, solve_forward};
use crate::scenarios;

fn random_field(grid: &Grid, seed: u64) -> SpaceTimeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpaceTimeField::from_fn(grid, |_, _, o| o.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)))
}

#[test]
fn quadratic_coefficients_are_constant_in_time() {
    let setup = scenarios::quadratic_small(2, 5, 12).unwrap();
    let (u, _) = solve_forward(&setup).unwrap();
    let a = build_linearization(&setup, setup.alpha(), &u).unwrap();
    for k in 1..=12 {
        assert_eq!(a.level(k), a.level(0));
    }
    let zero = build_linearization(&setup, &[0.0, 0.0, 0.0], &u).unwrap();
    assert!(zero.tensors().iter().all(|v| *v == 0.0));
}

#[test]
fn coefficients_match_pointwise_summation() {
    let setup = scenarios::nonquadratic_small(2, 4, 10).unwrap();
    let (u, _) = solve_forward(&setup).unwrap();
    let alpha = setup.alpha().to_vec();
    let a = build_linearization(&setup, &alpha, &u).unwrap();
    let grid = setup.grid();
    for k in [0, 4, 10] {
        let jac = grid.jacobian(u.step(k)).unwrap();
        for c in 0..grid.cells() {
            let x = grid.cell_center(c);
            let y = jac.row(c).to_vec();
            let mut expect = vec![0.0; 16];
            for (kk, e) in setup.dictionary().entries().iter().enumerate() {
                let h = e.eval_hessian(&x[..2], &y).unwrap();
                expect.iter_mut().zip(&h).for_each(|(s, v)| *s += alpha[kk] * v);
            }
            let got = a.tensors().slice(ndarray::s![k, c, ..]);
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() <= 1e-13 * e.abs().max(1.0));
            }
        }
    }
    assert!(a.symmetry_defect() <= 1e-12);
}

#[test]
fn coefficients_are_coercive_and_bounded() {
    let setup = scenarios::nonquadratic_small(2, 5, 12).unwrap();
    let (u, _) = solve_forward(&setup).unwrap();
    let lin = Linearization::new(&setup, setup.alpha(), &u).unwrap();
    let ((kappa, mu), (lo, hi)) = coercivity_summary(&lin, 2000, 3).unwrap();
    assert!(kappa <= lo * (1.0 + 1e-12), "{kappa} vs {lo}");
    assert!(hi <= mu * (1.0 + 1e-12), "{hi} vs {mu}");
}

#[test]
fn right_side_vanishes_and_is_linear() {
    let setup = scenarios::nonquadratic_small(1, 8, 16).unwrap();
    let (u, _) = solve_forward(&setup).unwrap();
    let zero_h = build_rhs(&setup, &[0.0; 3], &u).unwrap();
    assert!(zero_h.values().iter().all(|v| *v == 0.0));
    let zero_u = build_rhs(&setup, &[1.0, -2.0, 0.5], &SpaceTimeField::zeros(setup.grid())).unwrap();
    assert!(zero_u.values().iter().all(|v| *v == 0.0));
    let h = [0.3, -1.2, 0.7];
    let base = build_rhs(&setup, &h, &u).unwrap();
    let scaled = build_rhs(&setup, &h.map(|v| 2.5 * v), &u).unwrap();
    let diff = scaled.sub(&base.scaled(2.5)).unwrap().max_abs();
    assert!(diff <= 1e-12 * scaled.max_abs());
}

#[test]
fn derivative_is_linear_in_direction() {
    let setup = scenarios::nonquadratic_small(1, 8, 16).unwrap();
    let (u, _) = solve_forward(&setup).unwrap();
    let lin = Linearization::new(&setup, setup.alpha(), &u).unwrap();
    assert!(lin.apply(&[0.0; 3]).unwrap().values().iter().all(|v| *v == 0.0));
    let h = [0.4, -0.9, 1.1];
    let g = [-0.2, 0.5, 0.3];
    let vh = lin.apply(&h).unwrap();
    let v2 = lin.apply(&h.map(|x| 2.0 * x)).unwrap();
    assert!(v2.sub(&vh.scaled(2.0)).unwrap().max_abs() <= 1e-10 * v2.max_abs());
    let vg = lin.apply(&g).unwrap();
    let sum: Vec<f64> = h.iter().zip(&g).map(|(a, b)| a + b).collect();
    let vs = lin.apply(&sum).unwrap();
    let mut expect = vh.clone();
    expect.axpy(1.0, &vg).unwrap();
    assert!(vs.sub(&expect).unwrap().max_abs() <= 1e-10 * vs.max_abs());
}

#[test]
fn derivative_matches_difference_quotients() {
    let setup = scenarios::nonquadratic_small(1, 16, 32).unwrap();
    let alpha = setup.alpha().to_vec();
    let u = forward_field(&setup, &alpha).unwrap();
    let h = [0.5, -0.4, 0.8];
    let v = solve_frechet(&setup, &alpha, &h, &u).unwrap();
    let grid = setup.grid();
    let errs: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&s| {
            let shifted: Vec<f64> = alpha.iter().zip(&h).map(|(a, b)| a + s * b).collect();
            let us = forward_field(&setup, &shifted).unwrap();
            let q = us.sub(&u).unwrap().scaled(1.0 / s);
            norm_l2_v(grid, &q.sub(&v).unwrap()).unwrap()
        })
        .collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log10() >= 1.0 - 0.1, "{errs:?}");
    }
}

#[test]
fn v_norm_matches_direct_quadrature() {
    let grid = Grid::new(1, 6, 0.5, 8).unwrap();
    let a = random_field(&grid, 1);
    let dx = grid.dx();
    let tau = grid.time_weights();
    let mut expect = 0.0;
    for (k, t) in tau.iter().enumerate() {
        let vals: Vec<f64> = a.step(k).column(0).to_vec();
        let mut padded = vec![0.0];
        padded.extend(&vals);
        padded.push(0.0);
        let l2: f64 = vals.iter().map(|v| v * v).sum::<f64>() * dx;
        let grad: f64 = padded.windows(2).map(|w| ((w[1] - w[0]) / dx).powi(2)).sum::<f64>() * dx;
        expect += t * (l2 + grad);
    }
    let got = norm_l2_v(&grid, &a).unwrap();
    assert!((got - expect.sqrt()).abs() <= 1e-12 * got);
}

#[test]
fn riesz_weight_represents_v_product() {
    let grid = Grid::new(2, 4, 0.5, 6).unwrap();
    let a = random_field(&grid, 2);
    let r = random_field(&grid, 3);
    let lhs = inner_l2_v(&grid, &a, &r).unwrap();
    let rhs = grid.inner_space_time(&a, &riesz_weight(&grid, &r).unwrap()).unwrap();
    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
}

#[test]
fn continuity_ratio_is_scale_free_and_finite() {
    let setup = scenarios::nonquadratic_small(1, 8, 16).unwrap();
    let (u, _) = solve_forward(&setup).unwrap();
    let lin = Linearization::new(&setup, setup.alpha(), &u).unwrap();
    let h = vec![0.3, -0.7, 0.2];
    let r = continuity_bound_check(&lin, &[h.clone(), h.iter().map(|v| 10.0 * v).collect()]).unwrap();
    assert!((r.ratios[0] - r.ratios[1]).abs() <= 1e-10 * r.ratios[0]);
    let many = continuity_bound_check(&lin, &random_directions(3, 100, 9)).unwrap();
    assert!(many.l1.is_finite() && many.l1 > 0.0);
    assert_eq!(many.ratios.len(), 100);
}
