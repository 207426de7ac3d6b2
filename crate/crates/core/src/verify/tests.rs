use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::scenarios;

#[test]
fn slope_of_exact_power_law() {
    let x = [1e-1, 1e-2, 1e-3];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
    assert!((log_log_slope(&x, &y).unwrap() - 1.5).abs() <= 1e-12);
    assert_eq!(least_squares_slope(&[1.0], &[2.0]), None);
    assert_eq!(least_squares_slope(&[1.0, 1.0], &[2.0, 3.0]), None);
    // zero and non-finite entries are dropped
    assert_eq!(log_log_slope(&[1.0, 2.0], &[0.0, 1.0]), None);
}

#[test]
fn gronwall_special_cases() {
    let taus = [0.0, 0.1, 0.5, 1.0, 2.0];
    let (a, b, k) = (0.7_f64, 1.3_f64, 0.4_f64);
    assert!((gronwall_envelope(a, b, k, &[0.0]).unwrap()[0] - a).abs() <= 1e-12 * a);
    let no_k = gronwall_envelope(a, b, 0.0, &taus).unwrap();
    for (t, e) in taus.iter().zip(&no_k) {
        let expect = a * (b * t).exp();
        assert!((e - expect).abs() <= 1e-12 * expect);
    }
    let no_a = gronwall_envelope(0.0, b, k, &taus).unwrap();
    for (t, e) in taus.iter().zip(&no_a) {
        let expect = (k / b).powi(2) * ((0.5 * b * t).exp() - 1.0).powi(2);
        assert!((e - expect).abs() <= 1e-12 * expect.max(1e-300));
    }
    let limit = gronwall_envelope(a, 0.0, k, &taus).unwrap();
    let near = gronwall_envelope(a, 1e-9, k, &taus).unwrap();
    for (t, (l, n)) in taus.iter().zip(limit.iter().zip(&near)) {
        assert!((l - (a.sqrt() + 0.5 * k * t).powi(2)).abs() <= 1e-12 * l);
        assert!((l - n).abs() <= 1e-8 * l);
    }
    assert!(gronwall_envelope(-1.0, b, k, &taus).is_err());
    assert!(gronwall_envelope(a, b, k, &[-0.1]).is_err());
}

proptest! {
    #[test]
    fn gronwall_envelope_is_monotone(a in 0.0..5.0_f64, b in 0.0..5.0_f64, k in 0.0..5.0_f64,
                                     da in 0.0..1.0_f64, db in 0.0..1.0_f64, dk in 0.0..1.0_f64) {
        let taus: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
        let base = gronwall_envelope(a, b, k, &taus).unwrap();
        for w in base.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-14));
        }
        for bumped in [
            gronwall_envelope(a + da, b, k, &taus).unwrap(),
            gronwall_envelope(a, b + db, k, &taus).unwrap(),
            gronwall_envelope(a, b, k + dk, &taus).unwrap(),
        ] {
            for (x, y) in base.iter().zip(&bumped) {
                prop_assert!(*y >= x * (1.0 - 1e-14));
            }
        }
    }
}

#[test]
fn energy_norm_of_zero_and_static_fields() {
    let setup = scenarios::quadratic_small(2, 4, 8).unwrap();
    let grid = setup.grid();
    let zero = SpaceTimeField::zeros(grid);
    assert!(energy_norm(grid, &zero, setup.material(), 2.0).unwrap().iter().all(|v| *v == 0.0));

    let u0 = setup.u0().clone();
    let still = SpaceTimeField::constant_in_time(grid, u0.view()).unwrap();
    let jac = grid.jacobian(u0.view()).unwrap();
    let strain: f64 = jac.iter().map(|v| v * v).sum::<f64>() * grid.volume();
    for e in energy_norm(grid, &still, setup.material(), 2.0).unwrap() {
        assert!((e - 2.0 * strain).abs() <= 1e-12 * e);
    }
}

#[test]
fn energy_norm_matches_direct_quadrature() {
    let grid = Grid::new(1, 6, 0.5, 10).unwrap();
    let rho = MaterialField::from_fn(&grid, |x| 1.0 + x[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = SpaceTimeField::from_fn(&grid, |_, _, o| o[0] = rng.random_range(-1.0..1.0));
    let got = energy_norm(&grid, &f, &rho, 0.7).unwrap();
    let (dx, dt, m) = (grid.dx(), grid.dt(), grid.steps());
    let at = |k: usize, i: isize| -> f64 {
        if i < 0 || i >= 6 {
            0.0
        } else {
            f.step(k)[[i as usize, 0]]
        }
    };
    for k in 0..=m {
        let mut kin = 0.0;
        for i in 0..6 {
            let v = if k == 0 {
                (-3.0 * at(0, i) + 4.0 * at(1, i) - at(2, i)) / (2.0 * dt)
            } else if k == m {
                (3.0 * at(m, i) - 4.0 * at(m - 1, i) + at(m - 2, i)) / (2.0 * dt)
            } else {
                (at(k + 1, i) - at(k - 1, i)) / (2.0 * dt)
            };
            kin += (1.0 + (i + 1) as f64 * dx) * v * v;
        }
        let mut strain = 0.0;
        for c in 0..7 {
            let i = c as isize;
            strain += ((at(k, i) - at(k, i - 1)) / dx).powi(2);
        }
        let expect = dx * (kin + 0.7 * strain);
        assert!((got[k] - expect).abs() <= 1e-12 * expect, "step {k}: {} vs {expect}", got[k]);
    }
}

#[test]
fn taylor_slope_on_nonquadratic_problem() {
    let setup = scenarios::nonquadratic_small(1, 12, 24).unwrap();
    let h = [0.5, -0.4, 0.8];
    let r = taylor_order_test(&setup, setup.alpha(), &h, &DEFAULT_TAYLOR_STEPS).unwrap();
    assert!(r.slope.unwrap() >= 1.4, "{r:?}");
    let over: Vec<f64> = r.rows.iter().map(|x| x.over_s.unwrap()).collect();
    for w in over.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert_eq!(r.table().rows.len(), 5);
}

#[test]
fn taylor_marks_failed_rows() {
    let setup = scenarios::nonquadratic_small(1, 8, 16).unwrap();
    let h = [-20.0, 0.0, 0.0];
    let r = taylor_order_test(&setup, setup.alpha(), &h, &[1e-1, 1e-2, 1e-3]).unwrap();
    assert!(r.rows[0].failure.is_some() && r.rows[0].remainder.is_none());
    assert!(r.rows[1].failure.is_none());
    assert!(r.slope.is_some());
    assert_eq!(r.max_relative(), None);
}

#[test]
fn pairing_mismatch_of_zero_inputs() {
    let setup = scenarios::nonquadratic_small(1, 8, 16).unwrap();
    let u = forward_field(&setup, setup.alpha()).unwrap();
    let lin = Linearization::new(&setup, setup.alpha(), &u).unwrap();
    let w = consistency_weight(setup.grid());
    let zero_w = SpaceTimeField::zeros(setup.grid());
    for method in [AdjointMethod::Discrete, AdjointMethod::Continuous] {
        assert_eq!(pairing_mismatch(&lin, &[0.0; 3], &w, method).unwrap(), 0.0);
        assert_eq!(pairing_mismatch(&lin, &[1.0, 2.0, 3.0], &zero_w, method).unwrap(), 0.0);
    }
}

#[test]
fn certificate_is_seeded_and_small() {
    let setup = scenarios::quadratic_small(1, 8, 16).unwrap();
    let a = adjoint_certificate(&setup, setup.alpha(), 5, 3, AdjointMethod::Discrete).unwrap();
    let b = adjoint_certificate(&setup, setup.alpha(), 5, 3, AdjointMethod::Discrete).unwrap();
    assert_eq!(a, b);
    assert!(a.max_mismatch <= 1e-10);
    assert_eq!(a.table().rows.len(), 5);
}

#[test]
fn lipschitz_ratio_is_flat_for_quadratic_energy() {
    let setup = scenarios::stability_setup(false).unwrap();
    let dirs = vec![vec![1.0, -0.5]];
    let r = lipschitz_alpha_test(&setup, setup.alpha(), &dirs, &DEFAULT_LIPSCHITZ_STEPS).unwrap();
    assert_eq!(r.rows.len(), 4);
    assert!(r.spread <= 2.0, "{r:?}");
    assert!(r.rows.iter().all(|x| x.ratio.is_finite() && x.ratio > 0.0));
}

#[test]
fn lipschitz_requires_dimension_condition() {
    // slab weights drop to the floor, so kappa / mu is far below 7/8
    let slabs = scenarios::quadratic_small(1, 8, 16).unwrap();
    let dirs = vec![vec![1.0, 0.0, 0.0]];
    assert!(lipschitz_alpha_test(&slabs, slabs.alpha(), &dirs, &[1e-2]).is_err());
    let setup = scenarios::stability_setup(false).unwrap();
    assert!(lipschitz_alpha_test(&setup, setup.alpha(), &[vec![0.0, 0.0]], &[1e-2]).is_err());
}

#[test]
fn gronwall_consistency_is_finite() {
    let setup = scenarios::stability_setup(true).unwrap();
    let g = gronwall_consistency(&setup, setup.alpha(), &[0.3, -0.2]).unwrap();
    assert!(g.b > 0.0 && g.k > 0.0);
    assert!(g.max_ratio.is_finite());
    assert_eq!(g.table().rows.len(), setup.grid().steps() + 1);
}
