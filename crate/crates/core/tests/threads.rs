use hyperwave::adjoint::AdjointMethod;
use hyperwave::forward::forward_field;
use hyperwave::inversion::misfit_and_gradient;
use hyperwave::scenarios::{self, TWIN_START};
use hyperwave::sensitivity::{continuity_bound_check, random_directions, Linearization};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

// parallel sections are maps with sequential reductions, so the worker
// count may not change a single bit; the documented allowance is 1e-13
#[test]
fn gradients_do_not_depend_on_worker_count() {
    let setup = scenarios::twin_setup().unwrap();
    let data = forward_field(&setup, setup.alpha()).unwrap();
    for method in [AdjointMethod::Discrete, AdjointMethod::Continuous] {
        let one = pool(1).install(|| misfit_and_gradient(&setup, &TWIN_START, &data, method).unwrap());
        let many = pool(4).install(|| misfit_and_gradient(&setup, &TWIN_START, &data, method).unwrap());
        assert_eq!(one.misfit.to_bits(), many.misfit.to_bits());
        for (a, b) in one.gradient.iter().zip(&many.gradient) {
            assert!((a - b).abs() <= 1e-13 * a.abs(), "{a} vs {b}");
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn continuity_ratios_do_not_depend_on_worker_count() {
    let setup = scenarios::stability_setup(true).unwrap();
    let u = forward_field(&setup, setup.alpha()).unwrap();
    let lin = Linearization::new(&setup, setup.alpha(), &u).unwrap();
    let dirs = random_directions(setup.dictionary().len(), 6, 11);
    let one = pool(1).install(|| continuity_bound_check(&lin, &dirs).unwrap());
    let many = pool(3).install(|| continuity_bound_check(&lin, &dirs).unwrap());
    assert_eq!(one, many);
}
