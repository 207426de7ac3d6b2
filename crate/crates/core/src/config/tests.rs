use proptest::prelude::*;

use super::*;
use crate::forward::solve_forward;

const MINIMAL: &str = r#"
[grid]
dim = 1
n = 8
steps = 32
horizon = 0.5

[dictionary]
preset = "quadratic_slabs"

[coefficients]
alpha = [1.0, 1.5, 0.8]
"#;

fn issue_paths(e: Error) -> Vec<String> {
    match e {
        Error::Config(list) => list.into_iter().map(|i| i.path).collect(),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn minimal_config_gets_defaults() {
    let c = parse_config(MINIMAL, Path::new(".")).unwrap();
    assert_eq!(c.seed, 0);
    assert_eq!(c.material, DensityConfig::Constant { value: 1.0 });
    assert_eq!(c.solver.cfl_safety, CFL_SAFETY);
    assert_eq!(c.verify.trials, 20);
    assert_eq!(c.verify.taylor_steps, DEFAULT_TAYLOR_STEPS.to_vec());
    assert_eq!(c.initial, InitialConfig::default());
    assert_eq!(c.force, ForceConfig::Zero);
    assert!(c.output.plots);
    assert_eq!(c.alpha0(), vec![1.0, 1.5, 0.8]);
    assert_eq!(c.verify.direction_or_default(3), vec![0.5, -0.6, 0.7]);
    let setup = c.build_setup().unwrap();
    assert_eq!(setup.grid().nodes(), 8);
    assert_eq!(setup.dictionary().len(), 3);
}

#[test]
fn explicit_entries_and_presets_build() {
    let text = r#"
seed = 4
[grid]
dim = 2
n = 4
steps = 16
horizon = 0.2
[material]
kind = "linear"
base = 1.0
slope = 0.5
[[dictionary.entries]]
energy = { family = "quadratic", a = 1.0, b = 0.5, c = 0.2 }
[[dictionary.entries]]
energy = { family = "saturating", a = 1.0, b = 0.0, c = 0.0, eps = 0.5 }
weight = { kind = "bump", lower = [0.0, 0.0], upper = [0.5, 1.0], ramp = 0.1, floor = 0.05 }
[coefficients]
alpha = [1.0, 0.5]
[initial]
displacement = { preset = "standing_wave", amplitude = 0.1 }
velocity = { preset = "scaled_displacement", factor = -0.5 }
[force]
preset = "pulse"
amplitude = 2.0
centre = 0.3
"#;
    let c = match parse_config(text, Path::new(".")) {
        Ok(c) => c,
        Err(e) => panic!("{e}"),
    };
    let setup = c.build_setup().unwrap();
    assert_eq!(setup.dictionary().len(), 2);
    assert!(!setup.dictionary().is_quadratic());
    assert!((setup.u1()[[0, 0]] + 0.5 * setup.u0()[[0, 0]]).abs() <= 1e-15);
    assert!(setup.u0().column(1).iter().all(|v| *v == 0.0));
    assert!(setup.force().max_abs() > 0.0);
    assert!(setup.material().max() > setup.material().min());
}

#[test]
fn cfl_violation_loads_but_the_solver_refuses() {
    let text = MINIMAL.replace("steps = 32", "steps = 2");
    let c = parse_config(&text, Path::new(".")).unwrap();
    let setup = c.build_setup().unwrap();
    let e = solve_forward(&setup).unwrap_err();
    assert_eq!(e.exit_code(), 3, "{e}");
}

#[test]
fn every_issue_is_reported_with_its_location() {
    let text = r#"
colour = "blue"
[grid]
dim = 4
n = 1
steps = 32
horizon = -1.0
[dictionary]
preset = "quadratic_slabs"
[coefficients]
alpha = [1.0, -2.0]
[solver]
cfl_safety = 0.0
[verify]
trials = 0
"#;
    let paths = issue_paths(parse_config(text, Path::new(".")).unwrap_err());
    for expect in [
        "colour",
        "grid.dim",
        "grid.n",
        "grid.horizon",
        "coefficients.alpha",
        "coefficients.alpha[1]",
        "solver.cfl_safety",
        "verify.trials",
    ] {
        assert!(paths.iter().any(|p| p == expect), "{expect} missing from {paths:?}");
    }
}

#[test]
fn type_errors_name_the_section_and_entry() {
    let text = r#"
[grid]
dim = 1
n = "eight"
steps = 32
horizon = 0.5
[[dictionary.entries]]
energy = { family = "quadratic", a = 1.0, b = 0.0, c = 0.0 }
[[dictionary.entries]]
energy = { family = "cubic", a = 1.0 }
[coefficients]
alpha = [1.0, 1.0]
[inversion]
max_iterations = -3
"#;
    let paths = issue_paths(parse_config(text, Path::new(".")).unwrap_err());
    assert!(paths.contains(&"grid".to_string()), "{paths:?}");
    assert!(paths.contains(&"dictionary.entries[1]".to_string()), "{paths:?}");
    assert!(paths.contains(&"inversion".to_string()), "{paths:?}");
    let e = parse_config("[grid", Path::new(".")).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn missing_files_and_sections_are_reported() {
    let text = r#"
[grid]
dim = 1
n = 8
steps = 32
horizon = 0.5
[dictionary]
preset = "stability"
entries = [{ energy = { family = "quadratic", a = 1.0, b = 0.0, c = 0.0 } }]
[coefficients]
alpha = [1.0, 1.0]
[initial]
displacement = { preset = "file", path = "nowhere.csv" }
velocity = { preset = "scaled_displacement", factor = 1.0 }
[force]
preset = "file"
path = "nowhere.field"
"#;
    let dir = tempfile::tempdir().unwrap();
    let paths = issue_paths(parse_config(text, dir.path()).unwrap_err());
    for expect in ["dictionary", "initial.displacement.path", "force.path"] {
        assert!(paths.iter().any(|p| p == expect), "{expect} missing from {paths:?}");
    }
    let paths = issue_paths(parse_config("seed = 1\n", dir.path()).unwrap_err());
    assert_eq!(paths, vec!["grid", "dictionary", "coefficients"]);
}

#[test]
fn file_inputs_resolve_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("u0.csv"), (1..=8).map(|i| format!("{}\n", 0.01 * i as f64)).collect::<String>()).unwrap();
    let base = parse_config(MINIMAL, dir.path()).unwrap();
    let grid = base.build_grid().unwrap();
    let f = scenarios::pulse_force(&grid, 1.0, 0.5);
    crate::io::save_field(dir.path().join("f.field"), &f).unwrap();
    let text = format!(
        "{MINIMAL}\n[initial]\ndisplacement = {{ preset = \"file\", path = \"u0.csv\" }}\n[force]\npreset = \"file\"\npath = \"f.field\"\n"
    );
    let path = dir.path().join("exp.toml");
    fs::write(&path, text).unwrap();
    let setup = load_config(&path).unwrap().build_setup().unwrap();
    assert_eq!(setup.u0()[[7, 0]], 0.08);
    assert_eq!(setup.force().values(), f.values());
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    (
        0..=i64::MAX as u64,
        1usize..=2,
        2usize..10,
        2usize..100,
        0.1..2.0_f64,
        prop::collection::vec(0.1..3.0_f64, 3),
        prop::option::of(prop::collection::vec(0.1..3.0_f64, 3)),
        0.1..0.9_f64,
        any::<bool>(),
        1usize..50,
    )
        .prop_map(|(seed, dim, n, steps, horizon, alpha, alpha0, cfl, plots, trials)| {
            let mut c = parse_config(MINIMAL, Path::new("")).unwrap();
            c.seed = seed;
            c.grid = GridConfig { dim, n, steps, horizon };
            c.coefficients.alpha = alpha;
            c.coefficients.alpha0 = alpha0;
            c.solver.cfl_safety = cfl;
            c.output.plots = plots;
            c.verify.trials = trials;
            c.force = ForceConfig::Pulse { amplitude: 3.0, centre: 0.25 };
            c.initial.velocity = NodeData::ScaledDisplacement { factor: 0.5 };
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn config_round_trips_through_toml(c in arb_config()) {
        let text = config_to_string(&c).unwrap();
        let back = parse_config(&text, Path::new("")).unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn oversized_seed_is_refused_on_save() {
    let mut c = parse_config(MINIMAL, Path::new("")).unwrap();
    c.seed = u64::MAX;
    assert!(config_to_string(&c).is_err());
}
