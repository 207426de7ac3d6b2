use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::inversion::IterateRecord;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn random_field(grid: &Grid, seed: u64) -> SpaceTimeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpaceTimeField::from_fn(grid, |_, _, o| o.iter_mut().for_each(|v| *v = rng.random_range(-1e3..1e3)))
}

#[test]
fn golden_files_decode_bit_exactly() {
    let grid = Grid::new(1, 2, 0.5, 2).unwrap();
    let f = load_field(fixture("golden_d1_n2_m2.field"), &grid).unwrap();
    let expect: [f64; 6] = [1.5, -2.25, 0.125, 3.0, -0.5, 1e-300];
    let got: Vec<f64> = f.values().iter().copied().collect();
    assert_eq!(got.len(), 6);
    for (g, e) in got.iter().zip(&expect) {
        assert_eq!(g.to_bits(), e.to_bits());
    }
    // re-encoding reproduces the committed bytes
    let bytes = fs::read(fixture("golden_d1_n2_m2.field")).unwrap();
    assert_eq!(encode_field(&f), bytes);

    let (g2, f2) = load_field_any(fixture("golden_d2_n2_m2.field")).unwrap();
    assert_eq!((g2.dim(), g2.n(), g2.steps(), g2.horizon()), (2, 2, 2, 0.25));
    assert_eq!(f2.step(2)[[3, 1]], 23.0 * 0.25 - 1.0);
    assert_eq!(f2.step(0)[[0, 1]], -0.75);
}

#[test]
fn wrong_grid_names_expected_and_actual() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(2, 3, 0.5, 4).unwrap();
    let path = dir.path().join("u.field");
    save_field(&path, &random_field(&grid, 1)).unwrap();
    let other = Grid::new(2, 5, 0.5, 4).unwrap();
    match load_field(&path, &other) {
        Err(Error::DimensionMismatch { what, expected, actual }) => {
            assert_eq!((what.as_str(), expected, actual), ("field header n", 5, 3));
        }
        other => panic!("unexpected {other:?}"),
    }
    let flat = Grid::new(1, 3, 0.5, 4).unwrap();
    assert!(matches!(load_field(&path, &flat), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn bad_magic_and_truncation_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(1, 4, 0.5, 3).unwrap();
    let mut bytes = encode_field(&random_field(&grid, 2));
    let path = dir.path().join("bad.field");

    fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    let e = load_field(&path, &grid).unwrap_err();
    assert!(e.to_string().contains("truncated payload"), "{e}");

    fs::write(&path, &bytes[..40]).unwrap();
    assert!(load_field(&path, &grid).unwrap_err().to_string().contains("truncated header"));

    bytes[0] = b'X';
    fs::write(&path, &bytes).unwrap();
    assert!(load_field(&path, &grid).unwrap_err().to_string().contains("magic"));
    assert_eq!(load_field(&path, &grid).unwrap_err().exit_code(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn field_round_trip_is_bitwise(dim in 1usize..=2, n in 2usize..6, steps in 2usize..6, seed in any::<u64>()) {
        let grid = Grid::new(dim, n, 0.3, steps).unwrap();
        let f = random_field(&grid, seed);
        let (g, back) = decode_field(&encode_field(&f), Path::new("mem")).unwrap();
        prop_assert_eq!(g.shape(), grid.shape());
        for (a, b) in f.values().iter().zip(back.values().iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn node_csv_reads_rows_and_checks_count() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(2, 2, 0.5, 2).unwrap();
    let path = dir.path().join("u0.csv");
    fs::write(&path, "# ux, uy\n0.1, 0.2\n0.3,0.4\n0.5,0.6\n0.7,0.8\n").unwrap();
    let a = read_node_csv(&path, &grid).unwrap();
    assert_eq!(a[[3, 1]], 0.8);
    fs::write(&path, "0.1,0.2\n").unwrap();
    assert!(matches!(read_node_csv(&path, &grid), Err(Error::DimensionMismatch { .. })));
    fs::write(&path, "0.1\n0.3\n0.5\n0.7\n").unwrap();
    assert!(read_node_csv(&path, &grid).is_err());
}

#[test]
fn field_csv_has_one_row_per_node_and_step() {
    let grid = Grid::new(1, 3, 0.5, 2).unwrap();
    let f = SpaceTimeField::from_fn(&grid, |t, x, o| o[0] = t + x[0]);
    let csv = field_to_csv(&grid, &f).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,t,node,x0,u0");
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert_eq!(lines[1], "0,0,0,0.25,0.25");
}

#[test]
fn csv_quotes_awkward_cells() {
    let mut t = Table::new("x", &["a", "b"]);
    t.push(vec!["1".into(), "solve failed, step 3".into()]);
    assert_eq!(table_to_csv(&t), "a,b\n1,\"solve failed, step 3\"\n");
}

#[test]
fn empty_trace_gives_a_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = Report::new("invert", 0).with_trace(IterateTrace::default());
    let files = emit_report(dir.path(), &report, true).unwrap();
    let back: Report = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(back.iterations, 0);
    assert_eq!(back, report);
    assert!(dir.path().join("trace.csv").exists());
    assert!(!dir.path().join("misfit.svg").exists());
}

#[test]
fn report_files_are_deterministic() {
    let trace = IterateTrace {
        step_size: 0.5,
        records: (0..4)
            .map(|i| IterateRecord {
                iteration: i,
                alpha: vec![1.0 / (i + 1) as f64],
                residual_norm: 0.1 / (i + 1) as f64,
                misfit: 0.005 / ((i + 1) * (i + 1)) as f64,
                gradient_norm: 1.0,
                admissible: true,
                violations: vec![],
            })
            .collect(),
    };
    let mut taylor = Table::new("taylor", &["s", "remainder"]);
    taylor.push(vec!["1e-1".into(), "3e-3".into()]);
    taylor.push(vec!["1e-2".into(), "3e-5".into()]);
    let mut report = Report::new("verify", 7).with_trace(trace);
    report.tables.push(taylor);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = emit_report(a.path(), &report, true).unwrap();
    let fb = emit_report(b.path(), &report, true).unwrap();
    assert_eq!(fa.len(), 5);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
    let svg = fs::read_to_string(a.path().join("taylor.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
}
