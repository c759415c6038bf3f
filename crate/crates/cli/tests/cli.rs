use std::fs;
use std::path::{Path, PathBuf};

use assocmem_cli::{run, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(out: &Path, args: &[&str]) -> Outcome {
    let mut full = vec!["assocmem".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--out".into());
    full.push(out.display().to_string());
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = run(full, &mut so, &mut se);
    Outcome {
        code,
        stdout: String::from_utf8(so).unwrap(),
        stderr: String::from_utf8(se).unwrap(),
    }
}

fn csv_rows(path: PathBuf) -> Vec<Vec<String>> {
    fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn landscape_resolution_two_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let patterns = fixture("patterns_2d.csv");
    let o = cli(
        dir.path(),
        &["landscape", "--set", &format!("patterns={patterns}"), "--set", "panels=mchn", "--set", "resolution=2"],
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let text = fs::read_to_string(dir.path().join("landscape_mchn_beta1.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,energy"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn landscape_distance_minima_sit_on_the_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["landscape", "--config", &fixture("landscape_2d.conf")]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    for panel in ["lse", "regularizer", "mchn", "distance"] {
        assert!(dir.path().join(format!("landscape_{panel}_beta1.csv")).exists());
    }
    // Grid spacing per axis over [-3.5, 3] x [-2.5, 3] at 200 points.
    let cell = [6.5 / 199.0, 5.5 / 199.0];
    let minima: Vec<[f64; 2]> = csv_rows(dir.path().join("landscape_minima.csv"))
        .into_iter()
        .filter(|r| r[0] == "distance" && r[2] == "local")
        .map(|r| [r[3].parse().unwrap(), r[4].parse().unwrap()])
        .collect();
    assert_eq!(minima.len(), 3);
    for p in [[-2.0, -0.5], [0.2, -0.3], [1.5, 1.5]] {
        assert!(
            minima.iter().any(|m| (m[0] - p[0]).abs() <= cell[0] && (m[1] - p[1]).abs() <= cell[1]),
            "no minimum within one cell of {p:?}: {minima:?}"
        );
    }
}

#[test]
fn landscape_one_dimensional_minimum_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["landscape", "--config", &fixture("landscape_1d.conf")]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let rows = csv_rows(dir.path().join("landscape_minima.csv"));
    let count = |panel: &str, beta: &str| rows.iter().filter(|r| r[0] == panel && r[1] == beta && r[2] == "local").count();
    assert_eq!(count("mchn", "1"), 1);
    assert_eq!(count("mchn", "2"), 2);
    assert_eq!(count("distance", "1"), 2);
    assert_eq!(count("distance", "2"), 2);
}

#[test]
fn landscape_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["landscape", "--set", "patterns=/nonexistent/file.csv"]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("cannot open"), "{}", o.stderr);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n3\n").unwrap();
    let o = cli(dir.path(), &["landscape", "--set", &format!("patterns={}", bad.display())]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);

    let three = dir.path().join("three.csv");
    fs::write(&three, "1,2,3\n4,5,6\n").unwrap();
    let o = cli(dir.path(), &["landscape", "--set", &format!("patterns={}", three.display())]);
    assert_eq!(o.code, EXIT_INPUT);

    let o = cli(dir.path(), &["landscape"]);
    assert_eq!(o.code, EXIT_INPUT);
}

#[test]
fn radius_reports_reference_and_fraction_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["radius", "--seed", "3", "--set", "synthetic_count=80"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("15.4861"), "{}", o.stdout);
    for pct in [25, 50, 75, 100] {
        assert!(dir.path().join(format!("radius_hist_{pct}.csv")).exists());
    }
    let summary = csv_rows(dir.path().join("radius_summary.csv"));
    assert_eq!(summary.len(), 4);
    let counts: Vec<usize> = summary.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(counts, [20, 40, 60, 80]);
    let reference: f64 = summary[0][4].parse().unwrap();
    assert!((reference - 15.5).abs() < 0.05);
}

#[test]
fn radius_identical_vectors_give_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("acts.csv");
    fs::write(&input, "1,2\n1,2\n5,5\n").unwrap();
    let o = cli(
        dir.path(),
        &["radius", "--set", &format!("input={}", input.display()), "--set", "fractions=1"],
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let summary = csv_rows(dir.path().join("radius_summary.csv"));
    let median: f64 = summary[0][3].parse().unwrap();
    assert_eq!(median, 0.0);
    let hist = csv_rows(dir.path().join("radius_hist_100.csv"));
    assert_eq!(hist[0][2], "2");
}

#[test]
fn radius_needs_two_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.csv");
    fs::write(&input, "1,2\n").unwrap();
    let o = cli(dir.path(), &["radius", "--set", &format!("input={}", input.display())]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("at least 2"), "{}", o.stderr);
}

#[test]
fn verify_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["verify"]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    let rows = csv_rows(dir.path().join("verify_summary.csv"));
    assert!(rows.iter().all(|r| r[4] != "FAIL"));
    assert!(rows.iter().any(|r| r[0].starts_with("bound printed")));
}

#[test]
fn verify_mutation_breaks_the_mchn_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["verify", "--set", "mutation=drop-quadratic"]);
    assert_eq!(o.code, EXIT_VIOLATION);
    let rows = csv_rows(dir.path().join("verify_summary.csv"));
    let status = |prefix: &str| rows.iter().find(|r| r[0].starts_with(prefix)).unwrap()[4].clone();
    assert_eq!(status("bound g"), "PASS");
    assert_eq!(status("bound |E"), "FAIL");
}

#[test]
fn verify_single_pattern_bounds_saturate() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["verify", "--set", "max_d=1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    for row in csv_rows(dir.path().join("verify_summary.csv")).iter().filter(|r| r[0].starts_with("bound")) {
        let max: f64 = row[3].parse().unwrap();
        assert!(max.abs() <= 1e-9, "{row:?}");
    }
}

#[test]
fn capacity_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(
        dir.path(),
        &["capacity", "--set", "n=40", "--set", "counts=2:10:4", "--set", "trials=5"],
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let rows = csv_rows(dir.path().join("capacity_classical.csv"));
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["2", "6", "10"]);
    assert!(o.stdout.contains("d*"));

    let o = cli(dir.path(), &["capacity", "--set", "spec=quantum"]);
    assert_eq!(o.code, EXIT_INPUT);
    let o = cli(dir.path(), &["capacity", "--set", "counts=10:2"]);
    assert_eq!(o.code, EXIT_INPUT);
}

#[test]
fn partition_critical_radius_is_within_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["partition", "--config", &fixture("partition.conf")]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let row = &csv_rows(dir.path().join("partition.csv"))[0];
    let f = |i: usize| row[i].parse::<f64>().unwrap();
    assert!((f(2) - 7.74).abs() < 0.01);
    assert!(f(5) <= f(3) && f(3) <= f(6));
    assert!(f(8) >= 1.0);
}

#[test]
fn partition_unit_radius_gives_unit_loss() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(
        dir.path(),
        &["partition", "--set", "n=4", "--set", "d=3", "--set", "radius=unit", "--set", "grid_dims=1,2", "--set", "grid_radii=1", "--set", "grid_samples=2000"],
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let row = &csv_rows(dir.path().join("partition.csv"))[0];
    let z: f64 = row[3].parse().unwrap();
    let loss: f64 = row[8].parse().unwrap();
    assert!((z - 1.0).abs() < 1e-9);
    assert!((loss - 1.0).abs() < 1e-9);
    assert_eq!(csv_rows(dir.path().join("partition_diagnostics.csv")).len(), 2);
}

#[test]
fn scaling_reproduces_table_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["scaling", "--config", &fixture("scaling_grid.conf")]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let ratios: Vec<f64> = csv_rows(dir.path().join("scaling.csv")).iter().map(|r| r[2].parse().unwrap()).collect();
    for (got, want) in ratios.iter().zip([8.71e-10, 8.79e-10, 8.38e-10]) {
        assert!((got - want).abs() <= 0.005e-10, "{got} vs {want}");
    }
    let params = &csv_rows(dir.path().join("scaling_params.csv"))[0];
    assert_eq!(&params[..3], ["75497472", "25214976", "151093248"]);

    let o = cli(dir.path(), &["scaling", "--set", "model_sizes=1e6", "--set", "data_sizes=1e6,2e6"]);
    assert_eq!(o.code, EXIT_INPUT);
}

#[test]
fn dstar_selects_the_constructed_size() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["dstar", "--config", &fixture("dstar.conf")]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let rows = csv_rows(dir.path().join("dstar.csv"));
    let selected: Vec<&str> = rows.iter().filter(|r| r[3] == "true").map(|r| r[1].as_str()).collect();
    assert_eq!(selected.len(), 1);
    assert_eq!(selected[0].parse::<f64>().unwrap(), 3e8);
    let mses: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    for (got, want) in mses.iter().zip([0.09, 0.0625, 0.0225, 0.01]) {
        assert!((got - want).abs() < 1e-9);
    }

    let o = cli(dir.path(), &["dstar", "--config", &fixture("dstar.conf"), "--set", "threshold=0.02"]);
    assert!(o.stdout.contains("D* = 4.000000e8"), "{}", o.stdout);
    let o = cli(
        dir.path(),
        &["dstar", "--config", &fixture("dstar.conf"), "--set", "threshold=0.005", "--set", "comparison=strict"],
    );
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("no curve qualifies"), "{}", o.stdout);
}

#[test]
fn precedence_is_flag_then_config_then_default() {
    let dir = tempfile::tempdir().unwrap();
    let rows = |o: &Outcome| {
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        fs::read_to_string(dir.path().join("landscape_distance_beta1.csv")).unwrap().lines().count() - 1
    };
    let patterns = fixture("patterns_1d.csv");
    let default = cli(
        dir.path(),
        &["landscape", "--set", &format!("patterns={patterns}"), "--set", "panels=distance"],
    );
    assert_eq!(rows(&default), 200);
    let config = cli(dir.path(), &["landscape", "--config", &fixture("precedence.conf")]);
    assert_eq!(rows(&config), 5);
    let flag = cli(dir.path(), &["landscape", "--config", &fixture("precedence.conf"), "--set", "resolution=7"]);
    assert_eq!(rows(&flag), 7);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(dir.path(), &["verify", "--set", "instnces=5"]).code, EXIT_INPUT);
    assert_eq!(cli(dir.path(), &["verify", "--set", "instances=many"]).code, EXIT_INPUT);
    assert_eq!(cli(dir.path(), &["verify", "--set", "novalue"]).code, EXIT_INPUT);
    assert_eq!(cli(dir.path(), &["verify", "--seed", "-1"]).code, EXIT_INPUT);
    assert_eq!(cli(dir.path(), &["teleport"]).code, EXIT_INPUT);
    assert_eq!(cli(dir.path(), &["verify", "--config", "/nonexistent.conf"]).code, EXIT_INPUT);

    let conf = dir.path().join("broken.conf");
    fs::write(&conf, "instances = 5\nthis line is broken\n").unwrap();
    let o = cli(dir.path(), &["verify", "--config", &conf.display().to_string()]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);

    let conf = dir.path().join("unused.conf");
    fs::write(&conf, "instances = 5\nwindow = 3\n").unwrap();
    let o = cli(dir.path(), &["verify", "--config", &conf.display().to_string()]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("window"), "{}", o.stderr);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(dir.path(), &["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("landscape"));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn commands_are_deterministic_in_process() {
    let cases: Vec<Vec<String>> = vec![
        vec!["landscape".into(), "--config".into(), fixture("landscape_1d.conf")],
        vec!["radius".into(), "--set".into(), "synthetic_count=40".into(), "--set".into(), "synthetic_dim=16".into()],
        vec!["verify".into(), "--set".into(), "instances=50".into()],
        vec!["capacity".into(), "--set".into(), "n=30".into(), "--set".into(), "counts=2,4".into(), "--set".into(), "trials=4".into()],
        vec!["partition".into(), "--set".into(), "n=3".into(), "--set".into(), "d=2".into(), "--set".into(), "radius=1".into(), "--set".into(), "mc_samples=5000".into()],
        vec!["scaling".into()],
        vec!["dstar".into(), "--config".into(), fixture("dstar.conf")],
    ];
    for case in cases {
        let args: Vec<&str> = case.iter().map(String::as_str).collect();
        let runs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let o = cli(dir.path(), &[&args[..], &["--seed", "11"]].concat());
                assert_eq!(o.code, EXIT_OK, "{args:?}: {}", o.stderr);
                snapshot(dir.path())
            })
            .collect();
        assert!(!runs[0].is_empty());
        assert_eq!(runs[0], runs[1], "{args:?}");
    }
}
