use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pspchain"))
        .args(args)
        .env_remove("PSPCHAIN_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn psp_dist_csv_is_normalized_and_symmetric() {
    let o = run(&["psp-dist", "--n", "3", "--beta", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("twice_theta,theta,probability"));
    let rows: Vec<(i64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 8);
    let total: f64 = rows.iter().map(|r| r.1).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for (k, &(t, p)) in rows.iter().enumerate() {
        let (mt, mp) = rows[rows.len() - 1 - k];
        assert_eq!(t, -mt);
        assert!((p - mp).abs() < 1e-12);
    }
}

#[test]
fn json_output_has_one_array_per_column() {
    let o = run(&["psp-dist", "--n", "1", "--beta", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["twice_theta", "theta", "probability", "log_weight"] {
        assert_eq!(v[key].as_array().unwrap().len(), 4, "{key}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = run(&[
        "variance-sweep",
        "--n-grid",
        "0:2",
        "--beta-grid",
        "1:4:2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,beta,variance,lower_bound,"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

#[test]
fn partition_check_passes() {
    let o = run(&["partition", "--n-grid", "0:4", "--beta", "2", "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn verify_reports_full_coverage() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("coverage: 13/13 required checks ran"));
}

#[test]
fn sample_is_reproducible_for_a_seed() {
    let args = [
        "sample", "--n", "1", "--beta", "1", "--sweeps", "5000", "--seed", "7",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn usage_errors_exit_two_on_one_line() {
    for args in [
        &["psp-dist", "--n", "2"][..],
        &["psp-dist", "--n", "2", "--beta", "-1"],
        &["psp-dist", "--n", "30", "--beta", "1"],
        &["variance-sweep", "--n-grid", "3:1", "--beta", "1"],
        &["psp-dist", "--n", "1", "--beta", "1", "--family", "nope"],
        &["bogus"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{args:?}: {err}");
    }
}

#[test]
fn cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_pspchain"))
        .args(["psp-dist", "--n", "3", "--beta", "1"])
        .env("PSPCHAIN_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["psp-dist", "--n", "3", "--beta", "1", "--cap", "3"]);
    assert_eq!(o.status.code(), Some(0));
}
