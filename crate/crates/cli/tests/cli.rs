use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yangkit")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

#[test]
fn verify_whole_catalog() {
    let o = run(&["verify", "--model", "all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn unattainable_tolerance_reports_floor() {
    let o = run(&["verify", "--model", "9", "--tol", "1e-15"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("FAIL model 9"), "{err}");
    assert!(err.contains("numeric floor"), "{err}");
}

#[test]
fn usage_errors() {
    for args in [
        &["verify", "--model", "99"][..],
        &["spectrum", "--model", "1", "--length", "0"],
        &["spectrum", "--model", "19", "--length", "3"],
        &["verify", "--format", "csv"],
        &["verify", "--model", "9", "--param", "rho"],
        &["verify", "--model", "9", "--param", "kappa=1"],
        &["verify", "--model", "1", "--branch", "b=1"],
        &["classify", "--ansatz", "xxz"],
        &["spectrum", "--model", "9", "--length", "3", "--sector", "7"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 64, "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn stored_table_check() {
    let o = run(&["spectrum", "--model", "9", "--length", "3", "--golden"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines = stdout(&o);
    assert!(lines.starts_with("model,L,p,re,im,mult\n"));
    let total: usize = lines.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 64);

    let o = run(&["spectrum", "--model", "9", "--length", "3", "--golden", "--param", "rho=1.5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("MISMATCH"));

    let o = run(&["spectrum", "--model", "11", "--length", "3", "--golden"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn model10_two_excitations_at_five_sites() {
    let o = run(&["spectrum", "--model", "10", "--length", "5", "--sector", "2", "--golden"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s5 = 5f64.sqrt();
    let mut want = vec![
        (0.75, 20),
        (2.25, 15),
        (3.75, 5),
        (4.25, 1),
        ((27.0 - 2.0 * s5) / 4.0, 2),
        ((27.0 + 2.0 * s5) / 4.0, 2),
    ];
    let mut got: Vec<(f64, usize)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(&f[..3], &["10", "5", "2"]);
            assert_eq!(f[4], "0");
            (f[3].parse().unwrap(), f[5].parse().unwrap())
        })
        .collect();
    got.sort_by(|a, b| a.0.total_cmp(&b.0));
    want.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(got.len(), want.len());
    for ((g, gm), (w, wm)) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        assert_eq!(gm, wm);
    }
}

#[test]
fn length_guard() {
    let o = run(&["spectrum", "--model", "9", "--length", "7"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("limit"));
}

#[test]
fn charges_norm() {
    let o = run(&["--format", "json", "charges", "--model", "9", "--length", "6"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["command"], "charges");
    let rows = v["body"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0]["norm"].as_f64().unwrap() < 1e-10);
}

#[test]
fn classify_hsu2_rows() {
    let o = run(&["classify", "--ansatz", "su2xsu2", "--check-table1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["body"]["max_degree"], 3);
    assert_eq!(v["body"]["system"]["variables"].as_array().unwrap().len(), 10);
    let rows = v["body"]["substitution"].as_array().unwrap();
    let mut models: Vec<&str> = rows.iter().map(|r| r["label"].as_str().unwrap().split(' ').nth(1).unwrap()).collect();
    models.dedup();
    assert_eq!(models.len(), 12);
    assert!(rows.iter().all(|r| r["residual"].as_f64().unwrap() < 1e-9));
}

#[test]
fn bethe_two_model8() {
    let o = run(&["--format", "json", "bethe2", "--model", "8", "--length", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(v["body"]["report"]["distance"].as_f64().unwrap() < 1e-8);
    let counts: Vec<u64> = v["body"]["report"]["cases"].as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, vec![8, 8, 12]);
    assert_eq!(code(&run(&["bethe2", "--model", "3", "--length", "4"])), 3);
}

#[test]
fn reruns_differ_only_in_timestamp() {
    for args in [
        &["--format", "json", "--seed", "11", "verify", "--model", "12"][..],
        &["--format", "json", "spectrum", "--model", "8", "--length", "4"],
        &["--format", "json", "--seed", "5", "charges", "--model", "15", "--length", "4", "--draws", "2"],
    ] {
        let mut a = json(&run(args));
        let mut b = json(&run(args));
        assert_eq!(a["schema"], "yangkit-report/1");
        for v in [&mut a, &mut b] {
            v.as_object_mut().unwrap().remove("generated_at");
        }
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn seed_changes_draws() {
    let draw = |seed: &str| {
        let v = json(&run(&["--format", "json", "--seed", seed, "charges", "--model", "9", "--length", "4", "--draws", "1"]));
        v["body"]["rows"][1]["spec"].clone()
    };
    assert_eq!(draw("1"), draw("1"));
    assert_ne!(draw("1"), draw("2"));
}

#[test]
fn report_to_file() {
    let path = std::env::temp_dir().join(format!("yangkit-cli-{}.json", std::process::id()));
    let o = run(&["--format", "json", "--out", path.to_str().unwrap(), "spectrum", "--model", "9", "--length", "3", "--sector", "1"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let _ = std::fs::remove_file(&path);
    assert_eq!(v["body"]["sectors"][0]["p"], 1);
    assert_eq!(v["body"]["sectors"][0]["dimension"], 6);
}
