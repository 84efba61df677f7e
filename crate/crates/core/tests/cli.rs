use std::process::{Command, Output};

fn pluripot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pluripot")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn dims_simplex() {
    let o = pluripot(&["dims", "--body", "simplex(2)", "--n-max", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("2,6,8,")), "{text}");
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn invalid_body_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("body.json");
    std::fs::write(&path, r#"{"dim":2,"vertices":"nope"}"#).unwrap();
    let o = pluripot(&["dims", "--body", path.to_str().unwrap(), "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("pluripot: geometry/"), "{err}");
    let o = pluripot(&["dims", "--body", "simplex(9)", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pluripot(&["fekete", "--body", "simplex(2)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_gram_exits_3() {
    let o = pluripot(&["gram", "--body", "interval(0,1)", "--grid", "circle(3)", "--n", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"body":"interval(0,1)","grid":{"kind":"circle","n":64},"n":3}"#).unwrap();
    let o = pluripot(&["gram", "--config", cfg.to_str().unwrap(), "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["d_n"], 6);
    assert!(v["logdet"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn energy_and_bvr() {
    let o = pluripot(&["energy", "--case", "torus-shift(0.25)", "--N", "64", "--extent", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["energy"].as_f64().unwrap() - 0.5).abs() < 1e-3);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bvr.json");
    std::fs::write(
        &cfg,
        r#"{"body":"interval(0,1)","n_max":5,"first":{"grid":"torus(1,11)","weight":"const(0.5)"},
            "second":{"grid":"torus(1,11)"},"target":{"kind":"constant_weight"}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = pluripot(&["bvr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("bvr.csv")).unwrap();
    assert!(text.starts_with("n,L_n,target,gap\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn artifacts_independent_of_thread_count() {
    let run = |threads: &str| {
        let a = pluripot(&[
            "optimal", "--body", "interval(0,1)", "--grid", "interval(-1,1,chebyshev,64)", "--n", "5", "--threads", threads,
        ]);
        let b = pluripot(&[
            "fekete", "--body", "simplex(2)", "--grid", "torus(2,9)", "--n", "3", "--threads", threads,
        ]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(b.status.code(), Some(0));
        (a.stdout, b.stdout)
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("1"));
}

#[test]
fn bergman_from_z_file() {
    let dir = tempfile::tempdir().unwrap();
    let z = dir.path().join("z.csv");
    std::fs::write(&z, "re_1,im_1\n2,0\n").unwrap();
    let o = pluripot(&["bergman", "--body", "interval(0,1)", "--grid", "circle(16)", "--n", "2", "--z-file", z.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let b: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((b - 21.0).abs() < 1e-12);
}
