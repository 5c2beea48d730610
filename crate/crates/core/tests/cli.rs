use std::fs;
use std::process::{Command, Output};

fn subdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn weights_at_order_one() {
    let o = subdiff(&["weights", "--alpha", "1", "--method", "bdf2", "-n", "4"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout), "1.5\n-2\n0.5\n0\n0\n");
}

#[test]
fn weights_rejects_bad_order() {
    let o = subdiff(&["weights", "--alpha", "1.5", "-n", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(0, 1]"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(subdiff(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(subdiff(&["weights", "--alpha", "0.5"]).status.code(), Some(1));
    assert_eq!(subdiff(&["study"]).status.code(), Some(1));
    assert_eq!(subdiff(&["--help"]).status.code(), Some(0));
}

#[test]
fn study_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "study".to_string(),
            "--preset=c".into(),
            "--scheme=vanilla".into(),
            "--alphas=0.5,0.75".into(),
            "--t-finals=1,0.001".into(),
            "--steps=10,20".into(),
            "--cells=40".into(),
            "--reference-steps=200".into(),
            "--quiet".into(),
            format!("--output-dir={out}"),
        ]
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let argv = args(d.to_str().unwrap());
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let o = subdiff(&argv);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    for f in ["results.csv", "tables.md", "config.effective", "metadata.toml"] {
        assert!(a.join(f).is_file(), "{f} missing");
    }
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.join("results.csv")).unwrap());
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    assert!(csv.starts_with("preset,scheme,alpha,t_final,N,error,rate\nc,vanilla,0.5,1.0,10,"));

    // the effective config reproduces the run
    let c = dir.path().join("c");
    let cfg = a.join("config.effective");
    let o = subdiff(&["study", "--config", cfg.to_str().unwrap(), "--output-dir", c.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv, fs::read_to_string(c.join("results.csv")).unwrap());
    assert_eq!(
        fs::read_to_string(cfg).unwrap().replace(a.to_str().unwrap(), c.to_str().unwrap()),
        fs::read_to_string(c.join("config.effective")).unwrap()
    );
}

#[test]
fn config_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let run = |path: &str| subdiff(&["study", "--config", path]);

    let o = run(&write("empty.toml", ""));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no study specified"), "{}", stderr(&o));

    let o = run(&write("key.toml", "[[study]]\npreset = \"a\"\nscheme = \"corrected\"\nrefinement = 3\n"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("refinement"), "{}", stderr(&o));

    let o = run(&write("alpha.toml", "[[study]]\npreset = \"a\"\nscheme = \"corrected\"\nalphas = [1.5]\n"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(0, 1)"), "{}", stderr(&o));

    let o = run(dir.path().join("missing.toml").to_str().unwrap());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_writes_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let o = subdiff(&[
        "solve", "--preset", "a", "--steps", "20", "--cells", "16", "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (x, u) = l.split_once(',').unwrap();
            (x.parse().unwrap(), u.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 17);
    assert_eq!(rows[0], (0.0, 0.0));
    assert_eq!(rows[16], (1.0, 0.0));
    assert!(rows[1..16].iter().all(|r| r.1 > 0.0 && r.1 < 1.0));
}

#[test]
fn verify_passes() {
    let o = subdiff(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().all(|l| !l.starts_with("FAIL")));
}
