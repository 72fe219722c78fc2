use std::path::Path;
use std::process::{Command, Output};

fn zetalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zetalab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header row and data rows, without comment lines.
fn body(csv: &str) -> Vec<String> {
    csv.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let b = body(csv);
    let idx = b[0].split(',').position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    b[1..].iter().map(|r| r.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn moment_matches_closed_form() {
    let o = zetalab(&["moment", "--x", "2", "--T", "1e5", "--two-k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("# config: command=moment "));
    let v: f64 = column(&csv, "value")[0].parse().unwrap();
    let u = 1e5 * std::f64::consts::LN_2;
    let want = 2.0 + 2.0 * u.sin() / u;
    assert!((v / want - 1.0).abs() < 1e-6, "{v} vs {want}");
}

#[test]
fn energy_example() {
    let o = zetalab(&["energy", "--x", "4", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(column(&stdout(&o), "energy"), vec!["32"]);
}

#[test]
fn lower_bound_json_fields() {
    let o = zetalab(&["lower-bound", "--x", "10", "--T", "500", "--k", "3", "--desk-jm", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &j["rows"][0];
    for key in ["I_w", "I_p", "LB", "M_2k"] {
        assert!(row[key].as_f64().unwrap() > 0.0, "{key}");
    }
    assert_eq!(row["holder_ok"], true);
    assert!(row["LB"].as_f64().unwrap() <= row["M_2k"].as_f64().unwrap());
    assert_eq!(j["config"]["k"], "3");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# energy run\nx = 5\nk = 2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = zetalab(&["energy", "--config", cfg]);
    assert_eq!(column(&stdout(&o), "x"), vec!["5"]);
    let o = zetalab(&["energy", "--config", cfg, "--x", "3"]);
    let csv = stdout(&o);
    assert_eq!(column(&csv, "x"), vec!["3"]);
    assert_eq!(column(&csv, "energy"), vec!["15"]);
    assert!(csv.lines().next().unwrap().contains(" x=3"));
}

#[test]
fn errors_exit_one_and_name_the_key() {
    let o = zetalab(&["moment", "--x", "2", "--T", "ten"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`T`"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "x=2\nwidth=3\n").unwrap();
    let o = zetalab(&["energy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));

    assert_eq!(zetalab(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(zetalab(&["energy", "--x", "3"]).status.code(), Some(1));
    // Parameter domain errors from the core.
    assert_eq!(zetalab(&["shift-sum", "--y", "100", "--k", "1"]).status.code(), Some(1));
    assert_eq!(zetalab(&["--help"]).status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| -> String {
        let p = dir.path().join(name);
        let o = zetalab(&[
            "rmf", "--x", "10", "--k", "1.5", "--samples", "5000", "--seed", "11", "--threads", threads, "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(p).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "4");
    assert_eq!(a, b);
    assert_eq!(body(&a), body(&c));
    assert!(a.lines().next().unwrap().contains("seed=11"));

    let m = |threads: &str| {
        stdout(&zetalab(&["moment", "--x", "50", "--T", "2e4", "--two-k", "4", "--threads", threads]))
    };
    assert_eq!(body(&m("1")), body(&m("3")));
}

#[test]
fn out_file_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("shift.json");
    let o = zetalab(&["shift-sum", "--ln-y", "200", "--k", "2", "--format", "json", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(j["rows"][0]["half_range"], 100);
    assert_eq!(j["rows"][0]["holds"], true);
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1);
    let missing = dir.path().join("no/such/dir/out.csv");
    let o = zetalab(&["energy", "--x", "2", "--k", "1", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!Path::new(&missing).exists());
}

#[test]
fn every_subcommand_runs() {
    let cases: &[&[&str]] = &[
        &["oracle", "--x", "8", "--k", "2", "--T", "1e6"],
        &["lemma1", "--y", "100", "--k", "2", "--nodes", "128"],
        &["proxy-check", "--x", "1e4", "--k", "3", "--desk-jm", "5", "--desk-m", "3", "--t-samples", "200"],
        &["proxy-check", "--ln-x", "1e9", "--c0", "1e6", "--k", "2.5", "--t-samples", "0"],
        &["correlation", "--x", "30", "--T", "1000", "--k", "2.5", "--ell-prime", "-1,0,1"],
        &["exponent-sweep", "--x", "50", "--k", "1.5", "--t-values", "200,600,1500"],
    ];
    for args in cases {
        let o = zetalab(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("# config: command="));
    }
}
