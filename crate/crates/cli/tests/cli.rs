use std::path::Path;
use std::process::{Command, Output};

use pmrac::game::{canonical_strategy, depolarized_state, maximally_mixed, Strategy};
use pmrac::schema::StrategyFile;
use tempfile::TempDir;

fn pmrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_file(dir: &TempDir, name: &str, file: &StrategyFile) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(file).unwrap()).unwrap();
    path
}

#[test]
fn classical_bounds() {
    let o = pmrac(&["classical", "--n", "3", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "3/4 = 0.75");

    let o = pmrac(&["classical", "--n", "3", "--m", "2"]);
    assert!(stdout(&o).starts_with("5/6 ≈ 0.833333"));

    let o = pmrac(&["classical", "--n", "3", "--m", "3"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn classical_guard_exits_2() {
    let o = pmrac(&["classical", "--n", "5", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("too large"));
}

#[test]
fn unknown_flag_is_rejected() {
    let o = pmrac(&["classical", "--n", "3", "--m", "1", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn example_value_and_certify() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("canonical.json");
    let o = pmrac(&["example", "--out", path_str(&file)]);
    assert_eq!(o.status.code(), Some(0));

    // the emitted file validates against the schema
    let text = std::fs::read_to_string(&file).unwrap();
    assert_eq!(Strategy::from_json(&text).unwrap(), canonical_strategy());

    let o = pmrac(&["value", path_str(&file)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("S_Q (direct)    = 0.9082482905"), "{out}");
    assert!(out.contains("Delta           = 19.59591794"), "{out}");
    assert!(
        out.contains("1.632993162, 1.632993162, 1.632993162"),
        "{out}"
    );

    let o = pmrac(&["certify", path_str(&file), "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("overall: PASS"));
}

#[test]
fn maximally_mixed_value_is_half() {
    let dir = TempDir::new().unwrap();
    let s = Strategy {
        state: maximally_mixed(),
        ..canonical_strategy()
    };
    let file = write_file(&dir, "mixed.json", &StrategyFile::from_strategy(&s));
    let o = pmrac(&["value", path_str(&file)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("S_Q (direct)    = 0.5\n"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn corrupted_unitary_names_the_field() {
    let dir = TempDir::new().unwrap();
    let mut f = StrategyFile::from_strategy(&canonical_strategy());
    f.unitaries.get_mut("011").unwrap()[0][1] = [3.0, 0.0];
    let file = write_file(&dir, "bad.json", &f);
    for cmd in ["value", "certify"] {
        let o = pmrac(&[cmd, path_str(&file)]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("unitaries/011"), "{}", stderr(&o));
    }
}

#[test]
fn scaled_observable_fails_validation() {
    let dir = TempDir::new().unwrap();
    let mut f = StrategyFile::from_strategy(&canonical_strategy());
    for row in f.observables[1].iter_mut() {
        for z in row.iter_mut() {
            z[0] *= 0.9;
            z[1] *= 0.9;
        }
    }
    let file = write_file(&dir, "b2.json", &f);
    let o = pmrac(&["certify", path_str(&file)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("observables/1"), "{}", stderr(&o));
}

#[test]
fn noisy_state_fails_certification() {
    let dir = TempDir::new().unwrap();
    let s = Strategy {
        state: depolarized_state(0.99).unwrap(),
        ..canonical_strategy()
    };
    let file = write_file(&dir, "noisy.json", &StrategyFile::from_strategy(&s));
    let o = pmrac(&["certify", path_str(&file), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["overall"], false);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"entanglement/purity"));
    assert!(failed.contains(&"overlap/000-111"));
    assert!(failed.contains(&"overlap/000-001"));
}

#[test]
fn optimize_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let ha = dir.path().join("a.csv");
    let hb = dir.path().join("b.csv");
    for (out, hist) in [(&a, &ha), (&b, &hb)] {
        let o = pmrac(&[
            "optimize",
            "--starts",
            "1",
            "--seed",
            "7",
            "--out",
            path_str(out),
            "--history",
            path_str(hist),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(&ha).unwrap(), std::fs::read(&hb).unwrap());
    let history = std::fs::read_to_string(&ha).unwrap();
    assert!(history.starts_with("round,s_q\n0,"));
}

#[test]
fn optimize_then_certify() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("best.json");
    let o = pmrac(&[
        "optimize",
        "--starts",
        "20",
        "--seed",
        "7",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let value: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("S_Q = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.9082482905).abs() < 1e-6);

    let o = pmrac(&["certify", path_str(&out), "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn threads_do_not_change_output() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (out, threads) in [(&a, "1"), (&b, "4")] {
        let o = pmrac(&[
            "optimize",
            "--starts",
            "6",
            "--seed",
            "3",
            "--threads",
            threads,
            "--out",
            path_str(out),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = pmrac(&["sweep", "--etas", "0,0.5,1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        vec!["eta", "s_q_fixed_strategy"]
    );
    let rows: Vec<(f64, f64)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 3);
    for (eta, s) in rows {
        assert!((s - (0.5 + eta / 6f64.sqrt())).abs() < 1e-10);
    }
}

#[test]
fn sweep_reoptimized_column() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = pmrac(&[
        "sweep",
        "--etas",
        "0.5",
        "--out",
        path_str(&out),
        "--reoptimize",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(r.headers().unwrap().len(), 3);
    let rec = r.records().next().unwrap().unwrap();
    let reopt: f64 = rec[2].parse().unwrap();
    assert!((reopt - 0.7041241452).abs() < 1e-6);
}

#[test]
fn sweep_rejects_bad_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = pmrac(&["sweep", "--etas", "0.5,1.2", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    // seed only makes sense with --reoptimize
    let o = pmrac(&[
        "sweep",
        "--etas",
        "0.5",
        "--out",
        path_str(&out),
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let o = pmrac(&["example", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(o.status.code(), Some(3));
}
