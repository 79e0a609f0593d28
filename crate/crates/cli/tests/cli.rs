use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringchain")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

/// Data rows of a CSV, comments and header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fig3_matches_golden() {
    let out = stdout(&["bands", "--cosA", "0.7", "--alpha-sweep", "-4:2:0.01", "--figure", "fig3"]);
    let preset = stdout(&["bands", "--figure", "fig3"]);
    let golden = include_str!("golden/fig3.csv");
    assert_eq!(preset, golden);
    assert_eq!(rows(&out), rows(golden));
}

#[test]
fn csv_shape() {
    let out = stdout(&["bands", "--figure", "fig3"]);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "alpha,band0_lo,band0_hi");
    assert!(!out.contains('\r'));
    let first = rows(&out)[0].clone();
    assert_eq!(first[1], "-1.1053476042447561e0");
    assert_eq!(rows(&out).len(), 601);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, jobs) in [(&a, "1"), (&b, "3")] {
        let o = run(&[
            "impurity", "--cosA", "-0.6", "--alpha", "1", "--gamma", "3,1", "--jobs", jobs, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let x = stdout(&["oracle", "--seed", "11", "--cases", "2"]);
    let y = stdout(&["oracle", "--seed", "11", "--cases", "2", "--jobs", "2"]);
    assert_eq!(x, y);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bands", "--A", "0", "--cosA", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["bands", "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bands", "--A", "0.2", "--alpha-sweep", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(run(&["impurity", "--cosA", "0.6", "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(run(&["impurity", "--cosA", "1.5", "--gamma", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["impurity", "--cosA", "0.6", "--gamma", "1,2,3", "--curve"]).status.code(), Some(2));
    assert_eq!(run(&["impurity", "--cosA", "0.6", "--tol-root", "-1", "--gamma", "1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["bands", "--cosA", "0.5", "--figure", "fig3"]).status.code(), Some(2));
    assert_eq!(run(&["impurity", "--figure", "fig5i", "--gamma", "1,1"]).status.code(), Some(2));
    // half-integer flux leaves the dispersion function undefined
    assert_eq!(run(&["impurity", "--cosA", "0", "--gamma", "-2"]).status.code(), Some(3));
    // a repulsive coupling has no state in gap 0 to fit
    let o = run(&["weak", "--cosA", "0.7", "--alpha", "1", "--gamma", "1", "--eps", "1e-2,5e-3,2.5e-3,1.25e-3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn free_chain_layout() {
    let out = stdout(&["bands", "--A", "0", "--alpha", "0", "--cutoff", "10"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["regime"], "non_magnetic");
    assert_eq!(v["bands"], serde_json::json!([[0.0, 10.0]]));
    let flat: Vec<f64> = v["flat"].as_array().unwrap().iter().map(|f| f["E"].as_f64().unwrap()).collect();
    assert_eq!(flat, vec![1.0, 4.0, 9.0]);
    let pos: Vec<usize> = ["regime", "bands", "gaps", "flat", "cutoff"]
        .iter()
        .map(|k| out.find(&format!("\"{k}\"")).unwrap())
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn single_impurity_state() {
    let out = stdout(&["impurity", "--cosA", "0.6", "--alpha", "1", "--gamma", "-2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let gap0 = &v["gaps"][0];
    assert_eq!(gap0["index"], 0);
    assert_eq!(gap0["ordinal"], 1);
    let states = gap0["states"].as_array().unwrap();
    assert_eq!(states.len(), 1);
    assert!((states[0]["E"].as_f64().unwrap() - 0.027908719505099948).abs() < 1e-9);
    let csv = stdout(&["impurity", "--cosA", "0.6", "--alpha", "1", "--gamma", "-2", "--format", "csv"]);
    assert_eq!(rows(&csv).iter().filter(|r| r[0] == "0").count(), 1);
}

#[test]
fn fig4_curve_is_monotone_per_gap() {
    let out = stdout(&["impurity", "--figure", "fig4ii", "--curve"]);
    let data = rows(&out);
    assert!(data.len() > 1000);
    for w in data.windows(2) {
        if w[0][0] == w[1][0] {
            assert!(num(&w[1][2]) > num(&w[0][2]), "{w:?}");
        }
    }
}

#[test]
fn fig5_curves_do_not_cross() {
    for args in [
        vec!["impurity", "--cosA", "-0.6", "--alpha", "1", "--gamma", "3,1", "--curve"],
        vec!["impurity", "--figure", "fig5iii", "--curve"],
    ] {
        let out = stdout(&args);
        assert!(out.lines().nth(1).unwrap() == "gap,E,f_minus,f_plus");
        let data = rows(&out);
        let mut by_gap: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
        for r in &data {
            by_gap.entry(r[0].clone()).or_default().push(num(&r[3]) - num(&r[2]));
        }
        for diffs in by_gap.values() {
            let sign = diffs[0].signum();
            assert!(diffs.iter().all(|d| d.signum() == sign && *d != 0.0));
        }
    }
}

#[test]
fn weak_slope() {
    let o = run(&["weak", "--cosA", "0.7", "--alpha", "1", "--gamma", "-1", "--eps", "1e-2,5e-3,2.5e-3,1.25e-3"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    let line = out.lines().find(|l| l.starts_with("# fit edge_distance")).unwrap();
    let slope: f64 = line.split("slope=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((slope - 2.0).abs() <= 0.1, "{slope}");
    assert_eq!(rows(&out).len(), 4);
}

#[test]
fn distant_rate() {
    let out = stdout(&["distant", "--cosA", "0.7", "--alpha", "1", "--g1", "-1.5", "--g2", "-1.5", "--n", "4,6,8,10"]);
    let line = out.lines().find(|l| l.contains("rate_ratio=")).unwrap();
    let ratio: f64 = line.split("rate_ratio=").nth(1).unwrap().trim().parse().unwrap();
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    assert_eq!(rows(&out).len(), 8);
}

#[test]
fn oracle_summary() {
    let o = run(&["oracle", "--seed", "7", "--cases", "20"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("20/20 matched ≤ 1e-4"), "{err}");
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().nth(1).unwrap(), "case,gap,kind,M,n_rings,E_oracle,E_char,abs_err");
}
