use std::path::Path;
use std::process::{Command, Output};

use pchaos::format::{ArrayFile, PolyFile};
use pchaos::padic::enumerate_nd;
use pchaos::poly::ChaosPolynomial;
use pchaos::Complex64;
use serde_json::Value;

fn pchaos(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pchaos"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_poly(dir: &Path, name: &str, p: usize, d: usize, n: usize) {
    let terms = enumerate_nd(p, d, n).unwrap();
    let q = ChaosPolynomial::from_terms(
        p,
        n,
        terms
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, Complex64::from_polar(1.0, i as f64 * 0.7))),
    )
    .unwrap();
    std::fs::write(dir.join(name), PolyFile::from_poly(&q).to_json()).unwrap();
}

#[test]
fn verify_small_grid_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = pchaos(
        &[
            "verify", "--p", "2,3", "--d", "1,2", "--N", "6", "--seed", "1", "--out", "v.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 1);
    let entries = report["entries"].as_array().unwrap();
    assert!(entries
        .iter()
        .any(|e| e["name"] == "lemma1-pattern" && e["status"] == "pass"));
    assert!(entries.iter().all(|e| e["status"] != "fail"));
}

#[test]
fn injected_fault_exits_one_with_named_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = pchaos(
        &[
            "verify",
            "--p",
            "3",
            "--d",
            "2",
            "--N",
            "4",
            "--inject-fault",
            "corrupt-selector",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("check failed: lemma1-pattern"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn lemma1_writes_spectrum_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = pchaos(
        &[
            "lemma1",
            "--p",
            "3",
            "--d",
            "2",
            "--J",
            "1,2,1,2,1,2",
            "--N",
            "5",
            "--out",
            "nu.spec",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("nu.spec")).unwrap();
    let file = ArrayFile::parse(&text).unwrap();
    assert_eq!((file.p, file.level), (3, 6));
    let summary = file.summary.as_ref().unwrap();
    assert!(summary["max_matched_error"].as_f64().unwrap() <= 1e-6);
    assert!(summary["max_mismatched_modulus"].as_f64().unwrap() <= 1e-6);
    assert_eq!(
        summary["config"]["command"]["J"],
        serde_json::json!([1, 2, 1, 2, 1, 2])
    );
    assert!(file.to_measure().is_ok());
}

#[test]
fn missing_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = pchaos(&["norms", "--poly", "missing.json"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing.json"));
}

#[test]
fn malformed_input_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        "{\"format_version\": 1,\n \"p\": 3,\n \"N\": }",
    )
    .unwrap();
    let out = pchaos(&["norms", "--poly", "bad.json"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    std::fs::write(
        dir.path().join("term.json"),
        r#"{"format_version":1,"p":3,"N":2,"terms":[{"k":[0],"l":[3],"re":1,"im":0}]}"#,
    )
    .unwrap();
    let out = pchaos(&["norms", "--poly", "term.json"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("terms[0]"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&pchaos(&["frobnicate"], dir.path())), 2);
    assert_eq!(
        code(&pchaos(&["verify", "--tol", "nonsense=1"], dir.path())),
        2
    );
    assert_eq!(
        code(&pchaos(
            &["lemma1", "--p", "1", "--d", "1", "--J", "1", "--N", "0"],
            dir.path()
        )),
        2
    );
}

#[test]
fn transform_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = pchaos(args, dir.path());
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    };
    run(&[
        "lemma2", "--p", "3", "--d", "2", "--s", "1", "--N", "3", "--out", "mu.json",
    ]);
    run(&["transform", "--input", "mu.json", "--out", "cells.json"]);
    run(&["transform", "--input", "cells.json", "--out", "back.json"]);
    let read = |name: &str| {
        ArrayFile::parse(&std::fs::read_to_string(dir.path().join(name)).unwrap()).unwrap()
    };
    let (a, b) = (read("mu.json"), read("back.json"));
    let cells = read("cells.json");
    assert_eq!(cells.to_step_function().unwrap().len(), 81);
    // stored values survive a write/read cycle bit for bit
    assert_eq!(
        ArrayFile::parse(&cells.to_json()).unwrap().values,
        cells.values
    );
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x[0] - y[0]).abs() <= 1e-10 && (x[1] - y[1]).abs() <= 1e-10);
    }
}

#[test]
fn polynomial_subcommands_agree() {
    let dir = tempfile::tempdir().unwrap();
    write_poly(dir.path(), "q.json", 3, 2, 3);
    let out = pchaos(&["norms", "--poly", "q.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let norms: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(norms["sidon_exponent"].as_f64().unwrap(), 4.0 / 3.0);
    assert!(norms["sidon_ratio"].as_f64().unwrap() > 0.0);

    let out = pchaos(&["decompose", "--poly", "q.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = pchaos(
        &[
            "project", "--poly", "q.json", "--J", "1,2,2,1", "--out", "qj.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let qj = PolyFile::parse(&std::fs::read_to_string(dir.path().join("qj.json")).unwrap())
        .unwrap()
        .to_poly()
        .unwrap();
    assert!(qj.iter().all(|(t, _)| t.matches(&[1, 2, 2, 1])));
    assert_eq!(qj.len(), 6);

    let out = pchaos(&["norms", "--poly", "qj.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn studies_write_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let baseline = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/baselines.json");
    let out = pchaos(
        &[
            "growth",
            "--p",
            "3",
            "--d",
            "2",
            "--N",
            "3,5",
            "--trials",
            "200",
            "--seed",
            "42",
            "--out",
            "g.json",
            "--csv",
            "g.csv",
            "--baseline",
            baseline.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "format_version,p,d,N,statistic,value,trials,seed,ensemble"
    );
    assert_eq!(lines.count(), 10);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(report["growth"]["failures"], serde_json::json!([]));
    assert!(report["tolerances"]["transform"].is_number());

    let rerun = pchaos(
        &[
            "ensemble", "--p", "3", "--d", "2", "--N", "3,5", "--trials", "200", "--seed", "42",
            "--csv", "h.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&rerun), 0);
    assert_eq!(
        csv,
        std::fs::read_to_string(dir.path().join("h.csv")).unwrap()
    );
}

#[test]
fn riesz_reports_unit_mass() {
    let dir = tempfile::tempdir().unwrap();
    let out = pchaos(
        &[
            "riesz",
            "--p",
            "3",
            "--a",
            "0.5:0.5,-1,0.3",
            "--J",
            "1,2,1",
            "--level",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let file = ArrayFile::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(file.summary.unwrap()["mass_error"].as_f64().unwrap() <= 1e-12);

    let out = pchaos(
        &["riesz", "--p", "3", "--a", "2", "--J", "1", "--level", "1"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}
