use std::fs;

use assert_cmd::Command;

const KINDS: [&str; 8] = [
    "pk-check",
    "corollary1a",
    "corollary1b",
    "corollary2",
    "corollary3-weak",
    "corollary3-semistrong",
    "value-convergence",
    "limit-sample",
];

fn bin() -> Command {
    Command::cargo_bin("argmaxlab").unwrap()
}

fn stdout(cmd: &mut Command) -> String {
    String::from_utf8(cmd.output().unwrap().stdout).unwrap()
}

#[test]
fn help_lists_every_kind() {
    let out = stdout(bin().arg("--help"));
    let line = out
        .lines()
        .find(|l| l.starts_with("Experiment kinds:"))
        .expect(&out);
    let listed: Vec<&str> = line["Experiment kinds:".len()..]
        .split(',')
        .map(str::trim)
        .collect();
    assert_eq!(listed, KINDS);
    bin().arg("--help").assert().success();
}

#[test]
fn describe_outputs() {
    assert!(stdout(bin().args(["describe", "corollary1b"])).contains("(-inf, a]"));
    let pk = stdout(bin().args(["describe", "pk-check"]));
    for f in [
        "remark3",
        "lemma2a",
        "lemma2b",
        "lemma6-weak",
        "lemma6-semistrong",
    ] {
        assert!(pk.contains(f), "{pk}");
    }
    assert!(stdout(bin().args(["describe", "corollary3-weak"])).contains("B^W x R^d_pi"));
    for k in KINDS {
        bin().args(["describe", k]).assert().success();
    }
}

#[test]
fn unknown_kind_is_a_config_error() {
    bin().args(["run", "--kind", "corollary9"]).assert().code(2);
    bin().args(["describe", "corollary9"]).assert().code(2);
    bin().arg("run").assert().code(2);
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("not json", "{"),
        ("schema", r#"{"schema":"v0","kind":"corollary1a"}"#),
        (
            "unknown field",
            r#"{"schema":"argmaxlab/config/v1","kind":"corollary1a","repz":3}"#,
        ),
        (
            "trimming",
            r#"{"schema":"argmaxlab/config/v1","kind":"corollary1a","design":{"T":2000,
               "location":{"fraction":0.5},"beta":[1,1],"delta0":[1,1],"kappa":0.25,
               "lambda1":0.85,"lambda2":0.15}}"#,
        ),
        (
            "zero reps",
            r#"{"schema":"argmaxlab/config/v1","kind":"corollary1a","reps":0}"#,
        ),
    ];
    for (name, text) in cases {
        let path = dir.path().join(format!("{}.json", name.replace(' ', "_")));
        fs::write(&path, text).unwrap();
        let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            String::from_utf8_lossy(&out.stderr).starts_with("error:"),
            "{name}"
        );
    }
    let missing = dir.path().join("missing.json");
    bin()
        .args(["run", "--config"])
        .arg(&missing)
        .assert()
        .code(2);
}

#[test]
fn pk_check_remark3() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(
        bin()
            .args(["run", "--kind", "pk-check", "--family", "remark3", "--out"])
            .arg(dir.path()),
    );
    assert!(out.contains("limit {0, 1}"), "{out}");
    assert!(out.contains("limit {0}"), "{out}");
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn runs_are_byte_identical() {
    let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/smoke_corollary1a.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (d, threads) in dirs.iter().zip(["1", "2"]) {
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--threads", threads, "--out"])
            .arg(d.path())
            .assert()
            .success();
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        let a = fs::read(dirs[0].path().join(&n)).unwrap();
        let b = fs::read(dirs[1].path().join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn failing_rule_exits_3() {
    // 40 draws per side are far too few for the KS rule
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            "--kind",
            "corollary1b",
            "--reps",
            "40",
            "--limit-draws",
            "40",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn interior_break_config_passes() {
    let config =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/corollary1a.json");
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("KS = "), "{text}");
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["comparisons"][0]["ks"].as_f64().unwrap() <= 0.08);
}
