use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_momentest"));
    c.env_remove("MOMENTEST_SEED");
    c
}

fn corpus(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

#[test]
fn validate_accepts_corpus_and_rejects_bad_guards() {
    for f in ["vasicek.pp", "pdp.pp"] {
        let out = run(bin().args(["validate", "--program"]).arg(corpus(f)));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pp");
    fs::write(&bad, "x := 0\ny := 0\nwhile true { if y = 1 { x := 1 } else { x := 0 } }\n").unwrap();
    let out = run(bin().args(["validate", "--program"]).arg(&bad));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["stage"], "parse");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin()
        .args(["run", "--var", "r", "--m", "1", "--e", "50", "--program"])
        .arg(corpus("vasicek.pp"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["stage"], "config");

    let out = run(bin().args(["run", "--var", "r"]));
    assert_eq!(out.status.code(), Some(2), "missing --program is a usage error");

    let out = run(bin().args(["moments", "--var", "nope", "--program"]).arg(corpus("vasicek.pp")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("blowup.pp");
    fs::write(&prog, "x := 10\nwhile true { x := x * x }\n").unwrap();
    let out = run(bin().args(["sample", "--n", "20", "--e", "3", "--program"]).arg(&prog));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["stage"], "sample");
}

#[test]
fn moments_prints_exact_values() {
    let out = run(bin().args(["moments", "--var", "r", "--program"]).arg(corpus("vasicek.pp")));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["var"], "r");
    assert_eq!(v["values"][0].as_f64().unwrap(), 0.2);
    assert!((v["values"][1].as_f64().unwrap() - 0.28 / 3.0).abs() < 1e-15);
}

#[test]
fn seed_comes_from_the_environment() {
    let go = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.args(["sample", "--e", "20", "--program"]).arg(corpus("randomwalk1d.pp"));
        if let Some(s) = env {
            c.env("MOMENTEST_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        run(&mut c).stdout
    };
    assert_eq!(go(Some("5"), None), go(None, Some("5")));
    assert_ne!(go(Some("5"), None), go(None, None));
}

/// `run` equals the chain `moments | sample | estimate | gof`.
#[test]
fn run_equals_chained_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let (whole, parts) = (dir.path().join("whole"), dir.path().join("parts"));
    let prog = corpus("vasicek.pp");
    let ok = |out: Output| assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    ok(run(bin()
        .args(["run", "--var", "r", "--m", "2", "--seed", "3", "--program"])
        .arg(&prog)
        .arg("--out")
        .arg(&whole)));

    ok(run(bin().args(["moments", "--var", "r", "--m", "8", "--program"]).arg(&prog).arg("--out").arg(&parts)));
    ok(run(bin().args(["sample", "--seed", "3", "--program"]).arg(&prog).arg("--out").arg(&parts)));
    ok(run(bin()
        .args(["estimate", "--m", "2", "--moments"])
        .arg(parts.join("moments.json"))
        .arg("--sample")
        .arg(parts.join("sample.csv"))
        .arg("--program")
        .arg(&prog)
        .arg("--out")
        .arg(&parts)));
    ok(run(bin()
        .args(["gof", "--sample"])
        .arg(parts.join("sample.csv"))
        .arg("--estimates")
        .arg(parts.join("estimates.json"))
        .arg("--out")
        .arg(&parts)));

    for f in ["moments.json", "sample.csv", "estimates.json", "gof.json"] {
        assert_eq!(
            fs::read(whole.join(f)).unwrap(),
            fs::read(parts.join(f)).unwrap(),
            "{} differs",
            f
        );
    }
    for f in ["report.json", "histogram.csv", "pdf_curves.csv", "errors.csv"] {
        assert!(whole.join(f).exists(), "{} missing", f);
    }
}

#[test]
fn report_matches_schema() {
    let schema: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json")).unwrap(),
    )
    .unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (file, var, m) in [("vasicek.pp", "r", "2"), ("uniform.pp", "u", "6"), ("pdp.pp", "x", "3")] {
        let out = run(bin()
            .args(["run", "--e", "300", "--var", var, "--m", m, "--program"])
            .arg(corpus(file))
            .arg("--out")
            .arg(dir.path()));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{}: {:?}", file, errors);
    }
}
