use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phinabla"))
        .args(args)
        .env_remove("PHINABLA_COLOR")
        .output()
        .unwrap()
}

fn path(name: &str) -> String {
    example(name).to_string_lossy().into_owned()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn analyze_reports_quasi_purity() {
    let o = run(&["analyze", "--json", &path("kummer_tate.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "QUASI_PURE");
    assert_eq!(v["weight"], 1);
    assert_eq!(v["unipotence_level"], 2);
}

#[test]
fn precision_flags_override_the_file() {
    let o = run(&["analyze", "--json", "--precision", "30", "--t-window", "48", &path("kummer_tate.json")]);
    let v = stdout_json(&o);
    assert_eq!(v["params"]["precision"], 30);
    assert_eq!(v["params"]["t_window"], 48);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", &path("kt_abelian.json")]).status.code(), Some(2));
    let wild = run(&["analyze", "--json", &path("wild_exponent.json")]);
    assert_eq!(wild.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&wild.stderr).unwrap();
    assert_eq!(err["error"], "NotTame");
    // The partial report still reaches stdout.
    assert_eq!(stdout_json(&wild)["residue_exponents"][0], "1/5");
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["wd", "--json"],
        vec!["reduction"],
        vec!["compat", "--json"],
    ] {
        let file = match args[0] {
            "wd" => "half_exponent.json",
            "reduction" => "kt_abelian.json",
            _ => "family_mismatch.json",
        };
        let mut full = args.clone();
        let p = path(file);
        full.push(&p);
        let a = run(&full);
        let b = run(&full);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn weight_flag_and_convention() {
    let o = run(&["analyze", "--json", "--weight", "3", &path("kummer_tate.json")]);
    assert_eq!(stdout_json(&o)["verdict"], "NOT_QUASI_PURE");
    let o = run(&["wd", "--json", "--convention", "arithmetic", &path("kummer_tate.json")]);
    let v = stdout_json(&o);
    assert_eq!(v["wd"]["convention"], "arithmetic");
    assert_eq!(v["wd"]["phi"][1][1], "1/5");
}

#[test]
fn compat_pinpoints_the_mismatch() {
    let v = stdout_json(&run(&["compat", "--json", &path("family_mismatch.json")]));
    assert_eq!(v["verdict"], "INCOMPATIBLE");
    assert_eq!(v["discrepancy"]["member"], 1);
    assert_eq!(v["discrepancy"]["k"], -1);
}

#[test]
fn selftest_is_green() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn selftest_fails_on_empty_corpus() {
    let dir = std::env::temp_dir().join("phinabla-empty-corpus");
    std::fs::create_dir_all(&dir).unwrap();
    assert_eq!(run(&["selftest", "--corpus", &dir.to_string_lossy()]).status.code(), Some(1));
}
