//! Black-box tests of the `prodint` binary.

use std::process::Command;

fn prodint() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prodint"))
}

#[test]
fn list_is_stable_and_names_the_registry() {
    let out = prodint().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("so3"));
    assert!(text.contains("exp-product"));
    assert!(text.contains("heis3"));
    let again = prodint().arg("list").output().unwrap();
    assert_eq!(text, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn selftest_passes() {
    let out = prodint().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 5);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn unknown_group_exits_one_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        r#"
kind = "identities"
group = "so4"
output = "out"

[curve]
name = "const"
params = [0.1, 0.2, 0.3]
"#,
    )
    .unwrap();
    let out = prodint().arg("run").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("group"), "{err}");
    assert!(err.contains("so4"), "{err}");
}

#[test]
fn missing_config_exits_one() {
    let out = prodint()
        .arg("run")
        .arg("/nonexistent/config.toml")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identities_run_succeeds_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        format!(
            r#"
kind = "identities"
group = "abelian:4"
output = {out_dir:?}

[curve]
name = "linear"
params = [0.1, -0.2, 0.3, 0.05, 0.2, 0.1, -0.1, 0.0]

[identities]
steps_list = [64]
"#
        ),
    )
    .unwrap();
    let out = prodint().arg("run").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("identities.csv")).unwrap();
    assert!(csv.starts_with("group,curve,seminorm,scheme,identity,steps,residual"));
    assert_eq!(csv.lines().count(), 5);
    assert!(out_dir.join("manifest.txt").exists());
}
