//! End-to-end checks of the command-line surface: exit codes, CSV
//! schema and reproducibility of written traces.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bifilt"))
}

#[test]
fn list_scenarios_names_builtins() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "miso-wf-vs-ls",
        "miso-wf-vs-ls-ma1",
        "miso-roster",
        "hammerstein-iq",
        "bilinear-vs-linear",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn run_writes_reproducible_csv_with_schema() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    fs::write(
        &config,
        r#"
name = "tiny"
kind = "miso"
l = 4
m = 2
noise_std = 0.01
horizon = 50
runs = 2
seed = 7

[signal]
kind = "white"
sigma = 1.0

[filters.cbnlms]
alpha_h = 0.5
alpha_g = 0.5
delta_h = 1e-4
delta_g = 1e-4

[filters.cbrls]
lambda = 0.95
nu = 10.0
"#,
    )
    .unwrap();

    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert_eq!(a, b, "identical config and seed must give identical bytes");

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,filter,run,index,nm_db,ise_db,diverged"
    );
    // 2 filters x 2 runs x 50 steps
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 50);
    assert!(!text.contains('\r'), "LF line endings only");

    // seed override must change the numbers
    let out_c = dir.path().join("c.csv");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_c)
        .args(["--seed", "8"])
        .status()
        .unwrap();
    assert!(status.success());
    assert_ne!(fs::read(&out_c).unwrap(), fs::read(&out_a).unwrap());
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "name = \"broken\"\nunknown_field = 1\n").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let missing = bin()
        .args([
            "run",
            "--scenario",
            "no-such-scenario",
            "--out",
            "/dev/null",
        ])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn complexity_emits_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let status = bin()
        .args(["complexity", "--lmax", "3", "--mmax", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "variant,l,m,mult_count,instrumented_count,big_o"
    );
    assert_eq!(text.lines().count(), 1 + 6 * 3 * 2);
    // spot value: the 2R count at L=2, M=3 transposed grid entry L=3, M=2
    assert!(text.contains("two_r_v1,2,2,40")); // 24+4+8+4
    for line in text.lines().skip(1) {
        let parts: Vec<&str> = line.split(',').collect();
        assert_eq!(parts[3], parts[4], "closed form vs instrumented: {line}");
        assert_eq!(parts[5], "O(LM)");
    }
}

/// Golden trace: the committed fixture pins the deterministic sample
/// streams, filter arithmetic and CSV formatting all at once. A
/// mismatch means the reproducibility contract changed.
#[test]
fn golden_trace_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("golden.csv");
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_scenario.toml");
    let status = bin()
        .args(["run", "--config", config, "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let produced = fs::read_to_string(&out).unwrap();
    let expected = include_str!("fixtures/golden_trace.csv");
    assert_eq!(produced, expected, "trace drifted from the golden fixture");
}

#[test]
fn verify_filter_selects_single_criterion() {
    let out = bin()
        .args(["verify", "--filter", "complexity-table"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("complexity-table"));
    assert!(text.contains("1 criteria, 1 passed, 0 failed"));
}
