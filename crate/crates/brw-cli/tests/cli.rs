//! CLI behavior: exit codes, deterministic CSV output, model files.

use std::path::Path;
use std::process::Command;

fn brw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_brw"))
}

#[test]
fn solve_prints_csv_and_exits_zero() {
    let out = brw()
        .args([
            "solve", "--family", "comb1", "--lambda", "0.4", "--set", "full", "--radius", "12",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("set_name,n_or_index,R,lower,upper,width,converged"));
    assert!(text.contains("full,0,12,"));
}

#[test]
fn unknown_family_exits_one() {
    let out = brw()
        .args(["solve", "--family", "lattice9", "--radius", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equal_dyadics_exit_one() {
    let out = brw()
        .args([
            "experiment", "uncountable", "--lambda", "0.35", "--radii", "10,12", "--i1", "1,2",
            "--i2", "1,2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unresolved_verdict_exits_two() {
    // above the local threshold the half-space brackets all coincide with
    // the global value: ordering can never certify
    let out = brw()
        .args([
            "experiment", "lemma-countable", "--lambda", "0.40", "--radii", "8,10", "--n-max", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn experiment_reruns_are_byte_identical() {
    let dir1 = std::env::temp_dir().join("brw-cli-test-run1");
    let dir2 = std::env::temp_dir().join("brw-cli-test-run2");
    for d in [&dir1, &dir2] {
        let _ = std::fs::remove_dir_all(d);
        let out = brw()
            .args([
                "experiment",
                "lemma-countable",
                "--lambda",
                "0.35",
                "--radii",
                "12,16",
                "--n-max",
                "1",
                "--out",
                d.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir1.join("lemma_countable.csv")).unwrap();
    let b = std::fs::read(dir2.join("lemma_countable.csv")).unwrap();
    assert_eq!(a, b, "CSV output must be byte-identical across reruns");
}

#[test]
fn shipped_model_files_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models");
    for name in [
        "tree3_intermediate.json",
        "tree3_supercritical.json",
        "comb1.json",
        "finite_quadratic.json",
        "finite_subcritical.json",
    ] {
        let path = root.join(name);
        let out = brw()
            .args(["solve", "--model", path.to_str().unwrap(), "--radius", "8"])
            .output()
            .unwrap();
        if name.starts_with("finite") {
            // finite models go through the fixed-point experiment instead
            let out = brw()
                .args([
                    "experiment",
                    "finite-two-points",
                    "--model",
                    path.to_str().unwrap(),
                ])
                .output()
                .unwrap();
            assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        } else {
            assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
}

#[test]
fn project_check_all_passes() {
    let out = brw()
        .args(["project-check", "--map", "all", "--radius", "10"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"exact_pass\": true"));
}
