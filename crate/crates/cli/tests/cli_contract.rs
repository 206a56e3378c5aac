//! End-to-end contract tests for the `tanfold` binary: exit codes, report
//! shape, determinism, error positions, and environment overrides.

use std::process::{Command, Output};

fn tanfold() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tanfold"));
    // Isolate from any TF_ configuration in the ambient environment.
    for (key, _) in std::env::vars_os() {
        if key.to_string_lossy().starts_with("TF_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    tanfold().args(args).output().expect("spawn tanfold")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn axioms_on_shipped_corpora_pass_with_exit_zero() {
    let out = run(&["axioms"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("overall: PASS"), "got:\n{text}");
    for name in [
        "bundle_abelian_group",
        "symmetric_structure",
        "vertical_lift",
        "lift_symmetry",
        "kernel_pullback",
        "scalar_mult",
        "naturality",
    ] {
        assert!(text.contains(&format!("PASS {name}")), "missing {name}:\n{text}");
    }
}

#[test]
fn corrupted_swap_fails_named_checks_with_exit_one() {
    let out = run(&["axioms", "--corrupt-tau"]);
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    let failed: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("FAIL "))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    assert!(
        failed.len() >= 2,
        "expected at least two named failures, got {failed:?}:\n{text}"
    );
    assert!(text.contains("overall: FAIL"));
}

#[test]
fn cartan_and_bracket_pass_on_shipped_corpora() {
    for sub in ["cartan", "bracket"] {
        let out = run(&[sub]);
        assert_eq!(exit_code(&out), 0, "{sub} stderr: {}", stderr(&out));
        assert!(stdout(&out).contains("overall: PASS"));
    }
}

#[test]
fn json_reports_are_deterministic_and_well_formed() {
    let a = run(&["--json", "bracket"]);
    let b = run(&["--json", "bracket"]);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "same configuration must be byte-identical");

    let v: serde_json::Value = serde_json::from_slice(&a.stdout).expect("valid JSON");
    assert_eq!(v["tool"], "tanfold");
    assert_eq!(v["command"], "bracket");
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["config"]["trials"], 100);
    assert_eq!(v["config"]["corpus"], "builtin");
    let checks = v["checks"].as_array().expect("checks array");
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c["name"].is_string());
        assert!(c["pass"].is_boolean());
        assert!(c["trials"].is_u64());
        // Residuals are decimal strings, not floats.
        assert!(c["max_residual"].is_string());
    }
    assert_eq!(v["pass"], true);

    let c = run(&["--json", "--seed", "7", "bracket"]);
    assert_eq!(exit_code(&c), 0);
    assert_ne!(a.stdout, c.stdout, "different seed must change the report");
}

#[test]
fn different_seeds_agree_on_verdicts() {
    for seed in ["1", "2", "3"] {
        let out = run(&["--seed", seed, "axioms"]);
        assert_eq!(exit_code(&out), 0, "seed {seed}");
    }
}

#[test]
fn malformed_corpus_reports_position_and_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("bad.tf");
    std::fs::write(&path, "map f: R1 -> R1 = x1 + on [-1,1]\n").unwrap();
    let out = run(&["axioms", "--corpus", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(
        err.contains("line 1") && err.contains("column"),
        "expected a position, got: {err}"
    );
}

#[test]
fn corpus_without_declarations_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("empty.tf");
    std::fs::write(&path, "# nothing here\n").unwrap();
    for sub in ["axioms", "cartan", "bracket"] {
        let out = run(&[sub, "--corpus", path.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 2, "{sub} stderr: {}", stderr(&out));
    }
}

#[test]
fn missing_corpus_file_exits_two() {
    let out = run(&["axioms", "--corpus", "/nonexistent/nowhere.tf"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_space_exits_two() {
    let out = run(&["diffeo", "no_such_space"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("unknown space"));
}

#[test]
fn theta_index_beyond_ambient_dimension_exits_two() {
    let out = run(&["diffeo", "half_line", "--probe", "theta5"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_probe_exits_two() {
    let out = run(&["diffeo", "half_line", "--probe", "sideways"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn invalid_tolerance_and_trials_exit_two() {
    for args in [
        &["--tol", "-3", "axioms"][..],
        &["--tol", "0", "axioms"][..],
        &["--trials", "0", "axioms"][..],
    ] {
        let out = run(args);
        assert_eq!(exit_code(&out), 2, "args {args:?}");
    }
}

#[test]
fn out_flag_writes_the_json_report() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("report.json");
    let out = run(&["--out", path.to_str().unwrap(), "axioms"]);
    assert_eq!(exit_code(&out), 0);
    // Text summary still goes to stdout.
    assert!(stdout(&out).contains("overall: PASS"));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).expect("valid JSON file");
    assert_eq!(file["command"], "axioms");
    assert_eq!(file["pass"], true);
}

#[test]
fn environment_variables_configure_the_run() {
    let out = tanfold()
        .args(["axioms"])
        .env("TF_SEED", "9")
        .env("TF_TRIALS", "17")
        .env("TF_JSON", "true")
        .output()
        .expect("spawn tanfold");
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["trials"], 17);
}

#[test]
fn corpus_spaces_resolve_by_declared_name() {
    // The shipped half-line corpus declares `space hl = half_line`.
    let out = run(&["diffeo", "hl", "--probe", "halfline"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("boundary_fiber_collapsed"));
}

#[test]
fn user_corpus_feeds_the_suites() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("mini.tf");
    std::fs::write(
        &path,
        "map square: R1 -> R1 = x1^2 on [-1,1]\n\
         field steady: R1 = 1 + x1 on [-1,1]\n\
         field bowed: R1 = x1^2 on [-1,1]\n\
         field cubed: R1 = x1^3 on [-1,1]\n",
    )
    .unwrap();
    let out = run(&["--json", "bracket", "--corpus", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["config"]["corpus"], path.to_str().unwrap());
    assert_eq!(v["pass"], true);
}

#[test]
fn counterexample_spaces_exit_one() {
    let out = run(&["diffeo", "folded_line", "--probe", "theta2-inj"]);
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("FAIL theta2_injectivity"), "got:\n{text}");
    assert!(text.contains("fiber_sum_abs"), "got:\n{text}");
}

#[test]
fn group_probe_requires_a_matrix_group_space() {
    let out = run(&["diffeo", "half_line", "--probe", "group"]);
    assert_eq!(exit_code(&out), 2);
    let ok = run(&["diffeo", "gl(1)", "--probe", "group"]);
    assert_eq!(exit_code(&ok), 0, "stderr: {}", stderr(&ok));
}
