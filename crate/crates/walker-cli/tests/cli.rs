//! End-to-end tests of the `walker-ext` binary: built-in scenarios, report
//! determinism, canonical-form round trips, error positions and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn walker_ext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walker-ext"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).expect("write scenario");
    path.to_str().expect("UTF-8 path").to_string()
}

const BUILTINS: &[&str] = &[
    "osserman-33",
    "paraform-n2",
    "paraform-n3",
    "einstein-surface",
    "ricciflat-selfdual",
    "typeii-build",
];

#[test]
fn builtins_are_listed_and_printable() {
    let out = walker_ext(&["fixtures"]);
    assert!(out.status.success());
    let listing = stdout(&out);
    for name in BUILTINS {
        assert!(listing.contains(name), "missing {name} in:\n{listing}");
    }

    for name in BUILTINS {
        let out = walker_ext(&["fixtures", name]);
        assert!(out.status.success(), "fixtures {name}");
        assert!(stdout(&out).contains("dim = "), "fixtures {name} source");
    }
}

#[test]
fn every_builtin_passes_and_is_deterministic() {
    for name in BUILTINS {
        let first = walker_ext(&["run", name]);
        assert_eq!(
            first.status.code(),
            Some(0),
            "{name} should exit 0; stdout:\n{}\nstderr:\n{}",
            stdout(&first),
            stderr(&first)
        );
        let text = stdout(&first);
        assert!(
            text.contains("summary: PASS"),
            "{name} summary line:\n{text}"
        );
        let second = walker_ext(&["run", name]);
        assert_eq!(first.stdout, second.stdout, "{name} must be byte-identical");
    }
}

#[test]
fn json_reports_are_valid_and_deterministic() {
    for name in BUILTINS {
        let first = walker_ext(&["run", name, "--format", "json"]);
        assert_eq!(first.status.code(), Some(0), "{name} JSON run");
        let value: serde_json::Value =
            serde_json::from_str(&stdout(&first)).expect("valid JSON");
        assert_eq!(value["scenario"], serde_json::json!(name));
        assert_eq!(value["summary"]["ok"], serde_json::json!(true));
        let second = walker_ext(&["run", name, "--format", "json"]);
        assert_eq!(first.stdout, second.stdout, "{name} JSON determinism");
    }
}

#[test]
fn canonical_print_round_trips_every_builtin() {
    let dir = tempfile::tempdir().expect("tempdir");
    for name in BUILTINS {
        let once = walker_ext(&["print", name]);
        assert!(once.status.success(), "print {name}");
        let canonical = stdout(&once);
        let path = write_scenario(dir.path(), &format!("{name}.walker"), &canonical);
        let twice = walker_ext(&["print", &path]);
        assert!(twice.status.success(), "reprint {name}");
        assert_eq!(canonical, stdout(&twice), "canonical form of {name} is a fixed point");
    }
}

#[test]
fn scenario_files_run_from_disk() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_scenario(
        dir.path(),
        "flat.walker",
        "dim = 2\n\
         construction = extension\n\
         connection { }\n\
         command curvature { }\n\
         command einstein { }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains(&format!("scenario: {path}")));
    assert!(text.contains("metric: B[1,1] = 0"));
    assert!(text.contains("ricci_flat: yes"));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_scenario(
        dir.path(),
        "bad.walker",
        "dim = 2\nconstruction = extension\nconnection { Gamma[9,1,1] = x1 }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 3"), "stderr:\n{err}");
    assert!(err.contains("out of range"), "stderr:\n{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_target_exits_2() {
    let out = walker_ext(&["run", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("built-in"), "{}", stderr(&out));
}

#[test]
fn failed_expectation_exits_1_with_failing_section() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_scenario(
        dir.path(),
        "fail.walker",
        "dim = 2\n\
         construction = modified_c\n\
         c = 1\n\
         command einstein { expect = no }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("einstein: yes"), "{text}");
    assert!(text.contains("verdict: FAIL"), "{text}");
    assert!(text.contains("summary: FAIL (0/1 verdict commands passed)"), "{text}");
}

#[test]
fn command_errors_do_not_abort_later_commands() {
    let dir = tempfile::tempdir().expect("tempdir");
    // Self-duality needs a four-dimensional metric; dim = 3 makes the first
    // command fail at runtime while the second still runs.
    let path = write_scenario(
        dir.path(),
        "mixed.walker",
        "dim = 3\n\
         construction = modified_c\n\
         c = 1\n\
         command selfdual { }\n\
         command einstein { }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("verdict: ERROR"), "{text}");
    assert!(text.contains("command: einstein"), "{text}");
    assert!(text.contains("einstein: yes"), "{text}");
    assert!(text.contains("(1/2 verdict commands passed)"), "{text}");
}

#[test]
fn seed_flag_overrides_sampling() {
    let default_run = walker_ext(&["run", "osserman-33"]);
    let seeded = walker_ext(&["run", "osserman-33", "--seed", "12345"]);
    assert_eq!(default_run.status.code(), Some(0));
    assert_eq!(seeded.status.code(), Some(0), "alternate seed still passes");
    let text = stdout(&seeded);
    assert!(text.contains("seed: 12345"), "{text}");
    assert_ne!(default_run.stdout, seeded.stdout);
}

#[test]
fn jacobi_command_reports_pinned_operator_data() {
    let dir = tempfile::tempdir().expect("tempdir");
    // The explicit vector is a unit spacelike direction whose Jacobi
    // operator is diagonalizable with eigenvalues 0, 1/4 (four times), 1.
    let path = write_scenario(
        dir.path(),
        "jacobi.walker",
        "dim = 3\n\
         construction = modified_c\n\
         connection { Gamma[1,1,3] = x2 }\n\
         c = 1\n\
         command jacobi { point = (1, 2, 3 ; 1/2, -1, 1/3), vector = (0, 0, 1, 0, 0, 4/9) }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("epsilon: 1"), "{text}");
    assert!(
        text.contains("jordan_profile: 0:[1] 1/4:[1 1 1 1] 1:[1]"),
        "{text}"
    );
    assert!(text.contains("verdict: INFO"), "{text}");
    assert!(text.contains("summary: PASS (0/0 verdict commands passed)"), "{text}");
}

#[test]
fn jordan_command_accepts_injected_directions() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_scenario(
        dir.path(),
        "inject.walker",
        "dim = 3\n\
         construction = modified_c\n\
         connection { Gamma[1,1,3] = x2 }\n\
         c = 1\n\
         command jordan { expect = no, point = (1, 2, 3 ; 1/2, -1, 1/3), vector = (0, 0, 1, 0, 0, 4/9) }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("extra_samples: 1"), "{text}");
    assert!(text.contains("constant: no"), "{text}");
}

#[test]
fn selfdual_build_construction_runs() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_scenario(
        dir.path(),
        "family.walker",
        "dim = 2\n\
         construction = selfdual_build\n\
         connection { Gamma[1,1,1] = x2 }\n\
         X { [1] = x1 }\n\
         T { [1,1] = 2, [2,2] = 2 }\n\
         Phi { [1,2] = x1*x2 }\n\
         command selfdual { }\n\
         command curvature { }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(0), "stderr:\n{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("self_dual: yes"), "{text}");
}

#[test]
fn construction_failures_are_reported() {
    let dir = tempfile::tempdir().expect("tempdir");
    // The Einstein family needs a connection with nonzero symmetrized Ricci.
    let path = write_scenario(
        dir.path(),
        "flat-typeii.walker",
        "dim = 2\n\
         construction = type_ii\n\
         tau = 24\n\
         command einstein { }\n",
    );
    let out = walker_ext(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("error:"), "{text}");
    assert!(text.contains("summary: FAIL (metric construction failed)"), "{text}");
}
