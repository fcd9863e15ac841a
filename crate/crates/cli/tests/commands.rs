//! Exit codes and outputs of the subcommands.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asm-eval")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn on_x86_64() -> bool {
    cfg!(target_arch = "x86_64")
}

fn scripted_run(runs: &Path) {
    let manifest = asm_eval::data_dir().join("fixtures/manifests/scripted_saxpy.txt");
    let out = cli(&["run", "--manifest", manifest.to_str().unwrap(), "--runs-dir", runs.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("saxpy        3       2       1        0.3333          0.5000"), "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cli(&[]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["run"]).status.code(), Some(2));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_manifests_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let m = tmp.path().join("m.txt");
    let runs = tmp.path().join("runs");
    for (body, needle) in [
        ("run_id=x\nprovider.kind=scripted\n", "provider.model"),
        ("run_id=x\nprovider.kind=scripted\nprovider.model=m\nprovider.script=s\ncolour=blue\n", "colour"),
        ("run_id=x\nprovider.kind=carrier-pigeon\nprovider.model=m\n", "provider.kind"),
        ("run_id=x\narch=mips\nprovider.kind=scripted\nprovider.model=m\nprovider.script=s\n", "arch"),
    ] {
        fs::write(&m, body).unwrap();
        let out = cli(&["run", "--manifest", m.to_str().unwrap(), "--runs-dir", runs.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}");
        assert!(stderr(&out).contains(needle), "{body}: {}", stderr(&out));
    }
    let out = cli(&["run", "--manifest", tmp.path().join("absent.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_credential_is_a_configuration_error() {
    let tmp = tempfile::tempdir().unwrap();
    let m = tmp.path().join("m.txt");
    fs::write(
        &m,
        "run_id=live\ncases=relu\nsamples_per_case=1\nprovider.kind=http-chat\nprovider.model=m\nprovider.endpoint=http://127.0.0.1:9/v1/chat/completions\nprovider.api_key_env=ASM_EVAL_SURELY_UNSET\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_asm-eval"))
        .args(["run", "--manifest", m.to_str().unwrap(), "--runs-dir", tmp.path().join("runs").to_str().unwrap()])
        .env_remove("ASM_EVAL_SURELY_UNSET")
        .output()
        .unwrap();
    // The provider is only contacted per sample, so the run completes and
    // records the failure against the sample.
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let records = fs::read_to_string(tmp.path().join("runs/live/records.jsonl")).unwrap();
    assert!(records.contains("ASM_EVAL_SURELY_UNSET"), "{records}");
}

#[test]
fn report_and_classify_a_stored_run() {
    if !on_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    scripted_run(&runs);
    let r = runs.to_str().unwrap();

    let out = cli(&["report", "scripted-saxpy", "--runs-dir", r, "--group-by", "arch,model"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("canned/x86_64"), "{}", stdout(&out));
    assert!(stdout(&out).contains("Instruction Error"));
    let csv = fs::read_to_string(runs.join("scripted-saxpy/reports/summary_model_arch.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("canned/x86_64,3,2,1,0.3333,0.5000"));

    let out = cli(&["classify", "scripted-saxpy", "--runs-dir", r]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("3 unchanged, 0 changed"), "{}", stdout(&out));

    assert_eq!(cli(&["report", "nope", "--runs-dir", r]).status.code(), Some(2));
    assert_eq!(cli(&["report", "scripted-saxpy", "--runs-dir", r, "--group-by", "colour"]).status.code(), Some(2));
}

#[test]
fn rerunning_the_same_run_id_is_refused() {
    if !on_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    scripted_run(&runs);
    let manifest = asm_eval::data_dir().join("fixtures/manifests/scripted_saxpy.txt");
    let out = cli(&["run", "--manifest", manifest.to_str().unwrap(), "--runs-dir", runs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("already"), "{}", stderr(&out));
}

#[test]
fn smoke_rejects_unknown_cases_and_arches() {
    assert_eq!(cli(&["smoke", "mips"]).status.code(), Some(2));
    let out = cli(&["smoke", "x86_64", "--cases", "no-such-case"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-case"));
}

#[test]
fn broken_corpus_fails_validation() {
    if !on_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let case = tmp.path().join("bad");
    fs::create_dir(&case).unwrap();
    fs::write(case.join("case.txt"), "kernel_symbol=bump\ndomain_tag=linear-algebra\ntolerance=0\ntimeout_ms=5000\n").unwrap();
    fs::write(case.join("kernel.c"), "int bump(int x) { return x + 1; }\n").unwrap();
    // The driver prints different values under gcc and clang.
    fs::write(
        case.join("main.c"),
        "#include <stdio.h>\nint bump(int x);\nint main(void) {\n#ifdef __clang__\n  printf(\"%d\\n\", bump(1));\n#else\n  printf(\"%d\\n\", bump(2));\n#endif\n  return 0;\n}\n",
    )
    .unwrap();
    let out = cli(&["validate-corpus", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("FAIL  bad"), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 of 1 cases valid"));
}
