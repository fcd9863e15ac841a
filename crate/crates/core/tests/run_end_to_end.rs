//! Full runs on the host through the scripted and replay providers.

use std::fs;
use std::path::{Path, PathBuf};

use asm_eval::harness::{replay, run_experiment, RunOptions};
use asm_eval::{ErrorCategory, RunManifest, TargetArch, VerdictKind};

fn host_is_x86_64() -> bool {
    TargetArch::host() == Some(TargetArch::X86_64)
}

fn responses() -> PathBuf {
    asm_eval::data_dir().join("fixtures/responses/scripted/saxpy")
}

fn manifest(dir: &Path, body: &str) -> RunManifest {
    let path = dir.join("manifest.txt");
    fs::write(&path, body).unwrap();
    RunManifest::load(&path).unwrap()
}

fn scripted(dir: &Path, script: &Path, extra: &str) -> RunManifest {
    manifest(
        dir,
        &format!(
            "run_id=e2e\narch=x86_64\ncases=saxpy\nsamples_per_case=3\nprovider.kind=scripted\nprovider.model=canned\nprovider.script={}\n{extra}",
            script.display()
        ),
    )
}

fn opts(runs: &Path) -> RunOptions {
    let mut o = RunOptions::new(runs);
    o.jobs = 2;
    o.canonical = true;
    o
}

#[test]
fn canned_responses_get_the_expected_verdicts() {
    if !host_is_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let m = scripted(tmp.path(), &asm_eval::data_dir().join("fixtures/responses/scripted"), "");
    let out = run_experiment(&m, &opts(&tmp.path().join("runs"))).unwrap();

    let got: Vec<_> = out.records.iter().map(|r| (r.sample_index, r.verdict.kind, r.verdict.category)).collect();
    assert_eq!(
        got,
        [
            (0, VerdictKind::Success, None),
            (1, VerdictKind::CompileError, Some(ErrorCategory::InstructionError)),
            (2, VerdictKind::ExecError, Some(ErrorCategory::WrongResult)),
        ]
    );
    let g = &out.summary.groups[0];
    assert_eq!((g.n_total, g.n_exec, g.n_succ), (3, 2, 1));
    assert!((g.success_at_1 - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(g.exec_corr_rate, Some(0.5));

    let reports = out.run_dir.join("reports");
    assert_eq!(
        fs::read_to_string(reports.join("summary.csv")).unwrap(),
        "group,n_total,n_exec,n_succ,success_at_1,exec_corr_rate\nsaxpy,3,2,1,0.3333,0.5000\n"
    );
    let hist = fs::read_to_string(reports.join("histogram.csv")).unwrap();
    assert!(hist.contains("instruction_error,1\n") && hist.contains("wrong_result,1\n"), "{hist}");
    assert!(out.run_dir.join("expected/saxpy.txt").is_file());
    assert!(!out.run_dir.join("scratch").exists());
}

#[test]
fn replaying_an_archive_is_byte_identical() {
    if !host_is_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let archive = tmp.path().join("archive");
    let m = scripted(
        tmp.path(),
        &asm_eval::data_dir().join("fixtures/responses/scripted"),
        &format!("provider.archive={}\n", archive.display()),
    );
    run_experiment(&m, &opts(&tmp.path().join("runs"))).unwrap();
    assert_eq!(fs::read_dir(&archive).unwrap().count(), 6, "three responses plus sidecars");

    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let o = RunOptions { run_id: Some("again".into()), runs_dir: tmp.path().join(name), ..opts(Path::new("")) };
        outputs.push(replay(&tmp.path().join("runs"), "e2e", &archive, &o).unwrap());
    }
    let read = |o: &asm_eval::harness::RunOutcome, rel: &str| fs::read(o.run_dir.join(rel)).unwrap();
    for rel in [
        "records.jsonl",
        "reports/summary.csv",
        "reports/summary_arch.csv",
        "reports/histogram.csv",
        "reports/histogram_occurrences.csv",
        "reports/scatter.csv",
    ] {
        assert_eq!(read(&outputs[0], rel), read(&outputs[1], rel), "{rel} differs");
    }
    let kinds: Vec<_> = outputs[0].records.iter().map(|r| r.verdict.kind).collect();
    assert_eq!(kinds, [VerdictKind::Success, VerdictKind::CompileError, VerdictKind::ExecError]);
}

#[test]
fn replay_without_archive_entry_is_a_generation_error() {
    if !host_is_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let m = manifest(
        tmp.path(),
        &format!(
            "run_id=miss\narch=x86_64\ncases=relu\nsamples_per_case=1\nprovider.kind=replay\nprovider.model=m\nprovider.archive={}\n",
            empty.display()
        ),
    );
    let out = run_experiment(&m, &opts(&tmp.path().join("runs"))).unwrap();
    let r = &out.records[0];
    assert_eq!(r.verdict.category, Some(ErrorCategory::OtherCompileError));
    let err = r.generation_error.as_deref().unwrap();
    assert!(err.contains(r.request_digest.as_deref().unwrap()), "{err}");
}

#[test]
fn feedback_round_repairs_a_sample() {
    if !host_is_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let script = tmp.path().join("script");
    fs::create_dir_all(script.join("saxpy")).unwrap();
    fs::copy(responses().join("1.txt"), script.join("saxpy/0.txt")).unwrap();
    fs::copy(responses().join("0.txt"), script.join("saxpy/0.1.txt")).unwrap();
    fs::copy(responses().join("2.txt"), script.join("saxpy/1.txt")).unwrap();
    let m = manifest(
        tmp.path(),
        &format!(
            "run_id=fb\narch=x86_64\ncases=saxpy\nsamples_per_case=2\nfeedback_rounds=2\nprovider.kind=scripted\nprovider.model=canned\nprovider.script={}\n",
            script.display()
        ),
    );
    let out = run_experiment(&m, &opts(&tmp.path().join("runs"))).unwrap();
    let (fixed, stuck) = (&out.records[0], &out.records[1]);
    assert!(fixed.verdict.is_success());
    assert_eq!(fixed.attempts, 2);
    assert_eq!(fixed.initial_verdict.as_ref().unwrap().category, Some(ErrorCategory::InstructionError));
    // The scripted table has no repair for sample 1, so every round repeats it.
    assert_eq!(stuck.attempts, 3);
    assert_eq!(stuck.verdict.category, Some(ErrorCategory::WrongResult));
}

#[test]
fn missing_script_entries_still_produce_records() {
    if !host_is_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let script = tmp.path().join("script");
    fs::create_dir_all(script.join("saxpy")).unwrap();
    fs::copy(responses().join("0.txt"), script.join("saxpy/0.txt")).unwrap();
    let m = scripted(tmp.path(), &script, "");
    let out = run_experiment(&m, &opts(&tmp.path().join("runs"))).unwrap();
    assert_eq!(out.records.len(), 3);
    assert!(out.records[0].verdict.is_success());
    for r in &out.records[1..] {
        assert_eq!(r.verdict.category, Some(ErrorCategory::OtherCompileError));
        assert!(r.generation_error.as_deref().unwrap().contains("no response"));
        assert!(r.build.is_none());
    }
}

#[test]
fn run_ids_are_not_reused() {
    if !host_is_x86_64() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let m = scripted(tmp.path(), &asm_eval::data_dir().join("fixtures/responses/scripted"), "");
    let o = opts(&tmp.path().join("runs"));
    run_experiment(&m, &o).unwrap();
    assert!(run_experiment(&m, &o).is_err());
}
