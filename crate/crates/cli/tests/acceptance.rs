//! Acceptance checks. Each test writes one `criterion N ...: PASS|FAIL` line
//! straight to stderr (bypassing output capture) and fails when its
//! criterion is not met.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use asm_eval::corpus::{bundled_corpus_root, load_corpus};
use asm_eval::harness::{reference_output, CaseEnv};
use asm_eval::metrics::{success_at_1, GroupBy};
use asm_eval::pipeline::{PipelineError, ScratchDir, SpliceMode, Template, ToolchainSpec};
use asm_eval::runstore::{emit_summary, read_records};
use asm_eval::verdict::{classify_build_failure, classify_exec_failure, compare_outputs, RuleTable};
use asm_eval::{ErrorCategory, TargetArch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, name: &str, started: Instant, limit: Option<Duration>, outcome: Result<String, String>) {
    let elapsed = started.elapsed();
    let outcome = match (outcome, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.1?}, limit {l:?}")),
        (o, _) => o,
    };
    let line = match &outcome {
        Ok(detail) => format!("criterion {n} {name}: PASS ({detail}; {elapsed:.2?})"),
        Err(why) => format!("criterion {n} {name}: FAIL ({why}; {elapsed:.2?})"),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    if let Err(why) = outcome {
        panic!("criterion {n} failed: {why}");
    }
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asm-eval")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn fixtures() -> PathBuf {
    asm_eval::data_dir().join("fixtures")
}

fn host() -> TargetArch {
    TargetArch::host().expect("supported host")
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

#[test]
fn criterion_1_metric_identity() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut pairs: Vec<(u64, u64)> = (0..1000)
        .map(|_| {
            let n = rng.gen_range(1..=10_000u64);
            (rng.gen_range(0..=n), n)
        })
        .collect();
    for n in [1, 2, 3, 9_999, 10_000] {
        pairs.extend([(0, n), (n, n)]);
    }
    let check = || -> Result<String, String> {
        for &(c, n) in &pairs {
            let got = success_at_1(c, n).map_err(|e| e.to_string())?;
            let plain = c as f64 / n as f64;
            if ulps(got, plain) > 1 {
                return Err(format!("{c}/{n}: {got} vs {plain}"));
            }
            if (c == 0 && got != 0.0) || (c == n && got != 1.0) {
                return Err(format!("boundary {c}/{n} gave {got}"));
            }
        }
        Ok(format!("{} pairs within 1 ulp, boundaries exact", pairs.len()))
    };
    report(1, "metric identity", t, Some(Duration::from_secs(1)), check());
}

#[test]
fn criterion_2_host_round_trip() {
    let t = Instant::now();
    let out = cli(&["smoke", host().as_str()]);
    let passed = text(&out).lines().filter(|l| l.starts_with("ok ")).count();
    let r = if out.status.code() == Some(0) && passed == 20 {
        Ok(format!("{passed}/20 cases Success on {}", host()))
    } else {
        Err(format!("exit {:?}, {passed} ok:\n{}", out.status.code(), text(&out)))
    };
    report(2, "host smoke round trip", t, Some(Duration::from_secs(120)), r);
}

#[test]
fn criterion_3_differential_baseline() {
    let t = Instant::now();
    let out = cli(&["validate-corpus"]);
    let r = if out.status.code() == Some(0) && text(&out).contains("20 of 20 cases valid") {
        Ok("gcc and clang agree on 20/20 cases".to_string())
    } else {
        Err(format!("exit {:?}:\n{}", out.status.code(), text(&out)))
    };
    report(3, "gcc/clang differential baseline", t, Some(Duration::from_secs(120)), r);
}

fn label_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

#[test]
fn criterion_4_classifier_regression() {
    let t = Instant::now();
    let check = || -> Result<String, String> {
        let rules = RuleTable::bundled();
        let diag = fixtures().join("diagnostics");
        let rows = label_rows(&diag.join("labels.txt"));
        let mut agree = 0;
        let mut families = std::collections::BTreeMap::<ErrorCategory, std::collections::BTreeSet<String>>::new();
        for row in &rows {
            let want: ErrorCategory = row[1].parse()?;
            let got = classify_build_failure(&fs::read_to_string(diag.join(format!("{}.txt", row[0]))).unwrap(), rules);
            if got.category != want {
                return Err(format!("{}: labelled {want}, classified {}", row[0], got.category));
            }
            families.entry(want).or_default().insert(row[2].split('-').next().unwrap().to_string());
            agree += 1;
        }
        for c in ErrorCategory::TABLE.into_iter().filter(|c| c.is_compile()) {
            if families.get(&c).map_or(0, |f| f.len()) < 2 {
                return Err(format!("{c} lacks two toolchain families"));
            }
        }
        let exec = fixtures().join("exec");
        let mut exec_seen = Vec::new();
        for row in label_rows(&exec.join("labels.txt")) {
            let want: ErrorCategory = row[1].parse()?;
            let v: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(exec.join(format!("{}.json", row[0]))).unwrap()).unwrap();
            let exit = serde_json::from_value(v["exit_kind"].clone()).map_err(|e| e.to_string())?;
            let cmp = compare_outputs(v["stdout"].as_str().unwrap(), v["expected"].as_str().unwrap(), 1e-4);
            let got = classify_exec_failure(&exit, &cmp).map(|c| c.category);
            if got != Some(want) {
                return Err(format!("{}: labelled {want}, classified {got:?}", row[0]));
            }
            exec_seen.push(want);
        }
        for c in [ErrorCategory::SegmentationFault, ErrorCategory::IllegalInstruction, ErrorCategory::WrongResult] {
            if !exec_seen.contains(&c) {
                return Err(format!("no execution fixture for {c}"));
            }
        }
        if agree < 15 {
            return Err(format!("only {agree} diagnostic fixtures"));
        }
        Ok(format!("{agree} diagnostics and {} executions, 100% agreement", exec_seen.len()))
    };
    report(4, "classifier regression", t, Some(Duration::from_secs(1)), check());
}

#[test]
fn criterion_5_scripted_end_to_end() {
    let t = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    let manifest = fixtures().join("manifests/scripted_saxpy.txt");
    let check = || -> Result<String, String> {
        if host() != TargetArch::X86_64 {
            return Err(format!("canned responses are x86-64 assembly; host is {}", host()));
        }
        let out = cli(&["run", "--manifest", manifest.to_str().unwrap(), "--runs-dir", runs.to_str().unwrap()]);
        if out.status.code() != Some(0) {
            return Err(format!("run exited {:?}: {}", out.status.code(), text(&out)));
        }
        let records = read_records(&runs.join("scripted-saxpy/records.jsonl")).map_err(|e| e.to_string())?;
        let verdicts: Vec<String> = records
            .iter()
            .map(|r| format!("{:?}/{}", r.verdict.kind, r.verdict.category.map(|c| c.slug()).unwrap_or("-")))
            .collect();
        if verdicts != ["Success/-", "CompileError/instruction_error", "ExecError/wrong_result"] {
            return Err(format!("verdicts {verdicts:?}"));
        }
        let csv = fs::read_to_string(runs.join("scripted-saxpy/reports/summary.csv")).unwrap();
        if csv != "group,n_total,n_exec,n_succ,success_at_1,exec_corr_rate\nsaxpy,3,2,1,0.3333,0.5000\n" {
            return Err(format!("summary {csv:?}"));
        }
        Ok("Success, CompileError/Instruction Error, ExecError/Wrong Result; 3/2/1, 0.3333, R=0.5".into())
    };
    report(5, "scripted end-to-end run", t, Some(Duration::from_secs(30)), check());
}

#[test]
fn criterion_6_replay_determinism() {
    let t = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let p = |rel: &str| tmp.path().join(rel).to_str().unwrap().to_string();
    let check = || -> Result<String, String> {
        if host() != TargetArch::X86_64 {
            return Err(format!("canned responses are x86-64 assembly; host is {}", host()));
        }
        let manifest = tmp.path().join("m.txt");
        fs::write(
            &manifest,
            format!(
                "run_id=recorded\narch=x86_64\ncases=saxpy\nsamples_per_case=3\nprovider.kind=scripted\nprovider.model=canned\nprovider.script={}\nprovider.archive={}\n",
                fixtures().join("responses/scripted").display(),
                p("archive")
            ),
        )
        .unwrap();
        let out = cli(&["run", "--manifest", &p("m.txt"), "--runs-dir", &p("orig")]);
        if out.status.code() != Some(0) {
            return Err(format!("recording run failed: {}", text(&out)));
        }
        for dir in ["a", "b"] {
            let out = cli(&[
                "replay", "recorded", "--archive", &p("archive"), "--from-runs-dir", &p("orig"), "--runs-dir", &p(dir),
                "--run-id", "replayed", "--canonical",
            ]);
            if out.status.code() != Some(0) {
                return Err(format!("replay into {dir} failed: {}", text(&out)));
            }
        }
        let mut compared = vec!["records.jsonl".to_string()];
        for e in fs::read_dir(tmp.path().join("a/replayed/reports")).unwrap() {
            compared.push(format!("reports/{}", e.unwrap().file_name().to_string_lossy()));
        }
        for rel in &compared {
            let a = fs::read(tmp.path().join("a/replayed").join(rel)).map_err(|e| format!("{rel}: {e}"))?;
            let b = fs::read(tmp.path().join("b/replayed").join(rel)).map_err(|e| format!("{rel}: {e}"))?;
            if a != b {
                return Err(format!("{rel} differs between replays"));
            }
        }
        Ok(format!("{} files byte-identical across two replays", compared.len()))
    };
    report(6, "replay determinism", t, None, check());
}

#[test]
fn criterion_7_per_arch_table() {
    let t = Instant::now();
    let check = || -> Result<String, String> {
        let mut records = Vec::new();
        // Hand-computed from the fixture plan: n_succ / 200.
        let expected = [("x86_64", 57, "0.2850"), ("aarch64", 71, "0.3550"), ("riscv64", 65, "0.3250")];
        for (arch, n_succ, s1) in expected {
            let r = read_records(&fixtures().join(format!("records/{arch}.jsonl"))).map_err(|e| e.to_string())?;
            if r.len() != 200 {
                return Err(format!("{arch} fixture has {} records", r.len()));
            }
            let one = emit_summary(&r, GroupBy::ARCH);
            let g = &one.groups[0];
            if g.n_succ != n_succ || format!("{:.4}", g.success_at_1) != s1 {
                return Err(format!("{arch}: {}/{} = {:.4}, expected {s1}", g.n_succ, g.n_total, g.success_at_1));
            }
            records.extend(r);
        }
        let table = emit_summary(&records, GroupBy::ARCH).table;
        let rows: Vec<&str> = table.lines().skip(2).collect();
        if rows.len() != 3 || !table.lines().next().unwrap_or("").contains("success_at_1") {
            return Err(format!("table shape:\n{table}"));
        }
        for (row, (arch, _, s1)) in rows.iter().zip(expected) {
            let cells: Vec<&str> = row.split_whitespace().collect();
            if cells.first() != Some(&arch) || cells.get(4) != Some(&s1) {
                return Err(format!("row `{row}` should be {arch} with success@1 {s1}"));
            }
        }
        Ok("0.2850 / 0.3550 / 0.3250 over three rows".into())
    };
    report(7, "per-arch success table", t, None, check());
}

#[test]
fn criterion_8_cross_arch() {
    let t = Instant::now();
    let check = || -> Result<String, String> {
        let mut notes = Vec::new();
        for arch in [TargetArch::Riscv64, TargetArch::Aarch64] {
            if arch == host() {
                continue;
            }
            let tc = ToolchainSpec::detect(arch);
            let out = cli(&["smoke", arch.as_str(), "--cases", "saxpy,relu"]);
            match tc.require_runnable() {
                Ok(()) => {
                    if out.status.code() != Some(0) {
                        return Err(format!("{arch} toolchain present but smoke failed:\n{}", text(&out)));
                    }
                    notes.push(format!("{arch}: saxpy, relu pass"));
                }
                Err(PipelineError::EmulatorMissing(_)) => {
                    if out.status.code() != Some(2) || !text(&out).contains("no user-mode emulator") {
                        return Err(format!("{arch}: expected a missing-emulator exit 2, got {:?}:\n{}", out.status.code(), text(&out)));
                    }
                    notes.push(format!("{arch}: emulator missing, exit 2"));
                }
                Err(e) => return Err(format!("{arch}: {e}")),
            }
        }
        Ok(notes.join("; "))
    };
    report(8, "cross-arch smoke or graceful degradation", t, None, check());
}

#[test]
fn criterion_9_robustness_fuzz() {
    let t = Instant::now();
    let check = || -> Result<String, String> {
        let corpus = load_corpus(&bundled_corpus_root()).map_err(|e| e.to_string())?;
        let case = corpus.get("relu").ok_or("relu missing")?;
        let tc = ToolchainSpec::detect(host());
        let tmp = tempfile::tempdir().unwrap();
        let refdir = ScratchDir::create(&tmp.path().join("ref"), false).map_err(|e| e.to_string())?;
        let expected = reference_output(case, &tc, &refdir).map_err(|e| e.to_string())?;
        let template = Template::build(case, &tc, &refdir).map_err(|e| e.to_string())?;
        let env = CaseEnv {
            case,
            toolchain: &tc,
            template: Some(&template),
            splice_mode: SpliceMode::SingleUnitSplice,
            expected: &expected,
            rules: RuleTable::bundled(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let soup = ["mov", "add", ".globl relu", "relu:", "ret", "%rax", "x0", "a0", ",", "#", "```", "\n", "\t", " ", ".L1:", "$1", "[", "]"];
        let mut built = 0;
        for i in 0..500 {
            let len = rng.gen_range(0..400);
            let bytes: Vec<u8> = match i % 3 {
                0 => (0..len).map(|_| rng.gen()).collect(),
                1 => {
                    let mut b = b"```asm\n".to_vec();
                    b.extend((0..len).map(|_| rng.gen::<u8>()));
                    b.extend(b"\n```\n");
                    b
                }
                _ => (0..len / 4).flat_map(|_| soup[rng.gen_range(0..soup.len())].bytes()).collect(),
            };
            let raw = String::from_utf8_lossy(&bytes).into_owned();
            let scratch = ScratchDir::create(&tmp.path().join(i.to_string()), false).map_err(|e| e.to_string())?;
            let eval = catch_unwind(AssertUnwindSafe(|| env.evaluate_response(&raw, &scratch)))
                .map_err(|_| format!("harness panicked on input {i}"))?;
            if eval.verdict.category.is_none() && !eval.verdict.is_success() {
                return Err(format!("input {i} got a failure verdict without a category"));
            }
            built += usize::from(eval.build.is_some());
        }
        Ok(format!("500 inputs, every one judged, {built} reached the assembler"))
    };
    report(9, "robustness fuzz", t, None, check());
}
