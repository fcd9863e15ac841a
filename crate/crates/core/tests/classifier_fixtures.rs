//! Captured toolchain diagnostics and program runs must classify exactly as
//! hand-labelled.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use asm_eval::pipeline::ExitKind;
use asm_eval::verdict::{classify_build_failure, classify_exec_failure, compare_outputs, RuleTable};
use asm_eval::ErrorCategory;

fn fixtures() -> PathBuf {
    asm_eval::data_dir().join("fixtures")
}

fn labels(path: PathBuf) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

#[test]
fn diagnostics_match_hand_labels() {
    let dir = fixtures().join("diagnostics");
    let rules = RuleTable::bundled();
    let rows = labels(dir.join("labels.txt"));
    assert!(rows.len() >= 15, "only {} diagnostic fixtures", rows.len());

    let mut wrong = Vec::new();
    for row in &rows {
        let [name, label, _toolchain] = row.as_slice() else { panic!("bad label row {row:?}") };
        let expected: ErrorCategory = label.parse().unwrap();
        let text = fs::read_to_string(dir.join(format!("{name}.txt"))).unwrap();
        assert!(!text.trim().is_empty(), "{name} is empty");
        let got = classify_build_failure(&text, rules);
        if got.category != expected {
            wrong.push(format!("{name}: expected {expected}, got {} ({})", got.category, got.evidence));
        }
    }
    assert!(wrong.is_empty(), "misclassified:\n{}", wrong.join("\n"));
}

#[test]
fn every_build_category_is_covered_by_two_toolchains() {
    let rows = labels(fixtures().join("diagnostics/labels.txt"));
    let mut seen: BTreeMap<ErrorCategory, BTreeSet<String>> = BTreeMap::new();
    for row in &rows {
        let family = row[2].split('-').next().unwrap().to_string();
        seen.entry(row[1].parse().unwrap()).or_default().insert(family);
    }
    for c in ErrorCategory::TABLE.into_iter().filter(|c| c.is_compile()) {
        let n = seen.get(&c).map_or(0, BTreeSet::len);
        assert!(n >= 2, "{c} is covered by {n} toolchain families");
    }
}

#[test]
fn every_fixture_file_is_labelled() {
    let dir = fixtures().join("diagnostics");
    let labelled: BTreeSet<String> = labels(dir.join("labels.txt")).into_iter().map(|r| r[0].clone()).collect();
    for entry in fs::read_dir(&dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if let Some(stem) = name.strip_suffix(".txt").filter(|s| *s != "labels") {
            assert!(labelled.contains(stem), "{name} has no label");
        }
    }
}

#[test]
fn executions_match_hand_labels() {
    let dir = fixtures().join("exec");
    let rows = labels(dir.join("labels.txt"));
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let expected: ErrorCategory = row[1].parse().unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join(format!("{}.json", row[0]))).unwrap()).unwrap();
        let exit: ExitKind = serde_json::from_value(v["exit_kind"].clone()).unwrap();
        let cmp = compare_outputs(v["stdout"].as_str().unwrap(), v["expected"].as_str().unwrap(), 1e-4);
        let got = classify_exec_failure(&exit, &cmp).expect("fixture is a failure");
        assert_eq!(got.category, expected, "{}", row[0]);
    }
}
