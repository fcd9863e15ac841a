use std::collections::BTreeMap;

use super::SampleRecord;
use crate::metrics::{aggregate, GroupBy, MetricsSummary};
use crate::verdict::{ErrorCategory, RuleTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HistogramMode {
    /// One count per failed sample, under its verdict category.
    #[default]
    PerSample,
    /// Every matching diagnostic line counts; execution failures count once.
    PerOccurrence,
}

/// Failure counts per category: the nine table rows in table order, then
/// the two `Other*` buckets. Every row is present, zero or not.
pub fn emit_error_histogram(records: &[SampleRecord], mode: HistogramMode, rules: &RuleTable) -> Vec<(ErrorCategory, u64)> {
    let mut counts: BTreeMap<ErrorCategory, u64> = ErrorCategory::ALL.iter().map(|c| (*c, 0)).collect();
    for r in records {
        let Some(primary) = r.verdict.category else { continue };
        match (mode, &r.build) {
            (HistogramMode::PerOccurrence, Some(b)) if !b.succeeded => {
                for (c, n) in rules.occurrences(&b.diagnostics) {
                    *counts.entry(c).or_default() += n;
                }
            }
            _ => *counts.entry(primary).or_default() += 1,
        }
    }
    ErrorCategory::ALL.iter().map(|c| (*c, counts[c])).collect()
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
}

pub fn histogram_csv(rows: &[(ErrorCategory, u64)]) -> String {
    let mut out = vec![vec!["category".to_string(), "count".to_string()]];
    out.extend(rows.iter().map(|(c, n)| vec![c.slug().to_string(), n.to_string()]));
    csv_string(out)
}

pub fn histogram_table(rows: &[(ErrorCategory, u64)]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|(c, n)| vec![c.name().to_string(), n.to_string()]).collect();
    align(&["Error", "Count"], &cells)
}

fn fixed4(v: f64) -> String {
    format!("{v:.4}")
}

fn rate(v: Option<f64>) -> String {
    v.map(fixed4).unwrap_or_else(|| "null".to_string())
}

fn align(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                s.push_str(&format!("{c:<w$}"));
            } else {
                s.push_str(&format!("  {c:>w$}"));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    pub groups: Vec<MetricsSummary>,
    pub table: String,
    pub csv: String,
}

/// Per-group metrics as an aligned text table and as CSV with header
/// `group,n_total,n_exec,n_succ,success_at_1,exec_corr_rate`.
pub fn emit_summary(records: &[SampleRecord], group_by: GroupBy) -> SummaryReport {
    let groups = aggregate(records, group_by);
    let cells: Vec<Vec<String>> = groups
        .iter()
        .map(|g| {
            vec![
                g.group_key.to_string(),
                g.n_total.to_string(),
                g.n_exec.to_string(),
                g.n_succ.to_string(),
                fixed4(g.success_at_1),
                rate(g.exec_corr_rate),
            ]
        })
        .collect();
    let header = ["group", "n_total", "n_exec", "n_succ", "success_at_1", "exec_corr_rate"];
    let mut rows = vec![header.iter().map(|h| h.to_string()).collect()];
    rows.extend(cells.iter().cloned());
    SummaryReport { table: align(&header, &cells), csv: csv_string(rows), groups }
}

/// One row per (case, arch), sorted: `case,arch,n_exec,exec_corr_rate`.
pub fn emit_scatter_data(records: &[SampleRecord]) -> String {
    let by = GroupBy { case: true, arch: true, ..GroupBy::OVERALL };
    let mut rows = vec![["case", "arch", "n_exec", "exec_corr_rate"].map(String::from).to_vec()];
    for g in aggregate(records, by) {
        rows.push(vec![
            g.group_key.case.clone().unwrap_or_default(),
            g.group_key.arch.map(|a| a.to_string()).unwrap_or_default(),
            g.n_exec.to_string(),
            rate(g.exec_corr_rate),
        ]);
    }
    csv_string(rows)
}
