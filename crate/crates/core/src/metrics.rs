//! success@1, the executable-correctness rate, and grouping of samples.
//!
//! With k = 1 the binomial form `1 - C(n - c, 1) / C(n, 1)` collapses to
//! `c / n`. It is still evaluated literally, in exact rational arithmetic,
//! and converted to `f64` once, so the result is the correctly rounded
//! value of `c / n`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::TargetArch;
use crate::verdict::VerdictKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("group keys differ in shape: {0} vs {1}")]
    KeyMismatch(String, String),
    #[error("unknown group-by field `{0}` (expected case, model, arch or prompt)")]
    BadGroupBy(String),
}

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

fn ratio_to_f64(r: Ratio<u128>) -> f64 {
    // Operands stay far below 2^53 for any realistic sample count, so both
    // conversions are exact and the division rounds once.
    *r.numer() as f64 / *r.denom() as f64
}

/// success@1 in its binomial form, `1 - C(n - c, 1) / C(n, 1)`, as an exact
/// fraction.
pub fn success_at_1_exact(n_succ: u64, n_total: u64) -> Result<Ratio<u128>, MetricsError> {
    if n_total == 0 || n_succ > n_total {
        return Err(MetricsError::DomainError(format!("success@1 needs 0 <= n_succ <= n_total, n_total >= 1 (got {n_succ}, {n_total})")));
    }
    let fail = binomial(n_total - n_succ, 1).expect("C(n,1) fits");
    let all = binomial(n_total, 1).expect("C(n,1) fits");
    Ok(Ratio::from_integer(1) - Ratio::new(fail, all))
}

pub fn success_at_1(n_succ: u64, n_total: u64) -> Result<f64, MetricsError> {
    success_at_1_exact(n_succ, n_total).map(ratio_to_f64)
}

/// `n_succ / n_exec`, undefined (`None`) when nothing was executable.
pub fn exec_corr_rate(n_succ: u64, n_exec: u64) -> Result<Option<f64>, MetricsError> {
    if n_succ > n_exec {
        return Err(MetricsError::DomainError(format!("n_succ ({n_succ}) exceeds n_exec ({n_exec})")));
    }
    Ok((n_exec > 0).then(|| ratio_to_f64(Ratio::new(u128::from(n_succ), u128::from(n_exec)))))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_total: u64,
    pub n_exec: u64,
    pub n_succ: u64,
}

impl Counts {
    pub fn add(&mut self, kind: VerdictKind) {
        self.n_total += 1;
        if matches!(kind, VerdictKind::Success | VerdictKind::ExecError) {
            self.n_exec += 1;
        }
        if kind == VerdictKind::Success {
            self.n_succ += 1;
        }
    }

    pub fn merge(&mut self, other: &Counts) {
        self.n_total += other.n_total;
        self.n_exec += other.n_exec;
        self.n_succ += other.n_succ;
    }
}

/// What a sample contributes to aggregation.
pub trait Observation {
    fn case_id(&self) -> &str;
    fn model_name(&self) -> &str;
    fn arch(&self) -> TargetArch;
    fn prompt_version(&self) -> &str;
    fn verdict_kind(&self) -> VerdictKind;
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub case: Option<String>,
    pub model: Option<String>,
    pub arch: Option<TargetArch>,
    pub prompt: Option<String>,
}

impl GroupKey {
    fn shape(&self) -> [bool; 4] {
        [self.case.is_some(), self.model.is_some(), self.arch.is_some(), self.prompt.is_some()]
    }
}

impl fmt::Display for GroupKey {
    /// Values joined by `/` in case, model, arch, prompt order; `all` for
    /// the overall group.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [self.case.as_deref(), self.model.as_deref(), self.arch.map(|a| a.as_str()), self.prompt.as_deref()]
            .into_iter()
            .flatten()
            .collect();
        if parts.is_empty() {
            f.write_str("all")
        } else {
            f.write_str(&parts.join("/"))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroupBy {
    pub case: bool,
    pub model: bool,
    pub arch: bool,
    pub prompt: bool,
}

impl GroupBy {
    pub const OVERALL: GroupBy = GroupBy { case: false, model: false, arch: false, prompt: false };
    pub const CASE: GroupBy = GroupBy { case: true, model: false, arch: false, prompt: false };
    pub const ARCH: GroupBy = GroupBy { case: false, model: false, arch: true, prompt: false };

    pub fn key_of<O: Observation + ?Sized>(&self, o: &O) -> GroupKey {
        GroupKey {
            case: self.case.then(|| o.case_id().to_string()),
            model: self.model.then(|| o.model_name().to_string()),
            arch: self.arch.then(|| o.arch()),
            prompt: self.prompt.then(|| o.prompt_version().to_string()),
        }
    }
}

impl std::str::FromStr for GroupBy {
    type Err = MetricsError;

    /// Comma-separated subset of `case,model,arch,prompt`; empty or `all`
    /// means a single overall group.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut g = GroupBy::OVERALL;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty() && *p != "all") {
            match part {
                "case" => g.case = true,
                "model" => g.model = true,
                "arch" => g.arch = true,
                "prompt" => g.prompt = true,
                other => return Err(MetricsError::BadGroupBy(other.to_string())),
            }
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub group_key: GroupKey,
    pub n_total: u64,
    pub n_exec: u64,
    pub n_succ: u64,
    pub success_at_1: f64,
    pub exec_corr_rate: Option<f64>,
}

impl MetricsSummary {
    pub fn from_counts(group_key: GroupKey, c: Counts) -> Result<Self, MetricsError> {
        if c.n_exec > c.n_total {
            return Err(MetricsError::DomainError(format!("n_exec ({}) exceeds n_total ({})", c.n_exec, c.n_total)));
        }
        Ok(MetricsSummary {
            group_key,
            n_total: c.n_total,
            n_exec: c.n_exec,
            n_succ: c.n_succ,
            success_at_1: success_at_1(c.n_succ, c.n_total)?,
            exec_corr_rate: exec_corr_rate(c.n_succ, c.n_exec)?,
        })
    }

    pub fn counts(&self) -> Counts {
        Counts { n_total: self.n_total, n_exec: self.n_exec, n_succ: self.n_succ }
    }
}

/// Per-group counts. Order-insensitive, so partial tallies from concurrent
/// producers can be merged in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub group_by: GroupBy,
    pub groups: BTreeMap<GroupKey, Counts>,
}

impl Tally {
    pub fn new(group_by: GroupBy) -> Self {
        Tally { group_by, groups: BTreeMap::new() }
    }

    pub fn observe<O: Observation + ?Sized>(&mut self, o: &O) {
        self.groups.entry(self.group_by.key_of(o)).or_default().add(o.verdict_kind());
    }

    pub fn merge(&mut self, other: &Tally) {
        for (k, c) in &other.groups {
            self.groups.entry(k.clone()).or_default().merge(c);
        }
    }

    pub fn summaries(&self) -> Vec<MetricsSummary> {
        self.groups
            .iter()
            .map(|(k, c)| MetricsSummary::from_counts(k.clone(), *c).expect("tallied counts are consistent"))
            .collect()
    }
}

/// Groups samples and computes metrics per group, sorted by group key.
pub fn aggregate<'a, O, I>(records: I, group_by: GroupBy) -> Vec<MetricsSummary>
where
    O: Observation + 'a,
    I: IntoIterator<Item = &'a O>,
{
    let mut t = Tally::new(group_by);
    for r in records {
        t.observe(r);
    }
    t.summaries()
}

/// Change in success@1 from `a` to `b`, in percentage points. Computed from
/// the exact fractions, so e.g. 40/200 -> 55/200 is exactly 7.5.
pub fn delta_pp(a: &MetricsSummary, b: &MetricsSummary) -> Result<f64, MetricsError> {
    if a.group_key.shape() != b.group_key.shape() {
        return Err(MetricsError::KeyMismatch(a.group_key.to_string(), b.group_key.to_string()));
    }
    let ra = success_at_1_exact(a.n_succ, a.n_total)?;
    let rb = success_at_1_exact(b.n_succ, b.n_total)?;
    let to_i = |r: Ratio<u128>| Ratio::new(*r.numer() as i128, *r.denom() as i128);
    let d = (to_i(rb) - to_i(ra)) * Ratio::from_integer(100);
    Ok(*d.numer() as f64 / *d.denom() as f64)
}
