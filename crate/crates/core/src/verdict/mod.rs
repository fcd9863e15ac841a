//! Per-sample outcome: differential output comparison plus classification
//! of build and execution failures.

mod category;
mod compare;
mod rules;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use category::ErrorCategory;
pub use compare::{compare_outputs, ComparisonReport, Mismatch, MismatchReason};
pub use rules::{Classification, Rule, RuleError, RuleTable};

use crate::pipeline::{BuildOutcome, ExecOutcome, ExitKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerdictKind {
    Success,
    CompileError,
    ExecError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<ErrorCategory>,
    #[serde(default)]
    pub evidence: String,
}

impl Verdict {
    pub fn success() -> Self {
        Verdict { kind: VerdictKind::Success, category: None, evidence: String::new() }
    }

    pub fn compile_error(c: Classification) -> Self {
        debug_assert!(c.category.is_compile());
        Verdict { kind: VerdictKind::CompileError, category: Some(c.category), evidence: c.evidence }
    }

    pub fn exec_error(c: Classification) -> Self {
        debug_assert!(!c.category.is_compile());
        Verdict { kind: VerdictKind::ExecError, category: Some(c.category), evidence: c.evidence }
    }

    pub fn is_success(&self) -> bool {
        self.kind == VerdictKind::Success
    }

    /// Whether the sample assembled and linked (Success or ExecError).
    pub fn is_executable(&self) -> bool {
        matches!(self.kind, VerdictKind::Success | VerdictKind::ExecError)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JudgeError {
    #[error("inconsistent input: {0}")]
    InconsistentInput(&'static str),
}

/// Classifies a failed build's diagnostics.
pub fn classify_build_failure(diagnostics: &str, rules: &RuleTable) -> Classification {
    rules.classify(diagnostics)
}

/// Classifies an execution that built successfully. Returns `None` when the
/// program exited cleanly and its output matched.
pub fn classify_exec_failure(exit: &ExitKind, comparison: &ComparisonReport) -> Option<Classification> {
    let (category, evidence) = match exit {
        ExitKind::Signaled { signal } if signal == "SIGSEGV" => {
            (ErrorCategory::SegmentationFault, format!("signaled({signal})"))
        }
        ExitKind::Signaled { signal } if signal == "SIGILL" => {
            (ErrorCategory::IllegalInstruction, format!("signaled({signal})"))
        }
        ExitKind::Exited { code: 0 } if comparison.matched => return None,
        ExitKind::Exited { code: 0 } => (ErrorCategory::WrongResult, comparison.describe()),
        ExitKind::Exited { code } => (ErrorCategory::OtherExecError, format!("exited({code})")),
        ExitKind::Signaled { signal } => (ErrorCategory::OtherExecError, format!("signaled({signal})")),
        ExitKind::TimedOut => (ErrorCategory::OtherExecError, "timeout".to_string()),
    };
    Some(Classification { category, evidence })
}

/// Verdict together with the output comparison it was based on.
#[derive(Debug, Clone, PartialEq)]
pub struct Judgement {
    pub verdict: Verdict,
    pub comparison: Option<ComparisonReport>,
}

/// Decides a sample from its build and (when the build succeeded) its run.
pub fn judge(
    build: &BuildOutcome,
    exec: Option<&ExecOutcome>,
    expected: &str,
    tolerance: f64,
    rules: &RuleTable,
) -> Result<Judgement, JudgeError> {
    match (build.succeeded, exec) {
        (false, Some(_)) => Err(JudgeError::InconsistentInput("execution present for a failed build")),
        (true, None) => Err(JudgeError::InconsistentInput("successful build without an execution")),
        (false, None) => Ok(Judgement {
            verdict: Verdict::compile_error(classify_build_failure(&build.diagnostics, rules)),
            comparison: None,
        }),
        (true, Some(exec)) => {
            let comparison = compare_outputs(&exec.stdout_text, expected, tolerance);
            let verdict = match classify_exec_failure(&exec.exit_kind, &comparison) {
                None => Verdict::success(),
                Some(c) => Verdict::exec_error(c),
            };
            Ok(Judgement { verdict, comparison: Some(comparison) })
        }
    }
}
