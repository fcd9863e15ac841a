use serde::{Deserialize, Serialize};

use crate::arch::TargetArch;
use crate::metrics::Observation;
use crate::pipeline::{BuildOutcome, BuildStage, ExecOutcome, ExitKind, SpliceMode};
use crate::provider::ExtractionMethod;
use crate::verdict::{ComparisonReport, ErrorCategory, Verdict, VerdictKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub succeeded: bool,
    pub stage: BuildStage,
    pub diagnostics: String,
    pub duration_ms: u64,
}

impl From<&BuildOutcome> for BuildSummary {
    fn from(b: &BuildOutcome) -> Self {
        BuildSummary { succeeded: b.succeeded, stage: b.stage, diagnostics: b.diagnostics.clone(), duration_ms: b.duration_ms }
    }
}

impl BuildSummary {
    pub fn to_outcome(&self) -> BuildOutcome {
        BuildOutcome {
            succeeded: self.succeeded,
            stage: self.stage,
            diagnostics: self.diagnostics.clone(),
            artifact_path: self.succeeded.then(|| "prog".into()),
            duration_ms: self.duration_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecSummary {
    pub exit_kind: ExitKind,
    pub stdout_text: String,
    pub stderr_text: String,
    pub stdout_overflow: bool,
    pub duration_ms: u64,
    pub comparison: Option<ComparisonReport>,
}

impl ExecSummary {
    pub fn new(e: &ExecOutcome, comparison: Option<ComparisonReport>) -> Self {
        ExecSummary {
            exit_kind: e.exit_kind.clone(),
            stdout_text: e.stdout_text.clone(),
            stderr_text: e.stderr_text.clone(),
            stdout_overflow: e.stdout_overflow,
            duration_ms: e.duration_ms,
            comparison,
        }
    }

    pub fn to_outcome(&self) -> ExecOutcome {
        ExecOutcome {
            exit_kind: self.exit_kind.clone(),
            stdout_text: self.stdout_text.clone(),
            stderr_text: self.stderr_text.clone(),
            stdout_overflow: self.stdout_overflow,
            duration_ms: self.duration_ms,
        }
    }
}

/// Provenance and outcome of one sample. Raw responses are not stored here;
/// they live in the replay archive under `request_digest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub run_id: String,
    pub case_id: String,
    pub arch: TargetArch,
    pub model_name: String,
    pub prompt_version: String,
    pub sample_index: u32,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub hint_categories: Vec<ErrorCategory>,
    pub splice_mode: SpliceMode,
    /// Generation attempts used, 1 + feedback rounds taken.
    pub attempts: u32,
    pub tolerance: f64,
    pub request_digest: Option<String>,
    pub raw_response_digest: Option<String>,
    pub extraction_method: Option<ExtractionMethod>,
    /// Set when no assembly could be obtained (provider or extraction failure).
    pub generation_error: Option<String>,
    pub build: Option<BuildSummary>,
    pub exec: Option<ExecSummary>,
    pub verdict: Verdict,
    /// Verdict of the first attempt when feedback rounds changed the outcome.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_verdict: Option<Verdict>,
    pub latency_ms: u64,
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
}

impl SampleRecord {
    /// Zeroes every wall-clock field so records compare byte-for-byte
    /// across runs.
    pub fn canonicalize(&mut self) {
        self.latency_ms = 0;
        self.started_at_ms = 0;
        self.finished_at_ms = 0;
        if let Some(b) = &mut self.build {
            b.duration_ms = 0;
        }
        if let Some(e) = &mut self.exec {
            e.duration_ms = 0;
        }
    }

    pub fn key(&self) -> (String, String, u32) {
        (self.run_id.clone(), self.case_id.clone(), self.sample_index)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

impl Observation for SampleRecord {
    fn case_id(&self) -> &str {
        &self.case_id
    }

    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn arch(&self) -> TargetArch {
        self.arch
    }

    fn prompt_version(&self) -> &str {
        &self.prompt_version
    }

    fn verdict_kind(&self) -> VerdictKind {
        self.verdict.kind
    }
}
