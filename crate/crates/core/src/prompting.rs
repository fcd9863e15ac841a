//! Compilation prompts: a versioned base prompt per architecture, optional
//! per-category hint blocks, and feedback sections quoting a failed attempt.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::arch::TargetArch;
use crate::corpus::TestCase;
use crate::runstore::SampleRecord;
use crate::verdict::{ErrorCategory, VerdictKind};

pub const BUNDLED_VERSION: &str = "v1";
pub const DEFAULT_FEEDBACK_LINES: usize = 20;
pub const DEFAULT_FEEDBACK_ASM_BYTES: usize = 4096;

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("unsupported architecture `{0}`")]
    UnsupportedArch(String),
    #[error("prompt asset missing: {0}")]
    MissingAsset(PathBuf),
    #[error("cannot read prompt asset {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no hint text for category `{0}`")]
    MissingHint(ErrorCategory),
    #[error("feedback requested for a successful sample")]
    FeedbackOnSuccess,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HintBlock {
    pub category: ErrorCategory,
    pub hint_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackBlock {
    pub failure: String,
    pub diagnostics: Vec<String>,
    pub assembly: String,
}

/// Everything a rendered prompt depends on. [`PromptSpec::render`] is a pure
/// function of these fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub version: String,
    pub case_id: String,
    pub kernel_symbol: String,
    pub kernel_source: String,
    pub target_arch: TargetArch,
    pub base_instruction: String,
    pub abi_notes: String,
    /// Kept in table order, at most one per category.
    pub augmentations: Vec<HintBlock>,
    pub feedback_template: String,
    /// Most recent failed attempt, if any.
    pub feedback: Option<FeedbackBlock>,
}

/// Replaces `{name}` placeholders in one pass, so substituted text is never
/// rescanned (kernel sources are full of braces).
fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after
            .find('}')
            .and_then(|close| vars.iter().find(|(k, _)| *k == &after[..close]).map(|(k, v)| (k.len(), *v)));
        match hit {
            Some((klen, v)) => {
                out.push_str(v);
                rest = &after[klen + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

impl PromptSpec {
    pub fn render(&self) -> String {
        let source = self.kernel_source.trim_end();
        let mut out = fill(
            &self.base_instruction,
            &[
                ("arch", self.target_arch.as_str()),
                ("symbol", &self.kernel_symbol),
                ("abi", self.abi_notes.trim()),
                ("kernel_source", source),
            ],
        );
        if !self.augmentations.is_empty() {
            out.push_str("\nAdditional guidance:\n");
            for h in &self.augmentations {
                out.push_str(&format!("- {}: {}\n", h.category.name(), h.hint_text.trim()));
            }
        }
        if let Some(fb) = &self.feedback {
            out.push('\n');
            out.push_str(&fill(
                &self.feedback_template,
                &[
                    ("verdict", &fb.failure),
                    ("diagnostics", &fb.diagnostics.join("\n")),
                    ("assembly", fb.assembly.trim_end()),
                ],
            ));
        }
        out
    }
}

/// Versioned prompt assets: `base.txt`, `feedback.txt`, `abi/<arch>.txt` and
/// `hints/<category>.txt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptLibrary {
    pub version: String,
    pub base: String,
    pub feedback: String,
    pub abi: BTreeMap<TargetArch, String>,
    pub hints: BTreeMap<ErrorCategory, String>,
}

macro_rules! asset {
    ($p:literal) => {
        include_str!(concat!("../data/prompts/v1/", $p))
    };
}

impl PromptLibrary {
    pub fn bundled() -> PromptLibrary {
        let abi = [
            (TargetArch::X86_64, asset!("abi/x86_64.txt")),
            (TargetArch::Aarch64, asset!("abi/aarch64.txt")),
            (TargetArch::Riscv64, asset!("abi/riscv64.txt")),
        ];
        let hints = [
            asset!("hints/unrecognized_character.txt"),
            asset!("hints/instruction_error.txt"),
            asset!("hints/absolute_expression_error.txt"),
            asset!("hints/invalid_register_usage.txt"),
            asset!("hints/undefined_reference_error.txt"),
            asset!("hints/symbol_redefinition_error.txt"),
            asset!("hints/segmentation_fault.txt"),
            asset!("hints/illegal_instruction.txt"),
            asset!("hints/wrong_result.txt"),
        ];
        PromptLibrary {
            version: BUNDLED_VERSION.to_string(),
            base: asset!("base.txt").to_string(),
            feedback: asset!("feedback.txt").to_string(),
            abi: abi.into_iter().map(|(a, t)| (a, t.to_string())).collect(),
            hints: ErrorCategory::TABLE.into_iter().zip(hints).map(|(c, t)| (c, t.to_string())).collect(),
        }
    }

    /// Loads `<prompts_root>/<version>/`. Missing per-arch or per-category
    /// files are tolerated here and reported when first needed.
    pub fn load(prompts_root: &Path, version: &str) -> Result<PromptLibrary, PromptError> {
        let dir = prompts_root.join(version);
        let read = |p: PathBuf| -> Result<Option<String>, PromptError> {
            match fs::read_to_string(&p) {
                Ok(t) => Ok(Some(t)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(source) => Err(PromptError::Io { path: p, source }),
            }
        };
        let base = read(dir.join("base.txt"))?.ok_or_else(|| PromptError::MissingAsset(dir.join("base.txt")))?;
        let feedback =
            read(dir.join("feedback.txt"))?.ok_or_else(|| PromptError::MissingAsset(dir.join("feedback.txt")))?;
        let mut abi = BTreeMap::new();
        for a in TargetArch::ALL {
            if let Some(t) = read(dir.join("abi").join(format!("{a}.txt")))? {
                abi.insert(a, t);
            }
        }
        let mut hints = BTreeMap::new();
        for c in ErrorCategory::TABLE {
            if let Some(t) = read(dir.join("hints").join(format!("{}.txt", c.slug())))? {
                if !t.trim().is_empty() {
                    hints.insert(c, t);
                }
            }
        }
        Ok(PromptLibrary { version: version.to_string(), base, feedback, abi, hints })
    }

    /// Bundled assets for the bundled version, otherwise files under `prompts_root`.
    pub fn resolve(prompts_root: Option<&Path>, version: &str) -> Result<PromptLibrary, PromptError> {
        match prompts_root {
            Some(root) => Self::load(root, version),
            None if version == BUNDLED_VERSION => Ok(Self::bundled()),
            None => Self::load(&crate::data_dir().join("prompts"), version),
        }
    }

    pub fn build_base_prompt(&self, case: &TestCase, arch: TargetArch) -> Result<PromptSpec, PromptError> {
        let abi_notes = self.abi.get(&arch).ok_or_else(|| PromptError::UnsupportedArch(arch.to_string()))?;
        Ok(PromptSpec {
            version: self.version.clone(),
            case_id: case.id.clone(),
            kernel_symbol: case.kernel_symbol.clone(),
            kernel_source: case.kernel_source.clone(),
            target_arch: arch,
            base_instruction: self.base.clone(),
            abi_notes: abi_notes.clone(),
            augmentations: Vec::new(),
            feedback_template: self.feedback.clone(),
            feedback: None,
        })
    }

    /// Adds one hint block per requested category. Blocks end up in table
    /// order with no duplicates, so repeated augmentation composes like a
    /// set union. The harness `Other*` buckets have no hints and are skipped.
    pub fn augment_with_hints<'a, I>(&self, spec: &PromptSpec, categories: I) -> Result<PromptSpec, PromptError>
    where
        I: IntoIterator<Item = &'a ErrorCategory>,
    {
        let mut wanted: Vec<ErrorCategory> = spec.augmentations.iter().map(|h| h.category).collect();
        for c in categories {
            if !c.is_other() && !wanted.contains(c) {
                wanted.push(*c);
            }
        }
        let mut out = spec.clone();
        out.augmentations = Vec::with_capacity(wanted.len());
        for c in ErrorCategory::TABLE.into_iter().filter(|c| wanted.contains(c)) {
            let existing = spec.augmentations.iter().find(|h| h.category == c);
            let hint_text = match existing {
                Some(h) => h.hint_text.clone(),
                None => self.hints.get(&c).cloned().ok_or(PromptError::MissingHint(c))?,
            };
            out.augmentations.push(HintBlock { category: c, hint_text });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackOptions {
    pub max_diagnostic_lines: usize,
    pub max_assembly_bytes: usize,
}

impl Default for FeedbackOptions {
    fn default() -> Self {
        FeedbackOptions { max_diagnostic_lines: DEFAULT_FEEDBACK_LINES, max_assembly_bytes: DEFAULT_FEEDBACK_ASM_BYTES }
    }
}

fn truncate_bytes(s: &str, budget: usize) -> String {
    if s.len() <= budget {
        return s.to_string();
    }
    let mut end = budget;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}\n... [truncated]", &s[..end])
}

/// Error lines shown to the model for a failed sample.
fn failure_lines(prior: &SampleRecord) -> Vec<String> {
    let mut lines: Vec<String> = Vec::new();
    if let Some(e) = &prior.generation_error {
        lines.extend(e.lines().map(str::to_string));
    }
    match (&prior.build, &prior.exec) {
        (Some(b), None) => lines.extend(b.diagnostics.lines().map(str::to_string)),
        (_, Some(x)) => {
            if !prior.verdict.evidence.is_empty() {
                lines.push(prior.verdict.evidence.clone());
            }
            lines.extend(x.stderr_text.lines().map(str::to_string));
        }
        (None, None) => {}
    }
    if lines.iter().all(|l| l.trim().is_empty()) {
        lines = vec![prior.verdict.evidence.clone()];
    }
    lines.retain(|l| !l.trim().is_empty());
    lines
}

/// Appends a feedback section describing `prior`, a failed attempt whose
/// extracted assembly was `prior_assembly`. Any earlier feedback section is
/// replaced.
pub fn build_feedback_prompt(
    spec: &PromptSpec,
    prior: &SampleRecord,
    prior_assembly: &str,
    opts: FeedbackOptions,
) -> Result<PromptSpec, PromptError> {
    if prior.verdict.kind == VerdictKind::Success {
        return Err(PromptError::FeedbackOnSuccess);
    }
    let failure = match prior.verdict.category {
        Some(c) => format!("{} ({})", c.name(), if c.is_compile() { "build failed" } else { "execution failed" }),
        None => "unknown failure".to_string(),
    };
    let mut diagnostics = failure_lines(prior);
    diagnostics.truncate(opts.max_diagnostic_lines);
    let mut out = spec.clone();
    out.feedback = Some(FeedbackBlock {
        failure,
        diagnostics,
        assembly: truncate_bytes(prior_assembly, opts.max_assembly_bytes),
    });
    Ok(out)
}
