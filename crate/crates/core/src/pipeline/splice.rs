//! Assembly templates and kernel splicing.
//!
//! A template is the reference compiler's assembly for a case's `main.c`,
//! with its compiler-local `.L*` labels moved into a private `.Ltpl_`
//! namespace, followed by a `.text` directive and a marker comment line.
//! Splicing replaces the marker line with the model's kernel assembly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::process::{run_process, ProcessSpec};
use super::{PipelineError, ScratchDir, ToolchainSpec};
use crate::arch::TargetArch;
use crate::corpus::TestCase;
use crate::provider::AsmArtifact;

pub const MARKER: &str = "KERNEL_HERE";
const LOCAL_LABEL_PREFIX: &str = ".Ltpl_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpliceMode {
    #[default]
    SingleUnitSplice,
    SeparateObjectLink,
}

impl SpliceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SpliceMode::SingleUnitSplice => "single-unit-splice",
            SpliceMode::SeparateObjectLink => "separate-object-link",
        }
    }
}

impl std::str::FromStr for SpliceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single-unit-splice" => Ok(SpliceMode::SingleUnitSplice),
            "separate-object-link" => Ok(SpliceMode::SeparateObjectLink),
            other => Err(format!("unknown splice mode `{other}`")),
        }
    }
}

pub fn marker_line(arch: TargetArch) -> String {
    format!("{} {MARKER}", arch.comment_leader())
}

fn begin_line(arch: TargetArch) -> String {
    format!("{} KERNEL_BEGIN", arch.comment_leader())
}

fn end_line(arch: TargetArch) -> String {
    format!("{} KERNEL_END", arch.comment_leader())
}

/// Renames compiler-local labels (`.L2`, `.LC0`, `.LFB0`, `.L.str`, ...)
/// to `.Ltpl_*` so they cannot collide with labels in spliced code.
pub fn namespace_local_labels(asm: &str) -> String {
    static LABEL: OnceLock<Regex> = OnceLock::new();
    let re = LABEL.get_or_init(|| Regex::new(r"(^|[^A-Za-z0-9_.$])\.L([A-Za-z0-9_.$]+)").unwrap());
    asm.lines()
        .map(|line| re.replace_all(line, format!("${{1}}{LOCAL_LABEL_PREFIX}${{2}}")).into_owned())
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub case_id: String,
    pub arch: TargetArch,
    pub template_id: String,
    pub text: String,
}

impl Template {
    /// Builds a template from already-compiled driver assembly.
    pub fn from_main_asm(case_id: &str, arch: TargetArch, main_asm: &str) -> Template {
        let mut text = namespace_local_labels(main_asm);
        if !text.ends_with('\n') {
            text.push('\n');
        }
        text.push_str("\t.text\n");
        text.push_str(&marker_line(arch));
        text.push('\n');
        let template_id = format!("{case_id}@{arch}#{}", &crate::sha256_hex(&text)[..12]);
        Template { case_id: case_id.to_string(), arch, template_id, text }
    }

    /// Compiles the case's driver to assembly with the primary reference
    /// compiler and turns it into a template.
    pub fn build(case: &TestCase, tc: &ToolchainSpec, scratch: &ScratchDir) -> Result<Template, PipelineError> {
        let which = tc
            .primary_compiler()
            .ok_or_else(|| PipelineError::ToolchainUnavailable(format!("no reference compiler for {}", tc.arch)))?;
        let cc = tc.compiler(which)?;
        scratch.write("main.c", &case.main_source)?;
        let spec = ProcessSpec::new(cc, scratch.path())
            .args(tc.compiler_args(which))
            .args(["-S", "main.c", "-o", "main.s"]);
        let out = run_process(&spec).map_err(|_| PipelineError::ToolchainUnavailable(cc.display().to_string()))?;
        if !out.success() {
            return Err(PipelineError::TemplateBuild {
                case: case.id.clone(),
                diagnostics: String::from_utf8_lossy(&out.stderr).into_owned(),
            });
        }
        let asm = std::fs::read_to_string(scratch.join("main.s"))
            .map_err(|source| PipelineError::ScratchDirError { path: scratch.join("main.s"), source })?;
        Ok(Template::from_main_asm(&case.id, tc.arch, &asm))
    }
}

/// Lazily built templates, one per (case, arch), shareable across workers.
#[derive(Debug, Default)]
pub struct TemplateSet {
    inner: Mutex<HashMap<(String, TargetArch), Arc<Template>>>,
}

impl TemplateSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, t: Template) {
        self.inner.lock().unwrap().insert((t.case_id.clone(), t.arch), Arc::new(t));
    }

    pub fn get(&self, case_id: &str, arch: TargetArch) -> Option<Arc<Template>> {
        self.inner.lock().unwrap().get(&(case_id.to_string(), arch)).cloned()
    }

    pub fn get_or_build(&self, case: &TestCase, tc: &ToolchainSpec, scratch: &ScratchDir) -> Result<Arc<Template>, PipelineError> {
        if let Some(t) = self.get(&case.id, tc.arch) {
            return Ok(t);
        }
        let t = Template::build(case, tc, scratch)?;
        let mut map = self.inner.lock().unwrap();
        Ok(map.entry((case.id.clone(), tc.arch)).or_insert_with(|| Arc::new(t)).clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplicedUnit {
    pub assembly_text: String,
    pub mode: SpliceMode,
    pub template_id: String,
}

/// Combines the kernel assembly with the case template (single-unit mode)
/// or passes it through alone for linking against the driver object.
pub fn splice(template: Option<&Template>, asm: &AsmArtifact, mode: SpliceMode) -> Result<SplicedUnit, PipelineError> {
    if asm.assembly_text.trim().is_empty() {
        return Err(PipelineError::EmptyAssembly);
    }
    let mut kernel = asm.assembly_text.clone();
    if !kernel.ends_with('\n') {
        kernel.push('\n');
    }
    match mode {
        SpliceMode::SeparateObjectLink => Ok(SplicedUnit {
            assembly_text: kernel,
            mode,
            template_id: template.map(|t| t.template_id.clone()).unwrap_or_else(|| "none".into()),
        }),
        SpliceMode::SingleUnitSplice => {
            let t = template.ok_or(PipelineError::TemplateMissing)?;
            let marker = marker_line(t.arch);
            let mut out = String::with_capacity(t.text.len() + kernel.len() + 64);
            let mut replaced = false;
            for line in t.text.split_inclusive('\n') {
                if !replaced && line.trim_end() == marker {
                    out.push_str(&begin_line(t.arch));
                    out.push('\n');
                    out.push_str(&kernel);
                    out.push_str(&end_line(t.arch));
                    out.push('\n');
                    replaced = true;
                } else {
                    out.push_str(line);
                }
            }
            if !replaced {
                return Err(PipelineError::TemplateMissing);
            }
            Ok(SplicedUnit { assembly_text: out, mode, template_id: t.template_id.clone() })
        }
    }
}
