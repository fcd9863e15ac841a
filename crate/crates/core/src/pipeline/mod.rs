//! From assembly text to a running program: template splicing, assembling
//! and linking through the C compiler driver, and native or emulated
//! execution. Reference builds with gcc/clang live here too.
//!
//! Every tool invocation runs in its own scratch directory laid out as
//! `<workdir>/<run-id>/<case>/<sample-index>/`.

mod build;
mod process;
mod scratch;
mod splice;
mod toolchain;

use std::path::PathBuf;

use thiserror::Error;

pub use build::{build, build_reference, execute, reference_kernel_asm, BuildOutcome, BuildStage, ExecOptions, ExecOutcome, DEFAULT_STDOUT_CAP};
pub use process::{run_process, set_spawn_limit, signal_name, ExitKind, ProcessOutput, ProcessSpec};
pub use scratch::ScratchDir;
pub use splice::{marker_line, namespace_local_labels, splice, SpliceMode, SplicedUnit, Template, TemplateSet, MARKER};
pub use toolchain::{find_in_path, RefCompiler, ToolchainSpec};

use crate::arch::TargetArch;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("toolchain unavailable: {0}")]
    ToolchainUnavailable(String),
    #[error("no user-mode emulator configured for {0}")]
    EmulatorMissing(TargetArch),
    #[error("scratch directory error at {path}: {source}")]
    ScratchDirError { path: PathBuf, source: std::io::Error },
    #[error("failed to spawn {program}: {source}")]
    SpawnError { program: String, source: std::io::Error },
    #[error("no template with a marker line for this case")]
    TemplateMissing,
    #[error("assembly is empty")]
    EmptyAssembly,
    #[error("building the template for `{case}` failed:\n{diagnostics}")]
    TemplateBuild { case: String, diagnostics: String },
    #[error("reference compile of `{case}` failed (corpus defect):\n{diagnostics}")]
    CorpusDefect { case: String, diagnostics: String },
    #[error("cannot execute: build did not succeed")]
    NotBuilt,
}
