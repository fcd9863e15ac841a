use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::process::{run_process, ExitKind, ProcessOutput, ProcessSpec};
use super::splice::{SplicedUnit, SpliceMode};
use super::{PipelineError, RefCompiler, ScratchDir, ToolchainSpec};
use crate::corpus::TestCase;

const BUILD_TIMEOUT: Duration = Duration::from_secs(120);
pub const DEFAULT_STDOUT_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildStage {
    Assemble,
    Link,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOutcome {
    pub succeeded: bool,
    /// Last stage attempted.
    pub stage: BuildStage,
    pub diagnostics: String,
    pub artifact_path: Option<PathBuf>,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub exit_kind: ExitKind,
    pub stdout_text: String,
    pub stderr_text: String,
    pub stdout_overflow: bool,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct ExecOptions {
    pub timeout_ms: u64,
    pub stdout_cap: usize,
}

impl ExecOptions {
    pub fn with_timeout(timeout_ms: u64) -> Self {
        ExecOptions { timeout_ms, stdout_cap: DEFAULT_STDOUT_CAP }
    }
}

struct Step {
    diagnostics: String,
    ok: bool,
    elapsed: Duration,
}

fn step(tc_tool: &std::path::Path, args: Vec<String>, scratch: &ScratchDir) -> Result<Step, PipelineError> {
    let spec = ProcessSpec::new(tc_tool, scratch.path()).args(args).timeout(BUILD_TIMEOUT);
    let out: ProcessOutput =
        run_process(&spec).map_err(|_| PipelineError::ToolchainUnavailable(tc_tool.display().to_string()))?;
    let mut diagnostics = String::from_utf8_lossy(&out.stderr).into_owned();
    if !out.stdout.is_empty() {
        diagnostics.push_str(&String::from_utf8_lossy(&out.stdout));
    }
    if out.exit_kind == ExitKind::TimedOut {
        diagnostics.push_str(&format!("{} timed out\n", tc_tool.display()));
    }
    Ok(Step { diagnostics, ok: out.success(), elapsed: out.duration })
}

fn millis(d: Duration) -> u64 {
    d.as_millis().min(u128::from(u64::MAX)) as u64
}

/// Assembles and links a spliced unit inside `scratch`.
///
/// Assembler and linker rejections come back as `succeeded = false` with the
/// captured diagnostics; only an unusable toolchain or scratch directory is
/// an `Err`. Tools run with `scratch` as working directory and relative file
/// names, so diagnostics do not embed host paths.
pub fn build(unit: &SplicedUnit, case: &TestCase, tc: &ToolchainSpec, scratch: &ScratchDir) -> Result<BuildOutcome, PipelineError> {
    let driver = &tc.assembler_driver;
    let mut diagnostics = String::new();
    let mut elapsed = Duration::ZERO;

    let (asm_file, obj_file, mut link_inputs) = match unit.mode {
        SpliceMode::SingleUnitSplice => ("unit.s", "unit.o", vec![]),
        SpliceMode::SeparateObjectLink => {
            let which = tc
                .primary_compiler()
                .ok_or_else(|| PipelineError::ToolchainUnavailable(format!("no reference compiler for {}", tc.arch)))?;
            scratch.write("main.c", &case.main_source)?;
            let mut args = tc.compiler_args(which);
            args.extend(["-c", "main.c", "-o", "main.o"].map(String::from));
            let s = step(tc.compiler(which)?, args, scratch)?;
            elapsed += s.elapsed;
            if !s.ok {
                return Err(PipelineError::CorpusDefect { case: case.id.clone(), diagnostics: s.diagnostics });
            }
            ("kernel.s", "kernel.o", vec!["main.o".to_string()])
        }
    };
    scratch.write(asm_file, &unit.assembly_text)?;

    let mut args = tc.driver_args();
    args.extend(["-c", asm_file, "-o", obj_file].map(String::from));
    let s = step(driver, args, scratch)?;
    elapsed += s.elapsed;
    diagnostics.push_str(&s.diagnostics);
    if !s.ok {
        return Ok(BuildOutcome {
            succeeded: false,
            stage: BuildStage::Assemble,
            diagnostics,
            artifact_path: None,
            duration_ms: millis(elapsed),
        });
    }

    let mut args = tc.driver_args();
    args.push(obj_file.to_string());
    args.append(&mut link_inputs);
    args.extend(["-o", "prog", "-lm"].map(String::from));
    let s = step(driver, args, scratch)?;
    elapsed += s.elapsed;
    diagnostics.push_str(&s.diagnostics);
    Ok(BuildOutcome {
        succeeded: s.ok,
        stage: BuildStage::Link,
        diagnostics,
        artifact_path: s.ok.then(|| scratch.join("prog")),
        duration_ms: millis(elapsed),
    })
}

/// Runs a built executable, natively or under the configured emulator.
pub fn execute(outcome: &BuildOutcome, tc: &ToolchainSpec, opts: ExecOptions) -> Result<ExecOutcome, PipelineError> {
    let exe = match (&outcome.artifact_path, outcome.succeeded) {
        (Some(p), true) => p,
        _ => return Err(PipelineError::NotBuilt),
    };
    let cwd = exe.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let spec = match tc.launcher()? {
        None => ProcessSpec::new(exe, &cwd),
        Some((emu, args)) => ProcessSpec::new(emu, &cwd).args(args).arg(exe),
    }
    .timeout(Duration::from_millis(opts.timeout_ms))
    .stdout_cap(opts.stdout_cap);

    let out = run_process(&spec)
        .map_err(|source| PipelineError::SpawnError { program: spec.program.display().to_string(), source })?;
    Ok(ExecOutcome {
        exit_kind: out.exit_kind,
        stdout_text: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr_text: String::from_utf8_lossy(&out.stderr).into_owned(),
        stdout_overflow: out.stdout_overflow,
        duration_ms: millis(out.duration),
    })
}

/// Compiles `kernel.c` and `main.c` together with a reference compiler at
/// its default optimization level and runs the result. The execution is
/// absent when the build fails.
pub fn build_reference(
    case: &TestCase,
    tc: &ToolchainSpec,
    which: RefCompiler,
    scratch: &ScratchDir,
) -> Result<(BuildOutcome, Option<ExecOutcome>), PipelineError> {
    let cc = tc.compiler(which)?;
    scratch.write("kernel.c", &case.kernel_source)?;
    scratch.write("main.c", &case.main_source)?;
    let mut args = tc.compiler_args(which);
    args.extend(["kernel.c", "main.c", "-o", "ref", "-lm"].map(String::from));
    let s = step(cc, args, scratch)?;
    let build = BuildOutcome {
        succeeded: s.ok,
        stage: BuildStage::Link,
        diagnostics: s.diagnostics,
        artifact_path: s.ok.then(|| scratch.join("ref")),
        duration_ms: millis(s.elapsed),
    };
    if !build.succeeded {
        return Ok((build, None));
    }
    let exec = execute(&build, tc, ExecOptions::with_timeout(case.timeout_ms))?;
    Ok((build, Some(exec)))
}

/// Assembly for the case's kernel as emitted by a reference compiler (`-S`).
pub fn reference_kernel_asm(case: &TestCase, tc: &ToolchainSpec, which: RefCompiler, scratch: &ScratchDir) -> Result<String, PipelineError> {
    let cc = tc.compiler(which)?;
    scratch.write("kernel.c", &case.kernel_source)?;
    let mut args = tc.compiler_args(which);
    args.extend(["-S", "kernel.c", "-o", "kernel.s"].map(String::from));
    let s = step(cc, args, scratch)?;
    if !s.ok {
        return Err(PipelineError::CorpusDefect { case: case.id.clone(), diagnostics: s.diagnostics });
    }
    std::fs::read_to_string(scratch.join("kernel.s"))
        .map_err(|source| PipelineError::ScratchDirError { path: scratch.join("kernel.s"), source })
}
