use std::collections::BTreeMap;
use std::fmt;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::arch::TargetArch;

/// Traditional compilers used as the correctness reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefCompiler {
    Gcc,
    Clang,
}

impl RefCompiler {
    pub const ALL: [RefCompiler; 2] = [RefCompiler::Gcc, RefCompiler::Clang];

    pub fn as_str(self) -> &'static str {
        match self {
            RefCompiler::Gcc => "gcc",
            RefCompiler::Clang => "clang",
        }
    }
}

impl fmt::Display for RefCompiler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RefCompiler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gcc" => Ok(RefCompiler::Gcc),
            "clang" => Ok(RefCompiler::Clang),
            other => Err(format!("unknown reference compiler `{other}`")),
        }
    }
}

/// Executables used to build and run samples for one architecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolchainSpec {
    pub arch: TargetArch,
    pub reference_compilers: BTreeMap<RefCompiler, PathBuf>,
    /// Flags passed only to a given reference compiler (e.g. `--target=` for clang).
    #[serde(default)]
    pub compiler_flags: BTreeMap<RefCompiler, Vec<String>>,
    /// C compiler driver used to assemble and link spliced units.
    pub assembler_driver: PathBuf,
    pub emulator: Option<PathBuf>,
    pub sysroot: Option<PathBuf>,
    /// Flags passed to every compiler and driver invocation.
    #[serde(default)]
    pub extra_flags: Vec<String>,
}

pub fn is_executable(path: &Path) -> bool {
    path.metadata().map(|m| m.is_file() && m.permissions().mode() & 0o111 != 0).unwrap_or(false)
}

/// Resolves `name` against `PATH` (or checks it directly if it has a slash).
pub fn find_in_path(name: &str) -> Option<PathBuf> {
    if name.contains('/') {
        let p = PathBuf::from(name);
        return is_executable(&p).then_some(p);
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|dir| dir.join(name)).find(|p| is_executable(p))
}

impl ToolchainSpec {
    /// Discovers a toolchain for `arch` on `PATH`. Missing pieces are left
    /// unresolved; call [`ToolchainSpec::check`] or
    /// [`ToolchainSpec::require_runnable`] before use.
    pub fn detect(arch: TargetArch) -> ToolchainSpec {
        let mut reference_compilers = BTreeMap::new();
        let mut compiler_flags = BTreeMap::new();
        let mut emulator = None;
        let mut sysroot = None;

        if arch.is_host() {
            for c in RefCompiler::ALL {
                if let Some(p) = find_in_path(c.as_str()) {
                    reference_compilers.insert(c, p);
                }
            }
        } else {
            let triple = arch.gnu_triple();
            let cross_gcc = find_in_path(&format!("{triple}-gcc"));
            if let Some(gcc) = &cross_gcc {
                reference_compilers.insert(RefCompiler::Gcc, gcc.clone());
                if let Some(clang) = find_in_path("clang") {
                    reference_compilers.insert(RefCompiler::Clang, clang);
                    compiler_flags.insert(RefCompiler::Clang, vec![format!("--target={triple}")]);
                }
            }
            emulator = find_in_path(arch.qemu_user());
            let root = PathBuf::from(format!("/usr/{triple}"));
            if root.is_dir() {
                sysroot = Some(root);
            }
        }

        let assembler_driver = reference_compilers
            .get(&RefCompiler::Gcc)
            .cloned()
            .unwrap_or_else(|| {
                if arch.is_host() {
                    reference_compilers.get(&RefCompiler::Clang).cloned().unwrap_or_else(|| "gcc".into())
                } else {
                    format!("{}-gcc", arch.gnu_triple()).into()
                }
            });

        ToolchainSpec { arch, reference_compilers, compiler_flags, assembler_driver, emulator, sysroot, extra_flags: Vec::new() }
    }

    /// Compiler used to build templates and expected outputs: gcc when
    /// configured, else clang.
    pub fn primary_compiler(&self) -> Option<RefCompiler> {
        self.reference_compilers.keys().next().copied()
    }

    pub fn needs_emulator(&self) -> bool {
        !self.arch.is_host()
    }

    /// Checks that every configured binary exists and is executable.
    pub fn check(&self) -> Result<(), PipelineError> {
        if self.reference_compilers.is_empty() {
            return Err(PipelineError::ToolchainUnavailable(format!("no reference compiler found for {}", self.arch)));
        }
        for path in self.reference_compilers.values().chain(std::iter::once(&self.assembler_driver)) {
            if find_in_path(&path.to_string_lossy()).is_none() {
                return Err(PipelineError::ToolchainUnavailable(path.display().to_string()));
            }
        }
        if let Some(emu) = &self.emulator {
            if find_in_path(&emu.to_string_lossy()).is_none() {
                return Err(PipelineError::ToolchainUnavailable(emu.display().to_string()));
            }
        }
        Ok(())
    }

    /// Like [`check`](Self::check), but additionally requires an emulator
    /// for non-host targets. The emulator is checked first.
    pub fn require_runnable(&self) -> Result<(), PipelineError> {
        if self.needs_emulator() && self.emulator.is_none() {
            return Err(PipelineError::EmulatorMissing(self.arch));
        }
        self.check()
    }

    pub(crate) fn compiler(&self, which: RefCompiler) -> Result<&Path, PipelineError> {
        self.reference_compilers
            .get(&which)
            .map(PathBuf::as_path)
            .ok_or_else(|| PipelineError::ToolchainUnavailable(format!("{which} is not configured for {}", self.arch)))
    }

    fn sysroot_flags(&self) -> Vec<String> {
        self.sysroot.iter().map(|s| format!("--sysroot={}", s.display())).collect()
    }

    pub(crate) fn compiler_args(&self, which: RefCompiler) -> Vec<String> {
        let mut args = self.compiler_flags.get(&which).cloned().unwrap_or_default();
        if which == RefCompiler::Clang {
            args.extend(self.sysroot_flags());
        }
        args.extend(self.extra_flags.iter().cloned());
        args
    }

    pub(crate) fn driver_args(&self) -> Vec<String> {
        // The driver is usually one of the reference compilers; reuse its flags.
        let same = self.reference_compilers.iter().find(|(_, p)| **p == self.assembler_driver);
        match same {
            Some((c, _)) => self.compiler_args(*c),
            None => self.extra_flags.clone(),
        }
    }

    /// Program and leading arguments used to launch a built executable.
    pub(crate) fn launcher(&self) -> Result<Option<(PathBuf, Vec<String>)>, PipelineError> {
        if !self.needs_emulator() {
            return Ok(None);
        }
        let emu = self.emulator.clone().ok_or(PipelineError::EmulatorMissing(self.arch))?;
        let mut args = Vec::new();
        if let Some(root) = &self.sysroot {
            args.push("-L".to_string());
            args.push(root.display().to_string());
        }
        Ok(Some((emu, args)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn host_detection_prefers_gcc_as_primary() {
        let host = TargetArch::host().unwrap();
        let tc = ToolchainSpec::detect(host);
        if tc.reference_compilers.contains_key(&RefCompiler::Gcc) {
            assert_eq!(tc.primary_compiler(), Some(RefCompiler::Gcc));
        }
        assert!(!tc.needs_emulator());
    }

    #[test]
    fn missing_emulator_is_reported_before_missing_compilers() {
        let foreign = TargetArch::ALL.into_iter().find(|a| !a.is_host()).unwrap();
        let mut tc = ToolchainSpec::detect(foreign);
        tc.emulator = None;
        assert!(matches!(tc.require_runnable(), Err(PipelineError::EmulatorMissing(a)) if a == foreign));
    }

    #[test]
    fn nonexistent_binary_is_unavailable() {
        let mut tc = ToolchainSpec::detect(TargetArch::host().unwrap());
        tc.assembler_driver = "/nonexistent/cc".into();
        tc.reference_compilers.insert(RefCompiler::Gcc, "/nonexistent/cc".into());
        assert!(matches!(tc.check(), Err(PipelineError::ToolchainUnavailable(p)) if p.contains("nonexistent")));
    }
}
