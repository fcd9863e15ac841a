use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unsupported architecture `{0}` (expected x86_64, aarch64 or riscv64)")]
pub struct UnsupportedArch(pub String);

/// Instruction set a sample is compiled for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetArch {
    #[serde(rename = "x86_64")]
    X86_64,
    #[serde(rename = "aarch64")]
    Aarch64,
    #[serde(rename = "riscv64")]
    Riscv64,
}

impl TargetArch {
    pub const ALL: [TargetArch; 3] = [TargetArch::X86_64, TargetArch::Aarch64, TargetArch::Riscv64];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetArch::X86_64 => "x86_64",
            TargetArch::Aarch64 => "aarch64",
            TargetArch::Riscv64 => "riscv64",
        }
    }

    pub fn host() -> Option<TargetArch> {
        std::env::consts::ARCH.parse().ok()
    }

    pub fn is_host(self) -> bool {
        TargetArch::host() == Some(self)
    }

    /// Line-comment leader understood by the GNU assembler for this target.
    pub fn comment_leader(self) -> &'static str {
        match self {
            TargetArch::Aarch64 => "//",
            TargetArch::X86_64 | TargetArch::Riscv64 => "#",
        }
    }

    pub fn gnu_triple(self) -> &'static str {
        match self {
            TargetArch::X86_64 => "x86_64-linux-gnu",
            TargetArch::Aarch64 => "aarch64-linux-gnu",
            TargetArch::Riscv64 => "riscv64-linux-gnu",
        }
    }

    /// Name of the QEMU user-mode emulator binary for this target.
    pub fn qemu_user(self) -> &'static str {
        match self {
            TargetArch::X86_64 => "qemu-x86_64",
            TargetArch::Aarch64 => "qemu-aarch64",
            TargetArch::Riscv64 => "qemu-riscv64",
        }
    }
}

impl fmt::Display for TargetArch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetArch {
    type Err = UnsupportedArch;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x86_64" | "x86-64" | "amd64" | "x86" => Ok(TargetArch::X86_64),
            "aarch64" | "arm64" | "arm" => Ok(TargetArch::Aarch64),
            "riscv64" | "riscv" | "rv64" | "risc-v" => Ok(TargetArch::Riscv64),
            _ => Err(UnsupportedArch(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_aliases() {
        assert_eq!("arm64".parse::<TargetArch>().unwrap(), TargetArch::Aarch64);
        assert_eq!("RISCV64".parse::<TargetArch>().unwrap(), TargetArch::Riscv64);
        assert_eq!("x86_64".parse::<TargetArch>().unwrap(), TargetArch::X86_64);
    }

    #[test]
    fn rejects_mips() {
        assert_eq!("mips".parse::<TargetArch>(), Err(UnsupportedArch("mips".into())));
    }

    #[test]
    fn display_round_trips() {
        for arch in TargetArch::ALL {
            assert_eq!(arch.to_string().parse::<TargetArch>().unwrap(), arch);
        }
    }
}
