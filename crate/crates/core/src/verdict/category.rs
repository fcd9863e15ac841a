use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Failure taxonomy. The first nine variants are the canonical error table
/// rows in their canonical order; the two `Other*` buckets catch diagnostics
/// and exits that match no rule and are always reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    UnrecognizedCharacter,
    InstructionError,
    AbsoluteExpressionError,
    InvalidRegisterUsage,
    UndefinedReferenceError,
    SymbolRedefinitionError,
    SegmentationFault,
    IllegalInstruction,
    WrongResult,
    OtherCompileError,
    OtherExecError,
}

impl ErrorCategory {
    /// The nine canonical rows, in table order.
    pub const TABLE: [ErrorCategory; 9] = [
        ErrorCategory::UnrecognizedCharacter,
        ErrorCategory::InstructionError,
        ErrorCategory::AbsoluteExpressionError,
        ErrorCategory::InvalidRegisterUsage,
        ErrorCategory::UndefinedReferenceError,
        ErrorCategory::SymbolRedefinitionError,
        ErrorCategory::SegmentationFault,
        ErrorCategory::IllegalInstruction,
        ErrorCategory::WrongResult,
    ];

    /// Table rows followed by the two harness buckets.
    pub const ALL: [ErrorCategory; 11] = [
        ErrorCategory::UnrecognizedCharacter,
        ErrorCategory::InstructionError,
        ErrorCategory::AbsoluteExpressionError,
        ErrorCategory::InvalidRegisterUsage,
        ErrorCategory::UndefinedReferenceError,
        ErrorCategory::SymbolRedefinitionError,
        ErrorCategory::SegmentationFault,
        ErrorCategory::IllegalInstruction,
        ErrorCategory::WrongResult,
        ErrorCategory::OtherCompileError,
        ErrorCategory::OtherExecError,
    ];

    pub fn is_compile(self) -> bool {
        matches!(
            self,
            ErrorCategory::UnrecognizedCharacter
                | ErrorCategory::InstructionError
                | ErrorCategory::AbsoluteExpressionError
                | ErrorCategory::InvalidRegisterUsage
                | ErrorCategory::UndefinedReferenceError
                | ErrorCategory::SymbolRedefinitionError
                | ErrorCategory::OtherCompileError
        )
    }

    pub fn is_other(self) -> bool {
        matches!(self, ErrorCategory::OtherCompileError | ErrorCategory::OtherExecError)
    }

    /// Human-readable row name.
    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::UnrecognizedCharacter => "Unrecognized Character",
            ErrorCategory::InstructionError => "Instruction Error",
            ErrorCategory::AbsoluteExpressionError => "Absolute Expression Error",
            ErrorCategory::InvalidRegisterUsage => "Invalid Register Usage",
            ErrorCategory::UndefinedReferenceError => "Undefined Reference Error",
            ErrorCategory::SymbolRedefinitionError => "Symbol Redefinition Error",
            ErrorCategory::SegmentationFault => "Segmentation Fault",
            ErrorCategory::IllegalInstruction => "Illegal Instruction",
            ErrorCategory::WrongResult => "Wrong Result",
            ErrorCategory::OtherCompileError => "Other Compilation Error",
            ErrorCategory::OtherExecError => "Other Execution Error",
        }
    }

    /// Snake-case identifier used in rule files, hint file names and CSVs.
    pub fn slug(self) -> &'static str {
        match self {
            ErrorCategory::UnrecognizedCharacter => "unrecognized_character",
            ErrorCategory::InstructionError => "instruction_error",
            ErrorCategory::AbsoluteExpressionError => "absolute_expression_error",
            ErrorCategory::InvalidRegisterUsage => "invalid_register_usage",
            ErrorCategory::UndefinedReferenceError => "undefined_reference_error",
            ErrorCategory::SymbolRedefinitionError => "symbol_redefinition_error",
            ErrorCategory::SegmentationFault => "segmentation_fault",
            ErrorCategory::IllegalInstruction => "illegal_instruction",
            ErrorCategory::WrongResult => "wrong_result",
            ErrorCategory::OtherCompileError => "other_compile_error",
            ErrorCategory::OtherExecError => "other_exec_error",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim();
        ErrorCategory::ALL
            .into_iter()
            .find(|c| {
                c.slug() == needle
                    || c.name().eq_ignore_ascii_case(needle)
                    || format!("{c:?}") == needle
            })
            .ok_or_else(|| format!("unknown error category `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_compile_rows_then_three_exec_rows() {
        let compile: Vec<_> = ErrorCategory::TABLE.iter().filter(|c| c.is_compile()).collect();
        assert_eq!(compile.len(), 6);
        assert!(ErrorCategory::TABLE[..6].iter().all(|c| c.is_compile()));
        assert!(ErrorCategory::TABLE[6..].iter().all(|c| !c.is_compile()));
    }

    #[test]
    fn parses_all_spellings() {
        for c in ErrorCategory::ALL {
            assert_eq!(c.slug().parse::<ErrorCategory>().unwrap(), c);
            assert_eq!(c.name().parse::<ErrorCategory>().unwrap(), c);
            assert_eq!(format!("{c:?}").parse::<ErrorCategory>().unwrap(), c);
        }
    }
}
