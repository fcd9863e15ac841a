//! Ordered regex rule table mapping toolchain diagnostics to error
//! categories. The shipped table lives in `data/rules/diagnostics.rules`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use regex::{Regex, RegexBuilder};
use thiserror::Error;

use super::ErrorCategory;

const BUNDLED_RULES: &str = include_str!("../../data/rules/diagnostics.rules");

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule line {line}: invalid regex: {source}")]
    Regex { line: usize, source: regex::Error },
    #[error("reading rule table {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub category: ErrorCategory,
    pub toolchain: String,
    pub pattern: Regex,
    /// 1-based line in the rule file.
    pub line: usize,
}

/// Result of classifying a failed build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub category: ErrorCategory,
    /// The diagnostic line that decided the category.
    pub evidence: String,
}

#[derive(Debug, Clone)]
pub struct RuleTable {
    rules: Vec<Rule>,
}

impl RuleTable {
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut rules = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (category, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
            let rest = rest.trim_start();
            let (toolchain, pattern) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            let pattern = pattern.trim();
            if pattern.is_empty() {
                return Err(RuleError::Syntax { line, message: "expected `<category> <toolchain> <regex>`".into() });
            }
            let category: ErrorCategory =
                category.parse().map_err(|message| RuleError::Syntax { line, message })?;
            if !category.is_compile() || category == ErrorCategory::OtherCompileError {
                return Err(RuleError::Syntax {
                    line,
                    message: format!("`{}` is not a classifiable build category", category.slug()),
                });
            }
            let pattern = RegexBuilder::new(pattern)
                .case_insensitive(true)
                .build()
                .map_err(|source| RuleError::Regex { line, source })?;
            rules.push(Rule { category, toolchain: toolchain.to_string(), pattern, line });
        }
        Ok(RuleTable { rules })
    }

    pub fn load(path: &Path) -> Result<Self, RuleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| RuleError::Io { path: path.display().to_string(), source })?;
        RuleTable::parse(&text)
    }

    /// The rule table shipped with the crate.
    pub fn bundled() -> &'static RuleTable {
        static TABLE: OnceLock<RuleTable> = OnceLock::new();
        TABLE.get_or_init(|| RuleTable::parse(BUNDLED_RULES).expect("bundled rule table is valid"))
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// First rule (in table order) matching a single diagnostic line.
    pub fn match_line(&self, line: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.pattern.is_match(line))
    }

    /// First-error-wins classification of a failed build's diagnostics.
    pub fn classify(&self, diagnostics: &str) -> Classification {
        for line in diagnostics.lines() {
            if let Some(rule) = self.match_line(line) {
                return Classification { category: rule.category, evidence: line.trim().to_string() };
            }
        }
        let evidence = diagnostics
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .unwrap_or("build failed without diagnostics")
            .to_string();
        Classification { category: ErrorCategory::OtherCompileError, evidence }
    }

    /// Counts every diagnostic line that matches a rule. A failed build
    /// whose diagnostics match nothing counts once as `OtherCompileError`.
    pub fn occurrences(&self, diagnostics: &str) -> BTreeMap<ErrorCategory, u64> {
        let mut counts = BTreeMap::new();
        for line in diagnostics.lines() {
            if let Some(rule) = self.match_line(line) {
                *counts.entry(rule.category).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            counts.insert(ErrorCategory::OtherCompileError, 1);
        }
        counts
    }
}
