//! Test cases: a C kernel, the driver program that calls it, and the case
//! manifest (`case.txt`) describing how to judge its output.
//!
//! On disk a corpus is `<root>/<case-id>/{kernel.c, main.c, case.txt}`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kv::{KvDoc, KvError};
use crate::pipeline::{self, ExitKind, PipelineError, RefCompiler, ScratchDir, ToolchainSpec};
use crate::verdict::{compare_outputs, ComparisonReport};

pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

/// Canonical case order of the shipped corpus.
pub const CANONICAL_ORDER: [&str; 20] = [
    "trmm",
    "gemver",
    "gesummv",
    "2mm",
    "mvt",
    "saxpy",
    "sgemm",
    "conv2d",
    "softmax",
    "pooling",
    "relu",
    "resize",
    "rotate",
    "fir",
    "iir",
    "correlation",
    "covariance",
    "fdtd-2d",
    "jacobi-1d",
    "jacobi-2d",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus root {0} does not exist or is not a directory")]
    MissingRoot(PathBuf),
    #[error("case `{case}` is missing {file}")]
    MissingFile { case: String, file: String },
    #[error("case `{case}`: bad manifest key `{key}`: {message}")]
    ManifestParseError { case: String, key: String, message: String },
    #[error("duplicate case id `{0}`")]
    DuplicateCaseId(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainTag {
    #[serde(rename = "linear-algebra")]
    LinearAlgebra,
    #[serde(rename = "intelligent-computing")]
    IntelligentComputing,
    #[serde(rename = "image-processing")]
    ImageProcessing,
    #[serde(rename = "audio-processing")]
    AudioProcessing,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::LinearAlgebra => "linear-algebra",
            DomainTag::IntelligentComputing => "intelligent-computing",
            DomainTag::ImageProcessing => "image-processing",
            DomainTag::AudioProcessing => "audio-processing",
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear-algebra" => Ok(DomainTag::LinearAlgebra),
            "intelligent-computing" => Ok(DomainTag::IntelligentComputing),
            "image-processing" => Ok(DomainTag::ImageProcessing),
            "audio-processing" => Ok(DomainTag::AudioProcessing),
            other => Err(format!("unknown domain tag `{other}`")),
        }
    }
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub domain_tag: DomainTag,
    pub kernel_source: String,
    pub main_source: String,
    pub kernel_symbol: String,
    /// Maximum absolute difference allowed per printed numeric token.
    pub tolerance: f64,
    pub timeout_ms: u64,
}

impl TestCase {
    /// Renders the `case.txt` manifest for this case.
    pub fn manifest_text(&self) -> String {
        let mut doc = KvDoc::default();
        doc.push("kernel_symbol", &self.kernel_symbol);
        doc.push("domain_tag", self.domain_tag.as_str());
        doc.push("tolerance", format!("{}", self.tolerance));
        doc.push("timeout_ms", self.timeout_ms.to_string());
        doc.render()
    }

    /// True when `main_source` contains a definition (not just a prototype)
    /// of the kernel symbol.
    pub fn main_defines_kernel(&self) -> bool {
        let pattern = format!(r"\b{}\s*\([^;{{}}]*\)\s*\{{", regex::escape(&self.kernel_symbol));
        Regex::new(&pattern).map(|re| re.is_match(&self.main_source)).unwrap_or(false)
    }

    pub fn content_digest(&self) -> String {
        crate::sha256_hex(format!(
            "{}\0{}\0{}\0{}",
            self.id,
            self.manifest_text(),
            self.kernel_source,
            self.main_source
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub cases: Vec<TestCase>,
    pub root_path: PathBuf,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TestCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// Keeps only the named cases, preserving corpus order.
    pub fn retain_ids(&mut self, ids: &[String]) {
        self.cases.retain(|c| ids.iter().any(|id| id == &c.id));
    }

    pub fn digest(&self) -> String {
        let joined: Vec<String> = self.cases.iter().map(TestCase::content_digest).collect();
        crate::sha256_hex(joined.join("\n"))
    }

    /// Checks that the corpus is exactly the 20 canonical cases.
    pub fn is_canonical(&self) -> bool {
        self.cases.len() == CANONICAL_ORDER.len()
            && self.cases.iter().zip(CANONICAL_ORDER).all(|(c, id)| c.id == id)
    }
}

/// The corpus shipped with the crate.
pub fn bundled_corpus_root() -> PathBuf {
    crate::data_dir().join("corpus")
}

fn order_key(id: &str) -> (usize, String) {
    let pos = CANONICAL_ORDER.iter().position(|c| *c == id).unwrap_or(CANONICAL_ORDER.len());
    (pos, id.to_string())
}

fn read_text(case: &str, dir: &Path, file: &str) -> Result<String, CorpusError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(CorpusError::MissingFile { case: case.to_string(), file: file.to_string() });
    }
    fs::read_to_string(&path).map_err(|source| CorpusError::Io { path, source })
}

fn parse_case(id: &str, dir: &Path) -> Result<TestCase, CorpusError> {
    let kernel_source = read_text(id, dir, "kernel.c")?;
    let main_source = read_text(id, dir, "main.c")?;
    let manifest = read_text(id, dir, "case.txt")?;

    let bad = |key: &str, message: String| CorpusError::ManifestParseError {
        case: id.to_string(),
        key: key.to_string(),
        message,
    };

    let doc = KvDoc::parse(&manifest).map_err(|e| match e {
        KvError::Malformed { line, text } => bad(&text, format!("line {line} is not key=value")),
        KvError::Duplicate { line, key } => bad(&key, format!("duplicated on line {line}")),
    })?;

    for key in doc.keys() {
        if !matches!(key, "kernel_symbol" | "tolerance" | "timeout_ms" | "domain_tag") {
            return Err(bad(key, "unknown key".into()));
        }
    }

    let kernel_symbol = doc
        .get("kernel_symbol")
        .filter(|s| !s.is_empty())
        .ok_or_else(|| bad("kernel_symbol", "required".into()))?
        .to_string();
    let domain_tag = doc
        .get("domain_tag")
        .ok_or_else(|| bad("domain_tag", "required".into()))?
        .parse::<DomainTag>()
        .map_err(|m| bad("domain_tag", m))?;
    let tolerance = match doc.get("tolerance") {
        None => DEFAULT_TOLERANCE,
        Some(v) => match v.parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => t,
            _ => return Err(bad("tolerance", format!("`{v}` is not a non-negative number"))),
        },
    };
    let timeout_ms = match doc.get("timeout_ms") {
        None => DEFAULT_TIMEOUT_MS,
        Some(v) => match v.parse::<u64>() {
            Ok(t) if t > 0 => t,
            _ => return Err(bad("timeout_ms", format!("`{v}` is not a positive integer"))),
        },
    };

    Ok(TestCase {
        id: id.to_string(),
        domain_tag,
        kernel_source,
        main_source,
        kernel_symbol,
        tolerance,
        timeout_ms,
    })
}

/// Loads every case subdirectory under `root`. Canonical cases come first in
/// canonical order; any others follow sorted by id.
pub fn load_corpus(root: &Path) -> Result<Corpus, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::MissingRoot(root.to_path_buf()));
    }
    let entries = fs::read_dir(root).map_err(|source| CorpusError::Io { path: root.into(), source })?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io { path: root.into(), source })?;
        if entry.path().is_dir() {
            dirs.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    dirs.sort_by_key(|(id, _)| order_key(id));

    let mut cases: Vec<TestCase> = Vec::with_capacity(dirs.len());
    for (id, dir) in dirs {
        let case = parse_case(&id, &dir)?;
        if cases.iter().any(|c| c.id == case.id) {
            return Err(CorpusError::DuplicateCaseId(case.id));
        }
        cases.push(case);
    }
    Ok(Corpus { cases, root_path: root.to_path_buf() })
}

/// Writes `corpus` under `root` in the on-disk layout read by [`load_corpus`].
pub fn save_corpus(corpus: &Corpus, root: &Path) -> Result<(), CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    let mut seen = std::collections::BTreeSet::new();
    for case in &corpus.cases {
        if !seen.insert(case.id.as_str()) {
            return Err(CorpusError::DuplicateCaseId(case.id.clone()));
        }
        let dir = root.join(&case.id);
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        fs::write(dir.join("kernel.c"), &case.kernel_source).map_err(io(&dir))?;
        fs::write(dir.join("main.c"), &case.main_source).map_err(io(&dir))?;
        fs::write(dir.join("case.txt"), case.manifest_text()).map_err(io(&dir))?;
    }
    Ok(())
}

/// Per-compiler outcome of building and running a case with a reference compiler.
#[derive(Debug, Clone, Serialize)]
pub struct CompilerCheck {
    pub compiler: RefCompiler,
    pub compiled: bool,
    pub executed: bool,
    pub deterministic: bool,
    pub output_digest: Option<String>,
    pub diagnostics: String,
    #[serde(skip)]
    pub stdout: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub case_id: String,
    pub checks: Vec<CompilerCheck>,
    /// gcc-vs-clang comparison, present when both compilers produced output.
    pub agreement: Option<ComparisonReport>,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Builds and runs `case` with every configured reference compiler (twice
/// each, for determinism) and cross-checks their outputs.
pub fn validate_case(case: &TestCase, toolchain: &ToolchainSpec, scratch_root: &Path) -> Result<ValidationReport, PipelineError> {
    if toolchain.reference_compilers.is_empty() {
        return Err(PipelineError::ToolchainUnavailable("no reference compiler configured".into()));
    }
    let mut checks = Vec::new();
    let mut problems = Vec::new();

    if case.main_defines_kernel() {
        problems.push(format!("main.c defines the kernel symbol `{}`", case.kernel_symbol));
    }

    for &compiler in toolchain.reference_compilers.keys() {
        let mut outputs = Vec::new();
        let mut check = CompilerCheck {
            compiler,
            compiled: false,
            executed: false,
            deterministic: false,
            output_digest: None,
            diagnostics: String::new(),
            stdout: String::new(),
        };
        for round in 0..2 {
            let scratch = ScratchDir::create(&scratch_root.join(&case.id).join(format!("{}-{round}", compiler.as_str())), false)?;
            let (build, exec) = pipeline::build_reference(case, toolchain, compiler, &scratch)?;
            check.diagnostics = build.diagnostics.clone();
            check.compiled = build.succeeded;
            let Some(exec) = exec else { break };
            check.executed = exec.exit_kind == ExitKind::Exited { code: 0 };
            if !check.executed {
                check.diagnostics = format!("{}{}", exec.exit_kind, if exec.stderr_text.is_empty() { String::new() } else { format!(": {}", exec.stderr_text) });
                break;
            }
            outputs.push(exec.stdout_text);
        }
        if !check.compiled {
            problems.push(format!("{} failed to build the case", compiler.as_str()));
        } else if !check.executed {
            problems.push(format!("{} build did not exit cleanly: {}", compiler.as_str(), check.diagnostics));
        } else if outputs.len() == 2 {
            check.deterministic = outputs[0] == outputs[1];
            if !check.deterministic {
                problems.push(format!("{} build is nondeterministic: two runs differ", compiler.as_str()));
            }
            check.output_digest = Some(crate::sha256_hex(&outputs[0]));
            check.stdout = outputs.swap_remove(0);
        }
        checks.push(check);
    }

    let ok: Vec<&CompilerCheck> = checks.iter().filter(|c| c.output_digest.is_some()).collect();
    let agreement = if ok.len() >= 2 {
        let report = compare_outputs(&ok[1].stdout, &ok[0].stdout, case.tolerance);
        if !report.matched {
            problems.push(format!(
                "{} and {} outputs disagree: {}",
                ok[0].compiler.as_str(),
                ok[1].compiler.as_str(),
                report.describe()
            ));
        }
        Some(report)
    } else {
        None
    };

    Ok(ValidationReport { case_id: case.id.clone(), checks, agreement, problems })
}
