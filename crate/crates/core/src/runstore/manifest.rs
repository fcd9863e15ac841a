use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::arch::TargetArch;
use crate::kv::{KvDoc, KvError};
use crate::pipeline::{find_in_path, RefCompiler, SpliceMode, ToolchainSpec};
use crate::prompting::BUNDLED_VERSION;
use crate::provider::{ProviderConfig, ProviderKind};
use crate::verdict::ErrorCategory;

pub const DEFAULT_SAMPLES_PER_CASE: u32 = 10;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Syntax(#[from] KvError),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}

const KEYS: &[&str] = &[
    "run_id",
    "corpus_root",
    "cases",
    "arch",
    "samples_per_case",
    "prompt_version",
    "prompts_root",
    "hint_categories",
    "feedback_rounds",
    "seed",
    "splice_mode",
    "workdir",
    "provider.kind",
    "provider.model",
    "provider.endpoint",
    "provider.temperature",
    "provider.max_output_tokens",
    "provider.request_timeout_ms",
    "provider.api_key_env",
    "provider.archive",
    "provider.script",
    "provider.max_in_flight",
    "provider.requests_per_minute",
    "provider.max_attempts",
    "toolchain.gcc",
    "toolchain.clang",
    "toolchain.clang_flags",
    "toolchain.assembler_driver",
    "toolchain.emulator",
    "toolchain.sysroot",
    "toolchain.extra_flags",
];

/// Declarative description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub run_id: String,
    /// `None` selects the bundled corpus.
    pub corpus_root: Option<PathBuf>,
    /// Optional subset of case ids; `None` runs every case.
    pub cases: Option<Vec<String>>,
    pub provider: ProviderConfig,
    pub arch: TargetArch,
    pub toolchain: ToolchainSpec,
    pub samples_per_case: u32,
    pub prompt_version: String,
    pub prompts_root: Option<PathBuf>,
    /// In table order.
    pub hint_categories: Vec<ErrorCategory>,
    pub feedback_rounds: u32,
    pub seed: u64,
    pub splice_mode: SpliceMode,
    /// Scratch root; defaults to a directory under the run.
    pub workdir: Option<PathBuf>,
    /// Text the manifest was parsed from.
    pub source_text: String,
}

fn invalid(key: &str, message: impl Into<String>) -> ManifestError {
    ManifestError::InvalidValue { key: key.to_string(), message: message.into() }
}

fn parse_num<T: std::str::FromStr>(doc: &KvDoc, key: &str) -> Result<Option<T>, ManifestError>
where
    T::Err: std::fmt::Display,
{
    doc.get(key).map(|v| v.parse::<T>().map_err(|e| invalid(key, e.to_string()))).transpose()
}

fn resolve_path(base: &Path, v: &str) -> PathBuf {
    let p = PathBuf::from(v);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Tool values containing a slash are paths relative to the manifest; bare
/// names are looked up on `PATH` and kept verbatim when absent, so the
/// toolchain check can name the missing binary.
fn resolve_tool(base: &Path, v: &str) -> PathBuf {
    if v.contains('/') {
        resolve_path(base, v)
    } else {
        find_in_path(v).unwrap_or_else(|| PathBuf::from(v))
    }
}

fn parse_categories(v: &str) -> Result<Vec<ErrorCategory>, ManifestError> {
    let v = v.trim();
    if v.is_empty() || v == "none" {
        return Ok(Vec::new());
    }
    if v == "all" {
        return Ok(ErrorCategory::TABLE.to_vec());
    }
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let c: ErrorCategory = part.parse().map_err(|_| invalid("hint_categories", format!("unknown category `{part}`")))?;
        if c.is_other() {
            return Err(invalid("hint_categories", format!("`{part}` has no hint")));
        }
        out.push(c);
    }
    Ok(ErrorCategory::TABLE.into_iter().filter(|c| out.contains(c)).collect())
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest, ManifestError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        let base = std::fs::canonicalize(&base).unwrap_or(base);
        RunManifest::parse(&text, &base)
    }

    /// Parses manifest text; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<RunManifest, ManifestError> {
        let doc = KvDoc::parse(text)?;
        if let Some(k) = doc.keys().find(|k| !KEYS.contains(k)) {
            return Err(ManifestError::UnknownKey(k.to_string()));
        }
        let run_id = doc.get("run_id").ok_or(ManifestError::MissingKey("run_id"))?.to_string();
        if run_id.is_empty() || !run_id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || run_id.starts_with('.') {
            return Err(invalid("run_id", "use letters, digits, `-`, `_` and `.` only"));
        }

        let arch = match doc.get("arch") {
            Some(a) => a.parse::<TargetArch>().map_err(|e| invalid("arch", e.to_string()))?,
            None => TargetArch::host().ok_or_else(|| invalid("arch", "host architecture is unsupported; set arch"))?,
        };

        let kind: ProviderKind = doc
            .get("provider.kind")
            .ok_or(ManifestError::MissingKey("provider.kind"))?
            .parse()
            .map_err(|e: String| invalid("provider.kind", e))?;
        let model = doc.get("provider.model").ok_or(ManifestError::MissingKey("provider.model"))?;
        let mut provider = ProviderConfig::new(kind, model);
        provider.endpoint = doc.get("provider.endpoint").map(str::to_string);
        if let Some(t) = parse_num::<f64>(&doc, "provider.temperature")? {
            provider.temperature = t;
        }
        if let Some(t) = parse_num(&doc, "provider.max_output_tokens")? {
            provider.max_output_tokens = t;
        }
        if let Some(t) = parse_num(&doc, "provider.request_timeout_ms")? {
            provider.request_timeout_ms = t;
        }
        provider.api_key_env = doc.get("provider.api_key_env").map(str::to_string);
        provider.archive = doc.get("provider.archive").map(|v| resolve_path(base_dir, v));
        provider.script = doc.get("provider.script").map(|v| resolve_path(base_dir, v));
        if let Some(n) = parse_num(&doc, "provider.max_in_flight")? {
            provider.max_in_flight = n;
        }
        provider.requests_per_minute = parse_num(&doc, "provider.requests_per_minute")?;
        if let Some(n) = parse_num(&doc, "provider.max_attempts")? {
            provider.max_attempts = n;
        }
        provider.validate().map_err(|e| invalid("provider", e.to_string()))?;

        let mut toolchain = ToolchainSpec::detect(arch);
        for (key, which) in [("toolchain.gcc", RefCompiler::Gcc), ("toolchain.clang", RefCompiler::Clang)] {
            match doc.get(key) {
                Some("none") => {
                    toolchain.reference_compilers.remove(&which);
                }
                Some(v) => {
                    toolchain.reference_compilers.insert(which, resolve_tool(base_dir, v));
                }
                None => {}
            }
        }
        if let Some(v) = doc.get("toolchain.clang_flags") {
            toolchain.compiler_flags.insert(RefCompiler::Clang, v.split_whitespace().map(str::to_string).collect());
        }
        match doc.get("toolchain.assembler_driver") {
            Some(v) => toolchain.assembler_driver = resolve_tool(base_dir, v),
            None => {
                if let Some(p) = toolchain.primary_compiler().and_then(|c| toolchain.reference_compilers.get(&c)) {
                    toolchain.assembler_driver = p.clone();
                }
            }
        }
        if let Some(v) = doc.get("toolchain.emulator") {
            toolchain.emulator = (v != "none").then(|| resolve_tool(base_dir, v));
        }
        if let Some(v) = doc.get("toolchain.sysroot") {
            toolchain.sysroot = (v != "none").then(|| resolve_path(base_dir, v));
        }
        if let Some(v) = doc.get("toolchain.extra_flags") {
            toolchain.extra_flags = v.split_whitespace().map(str::to_string).collect();
        }

        let samples_per_case = parse_num(&doc, "samples_per_case")?.unwrap_or(DEFAULT_SAMPLES_PER_CASE);
        if samples_per_case == 0 {
            return Err(invalid("samples_per_case", "must be positive"));
        }
        let splice_mode = match doc.get("splice_mode") {
            Some(v) => v.parse().map_err(|e: String| invalid("splice_mode", e))?,
            None => SpliceMode::default(),
        };
        let cases = doc.get("cases").map(|v| {
            v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect::<Vec<_>>()
        });
        if cases.as_ref().is_some_and(Vec::is_empty) {
            return Err(invalid("cases", "empty case list"));
        }

        Ok(RunManifest {
            run_id,
            corpus_root: doc.get("corpus_root").map(|v| resolve_path(base_dir, v)),
            cases,
            provider,
            arch,
            toolchain,
            samples_per_case,
            prompt_version: doc.get("prompt_version").unwrap_or(BUNDLED_VERSION).to_string(),
            prompts_root: doc.get("prompts_root").map(|v| resolve_path(base_dir, v)),
            hint_categories: parse_categories(doc.get("hint_categories").unwrap_or(""))?,
            feedback_rounds: parse_num(&doc, "feedback_rounds")?.unwrap_or(0),
            seed: parse_num(&doc, "seed")?.unwrap_or(0),
            splice_mode,
            workdir: doc.get("workdir").map(|v| resolve_path(base_dir, v)),
            source_text: text.to_string(),
        })
    }

    /// Equivalent manifest with every path absolute and every default
    /// spelled out. Parsing it reproduces `self` (apart from `source_text`).
    pub fn render_resolved(&self) -> String {
        let mut d = KvDoc::default();
        let p = |p: &Path| p.display().to_string();
        d.push("run_id", &self.run_id);
        if let Some(r) = &self.corpus_root {
            d.push("corpus_root", p(r));
        }
        if let Some(c) = &self.cases {
            d.push("cases", c.join(","));
        }
        d.push("arch", self.arch.as_str());
        d.push("samples_per_case", self.samples_per_case.to_string());
        d.push("prompt_version", &self.prompt_version);
        if let Some(r) = &self.prompts_root {
            d.push("prompts_root", p(r));
        }
        let hints: Vec<&str> = self.hint_categories.iter().map(|c| c.slug()).collect();
        d.push("hint_categories", if hints.is_empty() { "none".to_string() } else { hints.join(",") });
        d.push("feedback_rounds", self.feedback_rounds.to_string());
        d.push("seed", self.seed.to_string());
        d.push("splice_mode", self.splice_mode.as_str());
        if let Some(w) = &self.workdir {
            d.push("workdir", p(w));
        }
        let pc = &self.provider;
        d.push("provider.kind", pc.kind.as_str());
        d.push("provider.model", &pc.model_name);
        if let Some(e) = &pc.endpoint {
            d.push("provider.endpoint", e);
        }
        d.push("provider.temperature", format!("{:?}", pc.temperature));
        d.push("provider.max_output_tokens", pc.max_output_tokens.to_string());
        d.push("provider.request_timeout_ms", pc.request_timeout_ms.to_string());
        if let Some(k) = &pc.api_key_env {
            d.push("provider.api_key_env", k);
        }
        if let Some(a) = &pc.archive {
            d.push("provider.archive", p(a));
        }
        if let Some(s) = &pc.script {
            d.push("provider.script", p(s));
        }
        d.push("provider.max_in_flight", pc.max_in_flight.to_string());
        if let Some(r) = pc.requests_per_minute {
            d.push("provider.requests_per_minute", r.to_string());
        }
        d.push("provider.max_attempts", pc.max_attempts.to_string());
        let tc = &self.toolchain;
        for which in RefCompiler::ALL {
            let key = format!("toolchain.{which}");
            match tc.reference_compilers.get(&which) {
                Some(path) => d.push(key, p(path)),
                None => d.push(key, "none"),
            }
        }
        if let Some(f) = tc.compiler_flags.get(&RefCompiler::Clang) {
            d.push("toolchain.clang_flags", f.join(" "));
        }
        d.push("toolchain.assembler_driver", p(&tc.assembler_driver));
        d.push("toolchain.emulator", tc.emulator.as_deref().map(p).unwrap_or_else(|| "none".into()));
        d.push("toolchain.sysroot", tc.sysroot.as_deref().map(p).unwrap_or_else(|| "none".into()));
        d.push("toolchain.extra_flags", tc.extra_flags.join(" "));
        d.render()
    }

    /// Total samples the run will produce for `case_count` cases.
    pub fn expected_total(&self, case_count: usize) -> u64 {
        u64::from(self.samples_per_case) * case_count as u64
    }
}
