//! The evaluation loops: full experiment runs, the compiler round-trip
//! smoke test, corpus validation and replay.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::arch::TargetArch;
use crate::corpus::{self, Corpus, CorpusError, TestCase, ValidationReport};
use crate::kv::KvDoc;
use crate::metrics::GroupBy;
use crate::pipeline::{
    self, ExecOptions, ExitKind, PipelineError, ScratchDir, SpliceMode, Template, TemplateSet, ToolchainSpec,
};
use crate::prompting::{self, FeedbackOptions, PromptError, PromptLibrary, PromptSpec};
use crate::provider::{
    self, extract_assembly, open_provider, ArchiveEntry, AsmArtifact, ExtractionMethod, GenerationRequest, Provider,
    ProviderError, ProviderKind,
};
use crate::runstore::{
    emit_error_histogram, emit_scatter_data, emit_summary, histogram_csv, BuildSummary, ExecSummary, HistogramMode,
    ManifestError, RunManifest, RunStore, SampleRecord, StoreError, SummaryReport,
};
use crate::verdict::{judge, Classification, ErrorCategory, RuleTable, Verdict};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("case `{0}` is not in the corpus")]
    UnknownCase(String),
    #[error("reference build of `{case}` failed: {message}")]
    ReferenceFailed { case: String, message: String },
}

impl HarnessError {
    /// Configuration problems (exit 2) as opposed to evaluated failures.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, HarnessError::ReferenceFailed { .. })
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// What happened to one response on its way through the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub artifact: Option<AsmArtifact>,
    pub build: Option<BuildSummary>,
    pub exec: Option<ExecSummary>,
    pub verdict: Verdict,
    pub failure: Option<String>,
}

fn harness_failure(category: ErrorCategory, evidence: String) -> Verdict {
    let c = Classification { category, evidence };
    if category.is_compile() {
        Verdict::compile_error(c)
    } else {
        Verdict::exec_error(c)
    }
}

/// Everything needed to evaluate responses for one case.
pub struct CaseEnv<'a> {
    pub case: &'a TestCase,
    pub toolchain: &'a ToolchainSpec,
    pub template: Option<&'a Template>,
    pub splice_mode: SpliceMode,
    pub expected: &'a str,
    pub rules: &'a RuleTable,
}

impl CaseEnv<'_> {
    /// Extract, splice, build, run and judge. Never fails: every problem
    /// ends up in the verdict.
    pub fn evaluate_response(&self, raw_text: &str, scratch: &ScratchDir) -> Evaluation {
        match extract_assembly(raw_text) {
            Ok(a) => self.evaluate_assembly(a, scratch),
            Err(e) => Evaluation {
                artifact: None,
                build: None,
                exec: None,
                verdict: harness_failure(ErrorCategory::OtherCompileError, e.to_string()),
                failure: Some(e.to_string()),
            },
        }
    }

    pub fn evaluate_assembly(&self, artifact: AsmArtifact, scratch: &ScratchDir) -> Evaluation {
        let fail = |artifact, category, msg: String| Evaluation {
            artifact,
            build: None,
            exec: None,
            verdict: harness_failure(category, msg.clone()),
            failure: Some(msg),
        };
        let unit = match pipeline::splice(self.template, &artifact, self.splice_mode) {
            Ok(u) => u,
            Err(e) => return fail(Some(artifact), ErrorCategory::OtherCompileError, e.to_string()),
        };
        let built = match pipeline::build(&unit, self.case, self.toolchain, scratch) {
            Ok(b) => b,
            Err(e) => return fail(Some(artifact), ErrorCategory::OtherCompileError, e.to_string()),
        };
        let exec = if built.succeeded {
            match pipeline::execute(&built, self.toolchain, ExecOptions::with_timeout(self.case.timeout_ms)) {
                Ok(x) => Some(x),
                Err(e) => {
                    return Evaluation {
                        artifact: Some(artifact),
                        build: Some(BuildSummary::from(&built)),
                        exec: None,
                        verdict: harness_failure(ErrorCategory::OtherExecError, e.to_string()),
                        failure: Some(e.to_string()),
                    }
                }
            }
        } else {
            None
        };
        let j = judge(&built, exec.as_ref(), self.expected, self.case.tolerance, self.rules)
            .expect("build and execution are consistent by construction");
        Evaluation {
            artifact: Some(artifact),
            build: Some(BuildSummary::from(&built)),
            exec: exec.as_ref().map(|x| ExecSummary::new(x, j.comparison.clone())),
            verdict: j.verdict,
            failure: None,
        }
    }
}

/// Builds and runs the reference program with the primary compiler and
/// returns its standard output.
pub fn reference_output(case: &TestCase, tc: &ToolchainSpec, scratch: &ScratchDir) -> Result<String, HarnessError> {
    let which = tc
        .primary_compiler()
        .ok_or_else(|| PipelineError::ToolchainUnavailable(format!("no reference compiler for {}", tc.arch)))?;
    let (build, exec) = pipeline::build_reference(case, tc, which, scratch)?;
    let fail = |message: String| HarnessError::ReferenceFailed { case: case.id.clone(), message };
    let exec = exec.ok_or_else(|| fail(build.diagnostics.clone()))?;
    if exec.exit_kind != (ExitKind::Exited { code: 0 }) {
        return Err(fail(format!("reference program {}", exec.exit_kind)));
    }
    Ok(exec.stdout_text)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub jobs: usize,
    pub keep_scratch: bool,
    /// Zero wall-clock fields in stored records.
    pub canonical: bool,
    pub runs_dir: PathBuf,
    pub run_id: Option<String>,
}

impl RunOptions {
    pub fn new(runs_dir: impl Into<PathBuf>) -> Self {
        let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        RunOptions { jobs, keep_scratch: false, canonical: false, runs_dir: runs_dir.into(), run_id: None }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub records: Vec<SampleRecord>,
    /// Per-case summary.
    pub summary: SummaryReport,
}

struct RunCtx<'a> {
    manifest: &'a RunManifest,
    run_id: &'a str,
    provider: &'a dyn Provider,
    rules: &'a RuleTable,
    scratch_root: &'a Path,
    keep_scratch: bool,
    canonical: bool,
}

struct CaseData {
    case: TestCase,
    template: Option<Arc<Template>>,
    expected: String,
    base_prompt: PromptSpec,
}

fn selected_corpus(m: &RunManifest) -> Result<Corpus, HarnessError> {
    let root = m.corpus_root.clone().unwrap_or_else(corpus::bundled_corpus_root);
    let mut c = corpus::load_corpus(&root)?;
    if let Some(ids) = &m.cases {
        if let Some(missing) = ids.iter().find(|id| c.get(id).is_none()) {
            return Err(HarnessError::UnknownCase(missing.clone()));
        }
        c.retain_ids(ids);
    }
    Ok(c)
}

impl RunCtx<'_> {
    fn record_response(&self, prompt: &str, sample_index: u32, result: &provider::GenerationResult) {
        let cfg = self.provider.config();
        let (Some(dir), false) = (&cfg.archive, cfg.kind == ProviderKind::Replay) else { return };
        let meta = ArchiveEntry {
            model: cfg.model_name.clone(),
            temperature: cfg.temperature,
            sample_index,
            prompt_digest: crate::sha256_hex(prompt),
        };
        if let Err(e) = provider::record(result, &meta, dir) {
            log::warn!("{e}");
        }
    }

    fn sample(&self, data: &CaseData, sample_index: u32) -> SampleRecord {
        let m = self.manifest;
        let started_at_ms = now_ms();
        let env = CaseEnv {
            case: &data.case,
            toolchain: &m.toolchain,
            template: data.template.as_deref(),
            splice_mode: m.splice_mode,
            expected: &data.expected,
            rules: self.rules,
        };
        let mut prompt = data.base_prompt.clone();
        let mut latency_ms = 0;
        let mut initial_verdict = None;
        let mut round = 0;
        loop {
            let text = prompt.render();
            let scratch_path =
                self.scratch_root.join(&data.case.id).join(if round == 0 { format!("{sample_index}") } else { format!("{sample_index}.{round}") });
            let req = GenerationRequest { prompt: &text, case_id: &data.case.id, sample_index, round };
            let generated = self.provider.generate(&req);
            let (request_digest, raw_digest, eval) = match &generated {
                Ok(g) => {
                    latency_ms += g.latency_ms;
                    self.record_response(&text, sample_index, g);
                    let eval = match ScratchDir::create(&scratch_path, self.keep_scratch) {
                        Ok(scratch) => env.evaluate_response(&g.raw_text, &scratch),
                        Err(e) => Evaluation {
                            artifact: None,
                            build: None,
                            exec: None,
                            verdict: harness_failure(ErrorCategory::OtherCompileError, e.to_string()),
                            failure: Some(e.to_string()),
                        },
                    };
                    (Some(g.request_digest.clone()), Some(crate::sha256_hex(&g.raw_text)), eval)
                }
                Err(e) => {
                    let msg = format!("generation failed: {e}");
                    let digest = provider::request_digest(&text, &m.provider.model_name, sample_index, m.provider.temperature);
                    let eval = Evaluation {
                        artifact: None,
                        build: None,
                        exec: None,
                        verdict: harness_failure(ErrorCategory::OtherCompileError, msg.clone()),
                        failure: Some(msg),
                    };
                    (Some(digest), None, eval)
                }
            };
            let mut record = SampleRecord {
                run_id: self.run_id.to_string(),
                case_id: data.case.id.clone(),
                arch: m.arch,
                model_name: m.provider.model_name.clone(),
                prompt_version: m.prompt_version.clone(),
                sample_index,
                temperature: m.provider.temperature,
                max_output_tokens: m.provider.max_output_tokens,
                hint_categories: m.hint_categories.clone(),
                splice_mode: m.splice_mode,
                attempts: round + 1,
                tolerance: data.case.tolerance,
                request_digest,
                raw_response_digest: raw_digest,
                extraction_method: eval.artifact.as_ref().map(|a| a.extraction_method),
                generation_error: eval.failure.clone(),
                build: eval.build.clone(),
                exec: eval.exec.clone(),
                verdict: eval.verdict.clone(),
                initial_verdict: initial_verdict.clone(),
                latency_ms,
                started_at_ms,
                finished_at_ms: now_ms(),
            };
            // Provider failures are not worth feeding back.
            let retry = !record.verdict.is_success() && generated.is_ok() && round < m.feedback_rounds;
            if !retry {
                if self.canonical {
                    record.canonicalize();
                }
                return record;
            }
            if initial_verdict.is_none() {
                initial_verdict = Some(record.verdict.clone());
            }
            let prior_asm = eval.artifact.as_ref().map(|a| a.assembly_text.as_str()).unwrap_or("");
            match prompting::build_feedback_prompt(&prompt, &record, prior_asm, FeedbackOptions::default()) {
                Ok(p) => prompt = p,
                Err(_) => return record,
            }
            round += 1;
        }
    }
}

/// Runs an experiment end to end and stores its records and reports under
/// `opts.runs_dir/<run-id>/`.
pub fn run_experiment(manifest: &RunManifest, opts: &RunOptions) -> Result<RunOutcome, HarnessError> {
    let mut manifest = manifest.clone();
    if let Some(id) = &opts.run_id {
        manifest.run_id = id.clone();
    }
    let m = &manifest;
    let corpus = selected_corpus(m)?;
    m.toolchain.require_runnable()?;
    let provider = open_provider(&m.provider)?;
    let prompts = PromptLibrary::resolve(m.prompts_root.as_deref(), &m.prompt_version)?;
    let rules = RuleTable::bundled();

    let mut store = RunStore::create(&opts.runs_dir, m)?;
    let scratch_root = m.workdir.clone().unwrap_or_else(|| store.dir().join("scratch")).join(&m.run_id);

    let templates = TemplateSet::new();
    let mut cases = Vec::with_capacity(corpus.len());
    for case in &corpus.cases {
        log::info!("reference build for {}", case.id);
        let scratch = ScratchDir::create(&scratch_root.join(&case.id).join("reference"), opts.keep_scratch)?;
        let expected = reference_output(case, &m.toolchain, &scratch)?;
        store.write_expected(&case.id, &expected)?;
        let template = match m.splice_mode {
            SpliceMode::SingleUnitSplice => Some(templates.get_or_build(case, &m.toolchain, &scratch)?),
            SpliceMode::SeparateObjectLink => None,
        };
        let base = prompts.build_base_prompt(case, m.arch)?;
        let base_prompt = prompts.augment_with_hints(&base, &m.hint_categories)?;
        cases.push(CaseData { case: case.clone(), template, expected, base_prompt });
    }

    let ctx = RunCtx {
        manifest: m,
        run_id: &m.run_id,
        provider: provider.as_ref(),
        rules,
        scratch_root: &scratch_root,
        keep_scratch: opts.keep_scratch,
        canonical: opts.canonical,
    };
    let work: Vec<(usize, u32)> =
        (0..cases.len()).flat_map(|c| (0..m.samples_per_case).map(move |i| (c, i))).collect();
    let total = work.len();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, SampleRecord)>();

    let mut records = Vec::with_capacity(total);
    let mut write_error = None;
    std::thread::scope(|s| {
        for _ in 0..opts.jobs.clamp(1, total.max(1)) {
            let tx = tx.clone();
            let (ctx, cases, work, next) = (&ctx, &cases, &work, &next);
            s.spawn(move || loop {
                let pos = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(c, i)) = work.get(pos) else { break };
                let r = ctx.sample(&cases[c], i);
                if tx.send((pos, r)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // Records are appended in (case, sample) order whatever order the
        // workers finish in.
        let mut pending = BTreeMap::new();
        let mut cursor = 0;
        for (pos, r) in rx {
            pending.insert(pos, r);
            while let Some(r) = pending.remove(&cursor) {
                log::info!(
                    "[{}/{}] {} #{}: {:?}{}",
                    cursor + 1,
                    total,
                    r.case_id,
                    r.sample_index,
                    r.verdict.kind,
                    r.verdict.category.map(|c| format!(" ({c})")).unwrap_or_default()
                );
                if write_error.is_none() {
                    if let Err(e) = store.append_record(&r) {
                        write_error = Some(e);
                    }
                }
                records.push(r);
                cursor += 1;
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e.into());
    }

    let stored = store.load_records()?;
    write_reports(&store, &stored)?;
    if !opts.keep_scratch && m.workdir.is_none() {
        let _ = std::fs::remove_dir_all(store.dir().join("scratch"));
    }
    Ok(RunOutcome { run_dir: store.dir().to_path_buf(), summary: emit_summary(&stored, GroupBy::CASE), records })
}

/// Writes `summary.csv` (per case), `summary_arch.csv`, `histogram.csv`,
/// `histogram_occurrences.csv` and `scatter.csv`.
pub fn write_reports(store: &RunStore, records: &[SampleRecord]) -> Result<(), StoreError> {
    store.write_report("summary.csv", &emit_summary(records, GroupBy::CASE).csv)?;
    store.write_report("summary_arch.csv", &emit_summary(records, GroupBy::ARCH).csv)?;
    let rules = RuleTable::bundled();
    store.write_report("histogram.csv", &histogram_csv(&emit_error_histogram(records, HistogramMode::PerSample, rules)))?;
    store.write_report(
        "histogram_occurrences.csv",
        &histogram_csv(&emit_error_histogram(records, HistogramMode::PerOccurrence, rules)),
    )?;
    store.write_report("scatter.csv", &emit_scatter_data(records))?;
    Ok(())
}

/// Re-runs a stored run against a replay archive. The stored manifest is
/// reused with the provider swapped for replay.
pub fn replay(runs_dir: &Path, run_id: &str, archive: &Path, opts: &RunOptions) -> Result<RunOutcome, HarnessError> {
    let store = RunStore::open(runs_dir, run_id)?;
    let mut doc = KvDoc::default();
    let resolved = KvDoc::parse(&store.resolved_manifest_text()?).map_err(ManifestError::from)?;
    for (k, v) in resolved.iter() {
        match k {
            "provider.kind" => doc.push(k, "replay"),
            "provider.archive" | "provider.script" | "provider.endpoint" | "provider.api_key_env" => {}
            _ => doc.push(k, v),
        }
    }
    let archive = std::fs::canonicalize(archive).unwrap_or_else(|_| archive.to_path_buf());
    doc.push("provider.archive", archive.display().to_string());
    let manifest = RunManifest::parse(&doc.render(), Path::new("/"))?;
    let mut opts = opts.clone();
    if opts.run_id.is_none() && opts.runs_dir == runs_dir {
        opts.run_id = Some(format!("{run_id}-replay"));
    }
    run_experiment(&manifest, &opts)
}

#[derive(Debug, Clone)]
pub struct SmokeResult {
    pub case_id: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct SmokeReport {
    pub arch: TargetArch,
    pub results: Vec<SmokeResult>,
}

impl SmokeReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.verdict.is_success())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SmokeResult> {
        self.results.iter().filter(|r| !r.verdict.is_success())
    }
}

/// Round trip through the whole pipeline with the reference compiler's own
/// kernel assembly standing in for a model response. Every case should
/// come back `Success`.
pub fn smoke(corpus: &Corpus, tc: &ToolchainSpec, scratch_root: &Path, keep: bool) -> Result<SmokeReport, PipelineError> {
    tc.require_runnable()?;
    let which = tc
        .primary_compiler()
        .ok_or_else(|| PipelineError::ToolchainUnavailable(format!("no reference compiler for {}", tc.arch)))?;
    let rules = RuleTable::bundled();
    let mut results = Vec::new();
    for case in &corpus.cases {
        let verdict = smoke_case(case, tc, which, scratch_root, keep, rules).unwrap_or_else(|e| {
            harness_failure(ErrorCategory::OtherCompileError, e.to_string())
        });
        log::info!("smoke {}: {:?}", case.id, verdict.kind);
        results.push(SmokeResult { case_id: case.id.clone(), verdict });
    }
    Ok(SmokeReport { arch: tc.arch, results })
}

fn smoke_case(
    case: &TestCase,
    tc: &ToolchainSpec,
    which: pipeline::RefCompiler,
    root: &Path,
    keep: bool,
    rules: &RuleTable,
) -> Result<Verdict, HarnessError> {
    let reference = ScratchDir::create(&root.join(&case.id).join("reference"), keep)?;
    let expected = reference_output(case, tc, &reference)?;
    let template = Template::build(case, tc, &reference)?;
    let asm = pipeline::reference_kernel_asm(case, tc, which, &reference)?;
    let artifact =
        AsmArtifact { assembly_text: asm, extraction_method: ExtractionMethod::WholeResponse, fence_language_hint: None };
    let env = CaseEnv {
        case,
        toolchain: tc,
        template: Some(&template),
        splice_mode: SpliceMode::SingleUnitSplice,
        expected: &expected,
        rules,
    };
    let scratch = ScratchDir::create(&root.join(&case.id).join("sample"), keep)?;
    Ok(env.evaluate_assembly(artifact, &scratch).verdict)
}

/// Validates every case: both reference compilers build, run
/// deterministically and agree within tolerance.
pub fn validate_corpus(corpus: &Corpus, tc: &ToolchainSpec, scratch_root: &Path) -> Result<Vec<ValidationReport>, PipelineError> {
    tc.require_runnable()?;
    corpus.cases.iter().map(|c| corpus::validate_case(c, tc, scratch_root)).collect()
}
