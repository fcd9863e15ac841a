//! `asm-eval`: run LLM-as-compiler experiments and inspect their results.
//!
//! Exit codes: 0 success, 1 evaluated failure (invalid corpus, failing
//! smoke cases, reference build failure), 2 usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use asm_eval::corpus::{bundled_corpus_root, load_corpus};
use asm_eval::harness::{self, HarnessError, RunOptions};
use asm_eval::metrics::GroupBy;
use asm_eval::pipeline::{PipelineError, RefCompiler, ToolchainSpec};
use asm_eval::runstore::{emit_error_histogram, emit_summary, histogram_table, HistogramMode, RunManifest, RunStore};
use asm_eval::verdict::{judge, RuleTable};
use asm_eval::TargetArch;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "asm-eval", version, about = "Evaluate LLM-generated assembly against reference C compilers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Worker threads evaluating samples in parallel.
    #[arg(long)]
    jobs: Option<usize>,
    /// Keep per-sample scratch directories.
    #[arg(long)]
    keep_scratch: bool,
    /// Directory holding run directories.
    #[arg(long, default_value = "runs")]
    runs_dir: PathBuf,
    /// Override the run id from the manifest.
    #[arg(long)]
    run_id: Option<String>,
    /// Zero timestamps and durations so records are byte-comparable across runs.
    #[arg(long)]
    canonical: bool,
}

#[derive(Args)]
struct ToolFlags {
    /// Reference gcc (or `none`).
    #[arg(long)]
    gcc: Option<String>,
    /// Reference clang (or `none`).
    #[arg(long)]
    clang: Option<String>,
    /// User-mode emulator for non-host targets.
    #[arg(long)]
    emulator: Option<PathBuf>,
    #[arg(long)]
    sysroot: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Check that gcc and clang builds of every case agree.
    ValidateCorpus {
        /// Corpus root (defaults to the bundled corpus).
        root: Option<PathBuf>,
        #[arg(long)]
        arch: Option<String>,
        #[command(flatten)]
        tools: ToolFlags,
    },
    /// Print and write summary reports for a stored run.
    Report {
        run_id: String,
        #[arg(long, default_value = "runs")]
        runs_dir: PathBuf,
        /// Comma-separated subset of case,model,arch,prompt.
        #[arg(long, default_value = "case")]
        group_by: String,
    },
    /// Re-classify stored build and execution evidence and compare with stored verdicts.
    Classify {
        run_id: String,
        #[arg(long, default_value = "runs")]
        runs_dir: PathBuf,
    },
    /// Re-run a stored run against a replay archive.
    Replay {
        /// Id of the stored run to replay.
        #[arg(value_name = "RUN_ID")]
        source_run: String,
        #[arg(long)]
        archive: PathBuf,
        /// Where the original run lives (defaults to --runs-dir).
        #[arg(long)]
        from_runs_dir: Option<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Round-trip every case through the pipeline using the reference compiler's own assembly.
    Smoke {
        arch: String,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Only these cases (comma-separated).
        #[arg(long)]
        cases: Option<String>,
        #[arg(long)]
        keep_scratch: bool,
        #[command(flatten)]
        tools: ToolFlags,
    },
}

/// An error with its exit code.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(2, e.into())
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    let code = if e.is_config_error() { 2 } else { 1 };
    Failure(code, e.into())
}

fn run_options(flags: &RunFlags) -> RunOptions {
    let mut o = RunOptions::new(&flags.runs_dir);
    if let Some(j) = flags.jobs {
        o.jobs = j.max(1);
    }
    o.keep_scratch = flags.keep_scratch;
    o.canonical = flags.canonical;
    o.run_id = flags.run_id.clone();
    o
}

fn toolchain(arch: Option<&str>, tools: &ToolFlags) -> Result<ToolchainSpec, Failure> {
    let arch = match arch {
        Some(a) => a.parse::<TargetArch>()?,
        None => TargetArch::host().context("unsupported host architecture; pass --arch")?,
    };
    let mut tc = ToolchainSpec::detect(arch);
    for (flag, which) in [(&tools.gcc, RefCompiler::Gcc), (&tools.clang, RefCompiler::Clang)] {
        match flag.as_deref() {
            Some("none") => {
                tc.reference_compilers.remove(&which);
            }
            Some(p) => {
                let path = asm_eval::pipeline::find_in_path(p).unwrap_or_else(|| PathBuf::from(p));
                tc.reference_compilers.insert(which, path);
            }
            None => {}
        }
    }
    if tools.gcc.is_some() || tools.clang.is_some() {
        if let Some(p) = tc.primary_compiler().and_then(|c| tc.reference_compilers.get(&c)) {
            tc.assembler_driver = p.clone();
        }
    }
    if tools.emulator.is_some() {
        tc.emulator = tools.emulator.clone();
    }
    if tools.sysroot.is_some() {
        tc.sysroot = tools.sysroot.clone();
    }
    Ok(tc)
}

fn scratch_root(tag: &str) -> anyhow::Result<tempfile::TempDir> {
    tempfile::Builder::new().prefix(&format!("asm-eval-{tag}-")).tempdir().context("creating scratch directory")
}

fn pipeline_failure(e: PipelineError) -> Failure {
    Failure(2, e.into())
}

fn cmd_run(manifest: &Path, flags: &RunFlags) -> Result<u8, Failure> {
    let m = RunManifest::load(manifest)?;
    let outcome = harness::run_experiment(&m, &run_options(flags)).map_err(harness_failure)?;
    print!("{}", outcome.summary.table);
    eprintln!("records written to {}", outcome.run_dir.join("records.jsonl").display());
    Ok(0)
}

fn cmd_replay(run_id: &str, archive: &Path, from: Option<&Path>, flags: &RunFlags) -> Result<u8, Failure> {
    let from = from.unwrap_or(&flags.runs_dir);
    let outcome = harness::replay(from, run_id, archive, &run_options(flags)).map_err(harness_failure)?;
    print!("{}", outcome.summary.table);
    eprintln!("records written to {}", outcome.run_dir.join("records.jsonl").display());
    Ok(0)
}

fn cmd_validate(root: Option<&Path>, arch: Option<&str>, tools: &ToolFlags) -> Result<u8, Failure> {
    let root = root.map(Path::to_path_buf).unwrap_or_else(bundled_corpus_root);
    let corpus = load_corpus(&root)?;
    let tc = toolchain(arch, tools)?;
    let scratch = scratch_root("validate")?;
    let reports = harness::validate_corpus(&corpus, &tc, scratch.path()).map_err(pipeline_failure)?;
    let mut bad = 0;
    for r in &reports {
        if r.is_valid() {
            println!("ok    {}", r.case_id);
        } else {
            bad += 1;
            for p in &r.problems {
                println!("FAIL  {}: {p}", r.case_id);
            }
        }
    }
    println!("{} of {} cases valid", reports.len() - bad, reports.len());
    Ok(if bad == 0 { 0 } else { 1 })
}

fn cmd_report(run_id: &str, runs_dir: &Path, group_by: &str) -> Result<u8, Failure> {
    let group_by: GroupBy = group_by.parse()?;
    let store = RunStore::open(runs_dir, run_id)?;
    let records = store.load_records()?;
    let summary = emit_summary(&records, group_by);
    let name = format!("summary_{}.csv", group_by_name(group_by));
    store.write_report(&name, &summary.csv)?;
    print!("{}", summary.table);
    println!();
    print!("{}", histogram_table(&emit_error_histogram(&records, HistogramMode::PerSample, RuleTable::bundled())));
    harness::write_reports(&store, &records)?;
    Ok(0)
}

fn group_by_name(g: GroupBy) -> String {
    let parts: Vec<&str> = [(g.case, "case"), (g.model, "model"), (g.arch, "arch"), (g.prompt, "prompt")]
        .into_iter()
        .filter_map(|(on, n)| on.then_some(n))
        .collect();
    if parts.is_empty() {
        "all".into()
    } else {
        parts.join("_")
    }
}

fn cmd_classify(run_id: &str, runs_dir: &Path) -> Result<u8, Failure> {
    let store = RunStore::open(runs_dir, run_id)?;
    let records = store.load_records()?;
    let rules = RuleTable::bundled();
    let (mut same, mut changed, mut skipped) = (0, 0, 0);
    for r in &records {
        let Some(build) = &r.build else {
            skipped += 1;
            continue;
        };
        let expected = store.read_expected(&r.case_id).unwrap_or_default();
        let exec = r.exec.as_ref().map(|e| e.to_outcome());
        let Ok(j) = judge(&build.to_outcome(), exec.as_ref(), &expected, r.tolerance, rules) else {
            skipped += 1;
            continue;
        };
        if j.verdict == r.verdict {
            same += 1;
        } else {
            changed += 1;
            println!(
                "{} #{}: stored {:?}/{} -> now {:?}/{}",
                r.case_id,
                r.sample_index,
                r.verdict.kind,
                r.verdict.category.map(|c| c.slug()).unwrap_or("-"),
                j.verdict.kind,
                j.verdict.category.map(|c| c.slug()).unwrap_or("-"),
            );
        }
    }
    println!("{same} unchanged, {changed} changed, {skipped} without build evidence");
    Ok(if changed == 0 { 0 } else { 1 })
}

fn cmd_smoke(arch: &str, corpus: Option<&Path>, cases: Option<&str>, keep: bool, tools: &ToolFlags) -> Result<u8, Failure> {
    let tc = toolchain(Some(arch), tools)?;
    let root = corpus.map(Path::to_path_buf).unwrap_or_else(bundled_corpus_root);
    let mut corpus = load_corpus(&root)?;
    if let Some(list) = cases {
        let ids: Vec<String> = list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if let Some(missing) = ids.iter().find(|id| corpus.get(id).is_none()) {
            return Err(Failure(2, anyhow::anyhow!("case `{missing}` is not in the corpus")));
        }
        corpus.retain_ids(&ids);
    }
    let scratch = scratch_root("smoke")?;
    let scratch_path = if keep { scratch.keep() } else { scratch.path().to_path_buf() };
    let report = harness::smoke(&corpus, &tc, &scratch_path, keep).map_err(pipeline_failure)?;
    for r in &report.results {
        if r.verdict.is_success() {
            println!("ok    {}", r.case_id);
        } else {
            let cat = r.verdict.category.map(|c| c.name()).unwrap_or("?");
            println!("FAIL  {}: {cat}: {}", r.case_id, r.verdict.evidence);
        }
    }
    let failed: Vec<&str> = report.failures().map(|r| r.case_id.as_str()).collect();
    println!("{} of {} cases passed on {}", report.results.len() - failed.len(), report.results.len(), report.arch);
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failing cases: {}", failed.join(", "));
        Ok(1)
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Run { manifest, flags } => cmd_run(manifest, flags),
        Command::ValidateCorpus { root, arch, tools } => cmd_validate(root.as_deref(), arch.as_deref(), tools),
        Command::Report { run_id, runs_dir, group_by } => cmd_report(run_id, runs_dir, group_by),
        Command::Classify { run_id, runs_dir } => cmd_classify(run_id, runs_dir),
        Command::Replay { source_run, archive, from_runs_dir, flags } => {
            cmd_replay(source_run, archive, from_runs_dir.as_deref(), flags)
        }
        Command::Smoke { arch, corpus, cases, keep_scratch, tools } => {
            cmd_smoke(arch, corpus.as_deref(), cases.as_deref(), *keep_scratch, tools)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
