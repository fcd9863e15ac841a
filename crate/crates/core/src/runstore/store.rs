use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{RunManifest, SampleRecord};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("duplicate sample: run `{run}`, case `{case}`, index {index}")]
    DuplicateSample { run: String, case: String, index: u32 },
    #[error("cannot write {path}: {source}")]
    StoreWriteError { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    StoreReadError { path: PathBuf, source: std::io::Error },
    #[error("run directory {0} already holds records")]
    RunExists(PathBuf),
    #[error("no run at {0}")]
    RunNotFound(PathBuf),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

/// Single writer for one run directory.
pub struct RunStore {
    dir: PathBuf,
    run_id: String,
    records: Option<File>,
    seen: HashSet<(String, String, u32)>,
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::StoreWriteError { path: path.to_path_buf(), source }
}

impl RunStore {
    pub fn run_dir(runs_dir: &Path, run_id: &str) -> PathBuf {
        runs_dir.join(run_id)
    }

    /// Creates `runs_dir/<run_id>` and stores the manifest (verbatim and
    /// resolved). Refuses a directory that already has records.
    pub fn create(runs_dir: &Path, manifest: &RunManifest) -> Result<RunStore, StoreError> {
        let dir = Self::run_dir(runs_dir, &manifest.run_id);
        let records_path = dir.join("records.jsonl");
        if records_path.exists() {
            return Err(StoreError::RunExists(dir));
        }
        fs::create_dir_all(dir.join("expected")).map_err(write_err(&dir))?;
        fs::create_dir_all(dir.join("reports")).map_err(write_err(&dir))?;
        let mp = dir.join("manifest.txt");
        fs::write(&mp, &manifest.source_text).map_err(write_err(&mp))?;
        let rp = dir.join("resolved.txt");
        fs::write(&rp, manifest.render_resolved()).map_err(write_err(&rp))?;
        let file = OpenOptions::new().create_new(true).append(true).open(&records_path).map_err(write_err(&records_path))?;
        Ok(RunStore { dir, run_id: manifest.run_id.clone(), records: Some(file), seen: HashSet::new() })
    }

    /// Opens an existing run read-only.
    pub fn open(runs_dir: &Path, run_id: &str) -> Result<RunStore, StoreError> {
        let dir = Self::run_dir(runs_dir, run_id);
        if !dir.join("records.jsonl").is_file() {
            return Err(StoreError::RunNotFound(dir));
        }
        Ok(RunStore { dir, run_id: run_id.to_string(), records: None, seen: HashSet::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn records_path(&self) -> PathBuf {
        self.dir.join("records.jsonl")
    }

    /// Serializes `record` as one line and flushes it.
    pub fn append_record(&mut self, record: &SampleRecord) -> Result<(), StoreError> {
        let path = self.records_path();
        let Some(file) = self.records.as_mut() else {
            return Err(StoreError::StoreWriteError {
                path,
                source: std::io::Error::new(std::io::ErrorKind::PermissionDenied, "run opened read-only"),
            });
        };
        let key = record.key();
        if self.seen.contains(&key) {
            return Err(StoreError::DuplicateSample { run: key.0, case: key.1, index: key.2 });
        }
        let mut line = record.to_json_line();
        line.push('\n');
        file.write_all(line.as_bytes()).map_err(write_err(&path))?;
        file.flush().map_err(write_err(&path))?;
        self.seen.insert(key);
        Ok(())
    }

    pub fn load_records(&self) -> Result<Vec<SampleRecord>, StoreError> {
        read_records(&self.records_path())
    }

    /// Manifest text exactly as given at run creation.
    pub fn manifest_text(&self) -> Result<String, StoreError> {
        let p = self.dir.join("manifest.txt");
        fs::read_to_string(&p).map_err(|source| StoreError::StoreReadError { path: p, source })
    }

    /// Manifest with all paths absolute, suitable for re-running elsewhere.
    pub fn resolved_manifest_text(&self) -> Result<String, StoreError> {
        let p = self.dir.join("resolved.txt");
        fs::read_to_string(&p).map_err(|source| StoreError::StoreReadError { path: p, source })
    }

    pub fn write_expected(&self, case_id: &str, stdout: &str) -> Result<(), StoreError> {
        let p = self.dir.join("expected").join(format!("{case_id}.txt"));
        fs::write(&p, stdout).map_err(write_err(&p))
    }

    pub fn read_expected(&self, case_id: &str) -> Option<String> {
        fs::read_to_string(self.dir.join("expected").join(format!("{case_id}.txt"))).ok()
    }

    pub fn write_report(&self, name: &str, contents: &str) -> Result<PathBuf, StoreError> {
        let dir = self.dir.join("reports");
        fs::create_dir_all(&dir).map_err(write_err(&dir))?;
        let p = dir.join(name);
        fs::write(&p, contents).map_err(write_err(&p))?;
        Ok(p)
    }
}

/// Reads a `records.jsonl` file. Blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<SampleRecord>, StoreError> {
    let f = File::open(path).map_err(|source| StoreError::StoreReadError { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|source| StoreError::StoreReadError { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line)
            .map_err(|e| StoreError::Corrupt { path: path.to_path_buf(), line: i + 1, message: e.to_string() })?;
        out.push(r);
    }
    Ok(out)
}
