use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{GenerationRequest, GenerationResult, Provider, ProviderConfig, ProviderError};
use crate::kv::KvDoc;

/// Sidecar metadata stored next to an archived response.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub model: String,
    pub temperature: f64,
    pub sample_index: u32,
    pub prompt_digest: String,
}

impl ArchiveEntry {
    fn render(&self) -> String {
        let mut doc = KvDoc::default();
        doc.push("model", &self.model);
        doc.push("temperature", format!("{:?}", self.temperature));
        doc.push("sample_index", self.sample_index.to_string());
        doc.push("prompt_digest", &self.prompt_digest);
        doc.render()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ProviderError> {
    let err = |source| ProviderError::ArchiveWriteError { path: path.to_path_buf(), source };
    if fs::read(path).map(|old| old == bytes).unwrap_or(false) {
        return Ok(());
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(err)?;
    f.write_all(bytes).map_err(err)?;
    f.sync_all().map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

/// Stores a response under its request digest. Recording the same result
/// again leaves a single, unchanged entry.
pub fn record(result: &GenerationResult, meta: &ArchiveEntry, archive: &Path) -> Result<(), ProviderError> {
    fs::create_dir_all(archive)
        .map_err(|source| ProviderError::ArchiveWriteError { path: archive.to_path_buf(), source })?;
    let base = archive.join(&result.request_digest);
    write_atomic(&base.with_extension("txt"), result.raw_text.as_bytes())?;
    write_atomic(&base.with_extension("meta"), meta.render().as_bytes())
}

/// Serves archived responses byte-for-byte.
pub struct ReplayProvider {
    cfg: ProviderConfig,
    root: PathBuf,
}

impl ReplayProvider {
    pub fn new(cfg: ProviderConfig) -> Self {
        let root = cfg.archive.clone().unwrap_or_default();
        ReplayProvider { cfg, root }
    }
}

impl Provider for ReplayProvider {
    fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    fn respond(&self, _req: &GenerationRequest<'_>, digest: &str) -> Result<String, ProviderError> {
        let path = self.root.join(format!("{digest}.txt"));
        match fs::read(&path) {
            Ok(bytes) => String::from_utf8(bytes)
                .map_err(|_| ProviderError::MalformedResponse(format!("{} is not UTF-8", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(ProviderError::ReplayMiss { digest: digest.to_string() })
            }
            Err(source) => Err(ProviderError::Io { path, source }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::ProviderKind;

    fn result(text: &str) -> GenerationResult {
        GenerationResult { raw_text: text.into(), latency_ms: 3, request_digest: "ab".repeat(32) }
    }

    fn meta() -> ArchiveEntry {
        ArchiveEntry { model: "m".into(), temperature: 0.8, sample_index: 2, prompt_digest: "cd".repeat(32) }
    }

    #[test]
    fn record_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        record(&result("x"), &meta(), dir.path()).unwrap();
        record(&result("x"), &meta(), dir.path()).unwrap();
        let n = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(n, 2);
        let m = fs::read_to_string(dir.path().join(format!("{}.meta", "ab".repeat(32)))).unwrap();
        assert!(m.contains("temperature=0.8"));
        assert!(m.contains("sample_index=2"));
    }

    #[test]
    fn replay_returns_bytes_unchanged_or_names_missing_digest() {
        let dir = tempfile::tempdir().unwrap();
        let text = "  ```asm\n\tret\n```\r\ntrailing  ";
        record(&result(text), &meta(), dir.path()).unwrap();
        let mut cfg = ProviderConfig::new(ProviderKind::Replay, "m");
        cfg.archive = Some(dir.path().to_path_buf());
        let p = ReplayProvider::new(cfg);
        let req = GenerationRequest { prompt: "", case_id: "c", sample_index: 0, round: 0 };
        assert_eq!(p.respond(&req, &"ab".repeat(32)).unwrap(), text);
        match p.respond(&req, "ff00") {
            Err(ProviderError::ReplayMiss { digest }) => assert_eq!(digest, "ff00"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unwritable_archive_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        fs::write(&file, "").unwrap();
        let e = record(&result("x"), &meta(), &file.join("sub")).unwrap_err();
        assert!(matches!(e, ProviderError::ArchiveWriteError { .. }));
    }
}
