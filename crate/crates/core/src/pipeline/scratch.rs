use std::path::{Path, PathBuf};

use super::PipelineError;

/// Per-invocation working directory. Deleted on drop unless retained.
#[derive(Debug)]
pub struct ScratchDir {
    path: PathBuf,
    keep: bool,
}

impl ScratchDir {
    /// Creates `path` fresh, removing anything already there.
    pub fn create(path: &Path, keep: bool) -> Result<Self, PipelineError> {
        let err = |source| PipelineError::ScratchDirError { path: path.to_path_buf(), source };
        if path.exists() {
            std::fs::remove_dir_all(path).map_err(err)?;
        }
        std::fs::create_dir_all(path).map_err(err)?;
        let path = path.canonicalize().map_err(err)?;
        Ok(ScratchDir { path, keep })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Keeps the directory on disk after drop.
    pub fn retain(&mut self) {
        self.keep = true;
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, PipelineError> {
        let p = self.join(name);
        std::fs::write(&p, contents).map_err(|source| PipelineError::ScratchDirError { path: p.clone(), source })?;
        Ok(p)
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        if !self.keep {
            let _ = std::fs::remove_dir_all(&self.path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removed_on_drop_unless_retained() {
        let root = tempfile::tempdir().unwrap();
        let a = root.path().join("a");
        {
            let s = ScratchDir::create(&a, false).unwrap();
            s.write("x", "1").unwrap();
        }
        assert!(!a.exists());
        let b = root.path().join("b");
        {
            let mut s = ScratchDir::create(&b, false).unwrap();
            s.retain();
        }
        assert!(b.exists());
    }

    #[test]
    fn create_starts_empty() {
        let root = tempfile::tempdir().unwrap();
        let a = root.path().join("a");
        std::fs::create_dir_all(&a).unwrap();
        std::fs::write(a.join("stale"), "x").unwrap();
        let s = ScratchDir::create(&a, true).unwrap();
        assert!(!s.join("stale").exists());
    }
}
