//! All-or-nothing output: files are staged in a hidden directory next to the
//! destination and moved into place only when the command succeeds.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::TempDir;

pub struct Staging {
    out: PathBuf,
    created_out: bool,
    dir: Option<TempDir>,
    files: Vec<PathBuf>,
}

impl Staging {
    pub fn new(out: &Path) -> Result<Self> {
        let created_out = !out.exists();
        fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;
        let dir = tempfile::Builder::new()
            .prefix(".xlsim-staging-")
            .tempdir_in(out)
            .with_context(|| format!("cannot stage outputs in {}", out.display()))?;
        Ok(Staging {
            out: out.to_path_buf(),
            created_out,
            dir: Some(dir),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, relative: impl AsRef<Path>, contents: &str) -> Result<()> {
        let relative = relative.as_ref();
        let path = self.dir.as_ref().expect("staging dir is live").path().join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("cannot write {}", relative.display()))?;
        if !self.files.iter().any(|f| f == relative) {
            self.files.push(relative.to_path_buf());
        }
        Ok(())
    }

    /// Moves every staged file to the output directory.
    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let dir = self.dir.take().expect("staging dir is live");
        let mut written = Vec::new();
        for rel in &self.files {
            let dest = self.out.join(rel);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::rename(dir.path().join(rel), &dest).with_context(|| format!("cannot move output to {}", dest.display()))?;
            written.push(dest);
        }
        Ok(written)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if let Some(dir) = self.dir.take() {
            drop(dir);
            if self.created_out {
                let _ = fs::remove_dir(&self.out);
            }
        }
    }
}

/// File-name-safe version of a label.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
